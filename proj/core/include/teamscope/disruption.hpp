#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "teamscope/corpus.hpp"

namespace teamscope {

struct DisruptionCounts {
  std::string focal;
  std::vector<std::string> citers;      // in-corpus citers, sorted
  std::vector<std::string> focal_refs;  // distinct resolved references, sorted
  std::map<std::string, int> citer_ref_overlap;
  // true iff the citer has an outgoing reference to another citer of focal
  std::map<std::string, bool> citer_mutual;
  std::int64_t n_k = 0;  // non-citing papers (year >= focal's) citing >=1 focal ref

  // citers citing fewer than l of focal's references
  std::int64_t n_i(int l) const;
  // citers citing at least l of them
  std::int64_t n_j(int l) const;
};

// horizon, when set, keeps only citers (and k-papers) within
// focal_year + horizon; default is the full future
DisruptionCounts disruption_counts(const CorpusIndex& index, const std::string& focal,
                                   std::optional<int> horizon = std::nullopt);

// (n_i - n_j) / (n_i + n_j [+ n_k]); missing when the denominator is 0
std::optional<double> di(const DisruptionCounts& counts, int l, bool with_k);

// mean citer overlap with focal's reference list; missing without citers
std::optional<double> dein(const DisruptionCounts& counts);

struct BreadthDepth {
  double breadth = 0.0;
  double depth = 0.0;  // share of citers entangled with other citers
};

std::optional<BreadthDepth> breadth_depth(const DisruptionCounts& counts);

struct ImpactScores {
  std::string doc_id;
  std::int64_t citation_count = 0;
  std::optional<double> di1, di5, di1nok, dein, breadth, depth;
};

ImpactScores impact_scores(const CorpusIndex& index, const std::string& focal,
                           std::optional<int> horizon = std::nullopt);

}  // namespace teamscope
