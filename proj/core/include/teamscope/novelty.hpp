#pragma once

#include <optional>
#include <span>
#include <string>

#include "teamscope/cooc.hpp"
#include "teamscope/corpus.hpp"
#include "teamscope/vectors.hpp"

namespace teamscope {

// empty flag = scored; otherwise the reason the value is missing
struct NoveltyScores {
  std::string doc_id;
  EntityKind kind = EntityKind::journal;
  std::optional<double> uzzi, lee, foster, wang, shibayama;
  std::string uzzi_flag, lee_flag, foster_flag, wang_flag, shibayama_flag;
};

// z = (N_p - mu_p) / sigma_p per pair instance with sigma > 0, aggregated by
// the low percentile (or mean) and sign-flipped so larger means more atypical
std::optional<double> uzzi_score(const DocumentRecord& doc, EntityKind kind,
                                 const EntityVocabulary& vocab,
                                 const PairCountTable& table,
                                 const NullModelStats& null_stats, double agg_q = 10.0,
                                 bool agg_mean = false, std::string* flag = nullptr);

// -ln of the low-percentile pair commonness
std::optional<double> lee_score(const DocumentRecord& doc, EntityKind kind,
                                const EntityVocabulary& vocab,
                                const PairCountTable& table, double agg_q = 10.0,
                                std::string* flag = nullptr);

// share of pair instances whose endpoints sit in different communities
std::optional<double> foster_score(const DocumentRecord& doc, EntityKind kind,
                                   const EntityVocabulary& vocab,
                                   const CommunityPartition& partition,
                                   std::string* flag = nullptr);

struct WangParams {
  int reuse_window = 3;    // years after t a new pair may reappear in
  int min_reuse = 1;       // distinct documents that must reuse it
  int profile_window = 3;  // years before t for the difficulty weight
};

// sum of 1 - profile_similarity over the doc's distinct brand-new pairs that
// get reused; history = ascending tables for all years < t, future = exactly
// the reuse window t+1 .. t+reuse_window
std::optional<double> wang_score(const DocumentRecord& doc, EntityKind kind,
                                 const EntityVocabulary& vocab,
                                 std::span<const PairCountTable> history,
                                 std::span<const PairCountTable> future,
                                 const WangParams& params = {},
                                 std::string* flag = nullptr);

struct ShibayamaAgg {
  bool use_mean = false;
  double q = 90.0;
};

// spread of the doc's reference embeddings (pairwise cosine distances over
// distinct embedded references)
std::optional<double> shibayama_score(const DocumentRecord& doc, const VectorStore& store,
                                      const ShibayamaAgg& agg = {},
                                      std::string* flag = nullptr);

}  // namespace teamscope
