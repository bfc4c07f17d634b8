#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "teamscope/cooc.hpp"
#include "teamscope/corpus.hpp"
#include "teamscope/vectors.hpp"

// Brute-force reference implementations, written straight from the indicator
// definitions with no shared machinery beyond the distance/percentile
// primitives. Quadratic-or-worse on purpose; use on small corpora only.
namespace teamscope::oracle {

// ---- cognitive profiles -------------------------------------------------

std::optional<double> intra(const CorpusIndex& index, const VectorStore& store,
                            const std::string& author_id, const std::string& focal_doc_id,
                            int b, double q);

std::optional<double> inter(const CorpusIndex& index, const VectorStore& store,
                            const std::string& focal_doc_id, int b, double q,
                            bool exclude_shared_doc_pairs = false);

struct Shares {
  int n_authors = 0;
  int n_exploratory = 0;
  int n_exploitative = 0;
  double share_exploratory = 0.0;
  double share_exploitative = 0.0;
  double interaction = 0.0;
};

Shares shares(const CorpusIndex& index, const VectorStore& store,
              const std::string& focal_doc_id, int b, double q, double cutoff_hi,
              double cutoff_lo);

// ---- combinatorial novelty ----------------------------------------------

// rebuilds the year's pair counts and the citation-switching null itself
// (single-threaded, same seed contract as the engine) before scoring
std::optional<double> uzzi(const CorpusIndex& index, const std::string& doc_id,
                           EntityKind kind, std::uint64_t seed, int resamples,
                           int swap_factor = 10, double agg_q = 10.0,
                           bool agg_mean = false);

std::optional<double> lee(const CorpusIndex& index, const std::string& doc_id,
                          EntityKind kind, double agg_q = 10.0);

// partition is the shared stochastic component; the share is re-derived
std::optional<double> foster(const CorpusIndex& index, const std::string& doc_id,
                             EntityKind kind, const EntityVocabulary& vocab,
                             const CommunityPartition& partition);

std::optional<double> wang(const CorpusIndex& index, const std::string& doc_id,
                           EntityKind kind, int reuse_window = 3, int min_reuse = 1,
                           int profile_window = 3);

std::optional<double> shibayama(const CorpusIndex& index, const std::string& doc_id,
                                const VectorStore& store, bool use_mean = false,
                                double q = 90.0);

// ---- disruption ----------------------------------------------------------

std::optional<double> di1(const CorpusIndex& index, const std::string& focal,
                          std::optional<int> horizon = std::nullopt);
std::optional<double> di5(const CorpusIndex& index, const std::string& focal,
                          std::optional<int> horizon = std::nullopt);
std::optional<double> di1nok(const CorpusIndex& index, const std::string& focal,
                             std::optional<int> horizon = std::nullopt);
std::optional<double> dein(const CorpusIndex& index, const std::string& focal,
                           std::optional<int> horizon = std::nullopt);
std::optional<double> breadth(const CorpusIndex& index, const std::string& focal,
                              std::optional<int> horizon = std::nullopt);
std::optional<double> depth(const CorpusIndex& index, const std::string& focal,
                            std::optional<int> horizon = std::nullopt);

// ---- analytics -----------------------------------------------------------

// average-tie percentile ranks computed per element by counting
std::vector<double> percentile_rank(std::span<const double> values);

// ordinary least squares by explicit normal equations
std::vector<double> linear_coefficients(const std::vector<std::vector<double>>& rows,
                                        const std::vector<double>& y);

// CR1 cluster-robust standard errors by the direct sandwich formula
std::vector<double> clustered_se(const std::vector<std::vector<double>>& rows,
                                 const std::vector<double>& y,
                                 const std::vector<std::string>& cluster);

}  // namespace teamscope::oracle
