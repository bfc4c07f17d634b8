#pragma once

#include <optional>
#include <string>
#include <vector>

#include "teamscope/corpus.hpp"
#include "teamscope/vectors.hpp"

namespace teamscope {

struct CognitiveParams {
  int b = 5;        // look-back window in years
  double q = 90.0;  // percentile summarizing a distance distribution
  // drop cross-author distances where both sides are the same shared document
  bool exclude_shared_doc_pairs = false;
};

struct AuthorDistanceDistribution {
  std::string author_id;
  std::string focal_doc_id;
  std::vector<double> distances;  // all C(n_embedded, 2) pairwise distances
  int n_past_docs = 0;            // docs in window
  int n_embedded = 0;             // docs in window with a vector
  int skipped_no_vector = 0;
};

AuthorDistanceDistribution author_distance_distribution(const CorpusIndex& index,
                                                        const VectorStore& store,
                                                        const std::string& author_id,
                                                        const std::string& focal_doc_id,
                                                        const CognitiveParams& params);

// q-th percentile of the author's past-work distance distribution;
// missing with fewer than 2 embedded past docs
std::optional<double> intra_author(const CorpusIndex& index, const VectorStore& store,
                                   const std::string& author_id,
                                   const std::string& focal_doc_id,
                                   const CognitiveParams& params,
                                   int* skipped_no_vector = nullptr);

struct AuthorScore {
  std::string author_id;
  std::optional<double> intra;
  int n_past_docs = 0;
  int n_embedded = 0;
  int skipped_no_vector = 0;
};

struct TeamScores {
  std::string focal_doc_id;
  std::vector<AuthorScore> authors;  // in document author order
  std::optional<double> inter;
  std::size_t pool_size = 0;  // cross-author distance count behind `inter`
};

// per-author intra scores plus the pooled cross-author percentile
TeamScores score_team(const CorpusIndex& index, const VectorStore& store,
                      const std::string& focal_doc_id, const CognitiveParams& params);

// mean of the defined per-author scores; missing if none are defined
std::optional<double> team_intra(const TeamScores& scores);

// q-th percentile of all cross-author past-work distances; missing if the
// pool is empty
std::optional<double> inter_author(const CorpusIndex& index, const VectorStore& store,
                                   const std::string& focal_doc_id,
                                   const CognitiveParams& params);

struct ProfileThresholds {
  double exploratory_cutoff = 0.0;   // high percentile of the score sample
  double exploitative_cutoff = 0.0;  // median of the score sample
};

// Fits both cutoffs on a pooled score sample. ComputeError with fewer than
// min_scores defined values.
ProfileThresholds fit_thresholds(std::vector<double> scores, double exploratory_q = 90.0,
                                 double exploitative_q = 50.0,
                                 std::size_t min_scores = 10);

struct TeamCognitiveMetrics {
  std::string focal_doc_id;
  std::optional<double> intra_fp;
  std::optional<double> inter_fp;
  int n_authors = 0;
  int n_scored = 0;
  int n_exploratory = 0;
  int n_exploitative = 0;
  double share_exploratory = 0.0;  // over full team size
  double share_exploitative = 0.0;
  double interaction = 0.0;
};

// exploratory iff intra >= exploratory_cutoff, exploitative iff
// intra <= exploitative_cutoff; unscored authors count toward team size only
TeamCognitiveMetrics team_composition(const TeamScores& scores,
                                      const ProfileThresholds& thresholds);

}  // namespace teamscope
