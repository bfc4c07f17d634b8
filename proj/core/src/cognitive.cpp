#include "teamscope/cognitive.hpp"

#include <algorithm>

#include "teamscope/errors.hpp"
#include "teamscope/percentile.hpp"

namespace teamscope {

namespace {

struct EmbeddedPast {
  std::vector<std::string> ids;
  std::vector<const std::vector<double>*> vecs;
  int n_past = 0;
  int skipped = 0;
};

EmbeddedPast embedded_past(const CorpusIndex& index, const VectorStore& store,
                           const std::string& author_id, int t, int b) {
  EmbeddedPast out;
  auto past = index.author_past_pubs(author_id, t, b);
  out.n_past = static_cast<int>(past.size());
  for (auto& id : past) {
    if (const auto* v = store.find(id)) {
      out.vecs.push_back(v);
      out.ids.push_back(std::move(id));
    } else {
      ++out.skipped;
    }
  }
  return out;
}

}  // namespace

AuthorDistanceDistribution author_distance_distribution(const CorpusIndex& index,
                                                        const VectorStore& store,
                                                        const std::string& author_id,
                                                        const std::string& focal_doc_id,
                                                        const CognitiveParams& params) {
  const auto& focal = index.doc(focal_doc_id);
  AuthorDistanceDistribution out;
  out.author_id = author_id;
  out.focal_doc_id = focal_doc_id;
  auto past = embedded_past(index, store, author_id, focal.year, params.b);
  out.n_past_docs = past.n_past;
  out.n_embedded = static_cast<int>(past.vecs.size());
  out.skipped_no_vector = past.skipped;
  for (std::size_t i = 0; i < past.vecs.size(); ++i)
    for (std::size_t j = i + 1; j < past.vecs.size(); ++j)
      out.distances.push_back(cosine_distance(*past.vecs[i], *past.vecs[j]));
  return out;
}

std::optional<double> intra_author(const CorpusIndex& index, const VectorStore& store,
                                   const std::string& author_id,
                                   const std::string& focal_doc_id,
                                   const CognitiveParams& params, int* skipped_no_vector) {
  auto dist = author_distance_distribution(index, store, author_id, focal_doc_id, params);
  if (skipped_no_vector) *skipped_no_vector += dist.skipped_no_vector;
  if (dist.n_embedded < 2) return std::nullopt;
  return percentile(std::move(dist.distances), params.q);
}

TeamScores score_team(const CorpusIndex& index, const VectorStore& store,
                      const std::string& focal_doc_id, const CognitiveParams& params) {
  const auto& focal = index.doc(focal_doc_id);
  TeamScores out;
  out.focal_doc_id = focal_doc_id;

  std::vector<EmbeddedPast> past;
  past.reserve(focal.author_ids.size());
  for (const auto& author : focal.author_ids) {
    auto p = embedded_past(index, store, author, focal.year, params.b);
    AuthorScore score;
    score.author_id = author;
    score.n_past_docs = p.n_past;
    score.n_embedded = static_cast<int>(p.vecs.size());
    score.skipped_no_vector = p.skipped;
    if (score.n_embedded >= 2) {
      std::vector<double> d;
      d.reserve(p.vecs.size() * (p.vecs.size() - 1) / 2);
      for (std::size_t i = 0; i < p.vecs.size(); ++i)
        for (std::size_t j = i + 1; j < p.vecs.size(); ++j)
          d.push_back(cosine_distance(*p.vecs[i], *p.vecs[j]));
      score.intra = percentile(std::move(d), params.q);
    }
    out.authors.push_back(std::move(score));
    past.push_back(std::move(p));
  }

  std::vector<double> pool;
  for (std::size_t a = 0; a < past.size(); ++a) {
    for (std::size_t e = a + 1; e < past.size(); ++e) {
      for (std::size_t i = 0; i < past[a].vecs.size(); ++i) {
        for (std::size_t j = 0; j < past[e].vecs.size(); ++j) {
          if (params.exclude_shared_doc_pairs && past[a].ids[i] == past[e].ids[j])
            continue;
          pool.push_back(cosine_distance(*past[a].vecs[i], *past[e].vecs[j]));
        }
      }
    }
  }
  out.pool_size = pool.size();
  if (!pool.empty()) out.inter = percentile(std::move(pool), params.q);
  return out;
}

std::optional<double> team_intra(const TeamScores& scores) {
  std::vector<double> defined;
  for (const auto& a : scores.authors)
    if (a.intra) defined.push_back(*a.intra);
  if (defined.empty()) return std::nullopt;
  // value-ordered sum so the mean ignores author order
  std::sort(defined.begin(), defined.end());
  double sum = 0.0;
  for (double v : defined) sum += v;
  return sum / static_cast<double>(defined.size());
}

std::optional<double> inter_author(const CorpusIndex& index, const VectorStore& store,
                                   const std::string& focal_doc_id,
                                   const CognitiveParams& params) {
  return score_team(index, store, focal_doc_id, params).inter;
}

ProfileThresholds fit_thresholds(std::vector<double> scores, double exploratory_q,
                                 double exploitative_q, std::size_t min_scores) {
  if (scores.size() < min_scores)
    throw ComputeError("fit_thresholds: need at least " + std::to_string(min_scores) +
                       " scores, got " + std::to_string(scores.size()));
  std::sort(scores.begin(), scores.end());
  ProfileThresholds t;
  t.exploratory_cutoff = percentile_sorted(scores, exploratory_q);
  t.exploitative_cutoff = percentile_sorted(scores, exploitative_q);
  return t;
}

TeamCognitiveMetrics team_composition(const TeamScores& scores,
                                      const ProfileThresholds& thresholds) {
  TeamCognitiveMetrics m;
  m.focal_doc_id = scores.focal_doc_id;
  m.n_authors = static_cast<int>(scores.authors.size());
  m.intra_fp = team_intra(scores);
  m.inter_fp = scores.inter;
  for (const auto& a : scores.authors) {
    if (!a.intra) continue;
    ++m.n_scored;
    if (*a.intra >= thresholds.exploratory_cutoff) ++m.n_exploratory;
    if (*a.intra <= thresholds.exploitative_cutoff) ++m.n_exploitative;
  }
  if (m.n_authors > 0) {
    m.share_exploratory = static_cast<double>(m.n_exploratory) / m.n_authors;
    m.share_exploitative = static_cast<double>(m.n_exploitative) / m.n_authors;
  }
  m.interaction = m.share_exploratory * m.share_exploitative;
  return m;
}

}  // namespace teamscope
