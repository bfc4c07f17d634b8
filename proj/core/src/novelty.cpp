#include "teamscope/novelty.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "teamscope/errors.hpp"
#include "teamscope/percentile.hpp"

namespace teamscope {

namespace {

void set_flag(std::string* flag, const char* reason) {
  if (flag) *flag = reason;
}

}  // namespace

std::optional<double> uzzi_score(const DocumentRecord& doc, EntityKind kind,
                                 const EntityVocabulary& vocab,
                                 const PairCountTable& table,
                                 const NullModelStats& null_stats, double agg_q,
                                 bool agg_mean, std::string* flag) {
  auto pairs = pair_multiset(doc, kind, vocab);
  if (pairs.empty()) {
    set_flag(flag, "too_few_entities");
    return std::nullopt;
  }
  std::vector<double> z;
  z.reserve(pairs.size());
  for (PairKey p : pairs) {
    const MeanSd* ms = null_stats.find(p);
    if (!ms || ms->sigma <= 0.0) continue;  // undefined z, excluded
    double n = static_cast<double>(table.count(p));
    z.push_back((n - ms->mu) / ms->sigma);
  }
  if (z.empty()) {
    set_flag(flag, "all_sigma_zero");
    return std::nullopt;
  }
  double agg;
  if (agg_mean) {
    double sum = 0.0;
    for (double v : z) sum += v;
    agg = sum / static_cast<double>(z.size());
  } else {
    agg = percentile(std::move(z), agg_q);
  }
  return -agg;
}

std::optional<double> lee_score(const DocumentRecord& doc, EntityKind kind,
                                const EntityVocabulary& vocab,
                                const PairCountTable& table, double agg_q,
                                std::string* flag) {
  auto pairs = pair_multiset(doc, kind, vocab);
  if (pairs.empty()) {
    set_flag(flag, "too_few_entities");
    return std::nullopt;
  }
  std::vector<double> c;
  c.reserve(pairs.size());
  for (PairKey p : pairs) c.push_back(commonness(table, p));
  double agg = percentile(std::move(c), agg_q);
  if (agg <= 0.0) {
    set_flag(flag, "zero_commonness");
    return std::nullopt;
  }
  return -std::log(agg);
}

std::optional<double> foster_score(const DocumentRecord& doc, EntityKind kind,
                                   const EntityVocabulary& vocab,
                                   const CommunityPartition& partition,
                                   std::string* flag) {
  auto pairs = pair_multiset(doc, kind, vocab);
  if (pairs.empty()) {
    set_flag(flag, "too_few_entities");
    return std::nullopt;
  }
  std::int64_t scorable = 0, bridging = 0;
  for (PairKey p : pairs) {
    std::int32_t ca = partition.community.at(p.a);
    std::int32_t cb = partition.community.at(p.b);
    if (ca < 0 || cb < 0) continue;  // endpoint unseen when the partition was fitted
    ++scorable;
    if (ca != cb) ++bridging;
  }
  if (scorable == 0) {
    set_flag(flag, "no_partitioned_pairs");
    return std::nullopt;
  }
  return static_cast<double>(bridging) / static_cast<double>(scorable);
}

std::optional<double> wang_score(const DocumentRecord& doc, EntityKind kind,
                                 const EntityVocabulary& vocab,
                                 std::span<const PairCountTable> history,
                                 std::span<const PairCountTable> future,
                                 const WangParams& params, std::string* flag) {
  if (params.reuse_window < 1 || params.profile_window < 1 || params.min_reuse < 1)
    throw ConfigError("wang_score: windows and min_reuse must be >= 1");
  const int t = doc.year;
  if (static_cast<int>(future.size()) != params.reuse_window)
    throw ConfigError("wang_score: future tables must cover exactly t+1..t+reuse_window");
  for (int k = 0; k < params.reuse_window; ++k) {
    if (future[k].year() != t + 1 + k)
      throw ConfigError("wang_score: future table years must be t+1..t+reuse_window");
    if (!future[k].has_doc_counts())
      throw ConfigError("wang_score: future tables lack document reuse counts");
  }
  for (std::size_t k = 0; k < history.size(); ++k) {
    if (history[k].year() >= t)
      throw ConfigError("wang_score: history tables must predate the focal year");
    if (k > 0 && history[k].year() <= history[k - 1].year())
      throw ConfigError("wang_score: history tables must be ascending by year");
  }

  auto pairs = pair_multiset(doc, kind, vocab);
  if (pairs.empty()) {
    set_flag(flag, "too_few_entities");
    return std::nullopt;
  }
  std::set<PairKey> distinct(pairs.begin(), pairs.end());

  // profile rows come from the profile_window years right before t
  std::vector<PairCountTable> profile;
  for (const auto& tab : history)
    if (tab.year() >= t - params.profile_window && tab.year() <= t - 1)
      profile.push_back(tab);

  double score = 0.0;
  for (PairKey p : distinct) {
    if (pair_first_year(history, p).has_value()) continue;  // not new
    std::int64_t reused_docs = 0;
    for (const auto& tab : future) reused_docs += tab.doc_count(p);
    if (reused_docs < params.min_reuse) continue;
    score += 1.0 - profile_similarity(profile, p.a, p.b);
  }
  return score;
}

std::optional<double> shibayama_score(const DocumentRecord& doc, const VectorStore& store,
                                      const ShibayamaAgg& agg, std::string* flag) {
  std::set<std::string> ref_ids;
  for (const auto& r : doc.ref_doc_ids)
    if (!r.empty()) ref_ids.insert(r);
  std::vector<const std::vector<double>*> vecs;
  for (const auto& r : ref_ids)
    if (const auto* v = store.find(r)) vecs.push_back(v);
  if (vecs.size() < 2) {
    set_flag(flag, "too_few_embedded_refs");
    return std::nullopt;
  }
  std::vector<double> d;
  d.reserve(vecs.size() * (vecs.size() - 1) / 2);
  for (std::size_t i = 0; i < vecs.size(); ++i)
    for (std::size_t j = i + 1; j < vecs.size(); ++j)
      d.push_back(cosine_distance(*vecs[i], *vecs[j]));
  if (agg.use_mean) {
    double sum = 0.0;
    for (double v : d) sum += v;
    return sum / static_cast<double>(d.size());
  }
  return percentile(std::move(d), agg.q);
}

}  // namespace teamscope
