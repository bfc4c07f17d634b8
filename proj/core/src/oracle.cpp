#include "teamscope/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <utility>

#include <Eigen/Dense>

#include "teamscope/errors.hpp"
#include "teamscope/percentile.hpp"
#include "teamscope/rng.hpp"

namespace teamscope::oracle {

namespace {

using SPair = std::pair<std::string, std::string>;

SPair spair(const std::string& x, const std::string& y) {
  return x <= y ? SPair{x, y} : SPair{y, x};
}

std::vector<std::string> entity_names(const DocumentRecord& d, EntityKind kind) {
  std::vector<std::string> out;
  if (kind == EntityKind::journal) {
    for (const auto& s : d.ref_journal_issns)
      if (!s.empty()) out.push_back(s);
  } else {
    for (const auto& m : d.mesh_terms) out.push_back(m);
  }
  return out;
}

// every unordered pair instance, in document order
std::vector<SPair> pair_instances(const DocumentRecord& d, EntityKind kind) {
  auto e = entity_names(d, kind);
  std::vector<SPair> out;
  for (std::size_t i = 0; i < e.size(); ++i)
    for (std::size_t j = i + 1; j < e.size(); ++j) out.push_back(spair(e[i], e[j]));
  return out;
}

// author's embedded past publications in [t-b, t-1], scanned from scratch
std::vector<const std::vector<double>*> embedded_past(const CorpusIndex& index,
                                                      const VectorStore& store,
                                                      const std::string& author, int t,
                                                      int b,
                                                      std::vector<std::string>* ids_out) {
  std::vector<std::pair<int, std::string>> hits;
  for (const auto& [id, d] : index.docs()) {
    if (d.year < t - b || d.year > t - 1) continue;
    if (std::find(d.author_ids.begin(), d.author_ids.end(), author) == d.author_ids.end())
      continue;
    hits.emplace_back(d.year, id);
  }
  std::sort(hits.begin(), hits.end());
  std::vector<const std::vector<double>*> vecs;
  for (const auto& [y, id] : hits) {
    if (const auto* v = store.find(id)) {
      vecs.push_back(v);
      if (ids_out) ids_out->push_back(id);
    }
  }
  return vecs;
}

std::optional<double> intra_of(const CorpusIndex& index, const VectorStore& store,
                               const std::string& author, int t, int b, double q) {
  auto vecs = embedded_past(index, store, author, t, b, nullptr);
  if (vecs.size() < 2) return std::nullopt;
  std::vector<double> d;
  for (std::size_t i = 0; i < vecs.size(); ++i)
    for (std::size_t j = i + 1; j < vecs.size(); ++j)
      d.push_back(cosine_distance(*vecs[i], *vecs[j]));
  return percentile(std::move(d), q);
}

// distinct in-corpus references of a doc
std::set<std::string> resolved_ref_set(const CorpusIndex& index, const DocumentRecord& d) {
  std::set<std::string> out;
  for (const auto& r : d.ref_doc_ids)
    if (!r.empty() && index.find_doc(r)) out.insert(r);
  return out;
}

struct CiterFacts {
  std::set<std::string> citers;
  std::vector<int> overlap;     // aligned with citers order
  std::vector<bool> mutual;
  std::int64_t n_k = 0;
};

CiterFacts citer_facts(const CorpusIndex& index, const std::string& focal,
                       std::optional<int> horizon) {
  const auto& fdoc = index.doc(focal);
  const int max_year = horizon ? fdoc.year + *horizon : std::numeric_limits<int>::max();
  auto focal_refs = resolved_ref_set(index, fdoc);

  CiterFacts out;
  for (const auto& [id, d] : index.docs()) {
    if (id == focal || d.year > max_year) continue;
    if (resolved_ref_set(index, d).count(focal)) out.citers.insert(id);
  }
  for (const auto& c : out.citers) {
    auto crefs = resolved_ref_set(index, index.doc(c));
    int ov = 0;
    bool mu = false;
    for (const auto& r : crefs) {
      if (focal_refs.count(r)) ++ov;
      if (r != c && out.citers.count(r)) mu = true;
    }
    out.overlap.push_back(ov);
    out.mutual.push_back(mu);
  }
  std::set<std::string> k_set;
  for (const auto& [id, d] : index.docs()) {
    if (id == focal || out.citers.count(id)) continue;
    if (d.year < fdoc.year || d.year > max_year) continue;
    auto refs = resolved_ref_set(index, d);
    for (const auto& r : refs)
      if (focal_refs.count(r)) {
        k_set.insert(id);
        break;
      }
  }
  out.n_k = static_cast<std::int64_t>(k_set.size());
  return out;
}

std::optional<double> di_of(const CorpusIndex& index, const std::string& focal, int l,
                            bool with_k, std::optional<int> horizon) {
  auto facts = citer_facts(index, focal, horizon);
  std::int64_t ni = 0, nj = 0;
  for (int ov : facts.overlap) (ov < l ? ni : nj) += 1;
  std::int64_t denom = ni + nj + (with_k ? facts.n_k : 0);
  if (denom == 0) return std::nullopt;
  return static_cast<double>(ni - nj) / static_cast<double>(denom);
}

// pair counts, marginals and instance total for one year, by full scan
struct YearCounts {
  std::map<SPair, std::int64_t> pair_count;
  std::map<SPair, std::int64_t> pair_docs;
  std::map<std::string, std::int64_t> marginal;
  std::int64_t total = 0;
};

YearCounts year_counts(const CorpusIndex& index, EntityKind kind, int year) {
  YearCounts out;
  for (const auto& [id, d] : index.docs()) {
    if (d.year != year) continue;
    auto pairs = pair_instances(d, kind);
    std::set<SPair> present(pairs.begin(), pairs.end());
    for (const auto& p : pairs) {
      out.pair_count[p] += 1;
      out.total += 1;
      out.marginal[p.first] += 1;
      if (p.second != p.first) out.marginal[p.second] += 1;
    }
    for (const auto& p : present) out.pair_docs[p] += 1;
  }
  return out;
}

}  // namespace

std::optional<double> intra(const CorpusIndex& index, const VectorStore& store,
                            const std::string& author_id, const std::string& focal_doc_id,
                            int b, double q) {
  return intra_of(index, store, author_id, index.doc(focal_doc_id).year, b, q);
}

std::optional<double> inter(const CorpusIndex& index, const VectorStore& store,
                            const std::string& focal_doc_id, int b, double q,
                            bool exclude_shared_doc_pairs) {
  const auto& focal = index.doc(focal_doc_id);
  std::vector<std::vector<std::string>> ids(focal.author_ids.size());
  std::vector<std::vector<const std::vector<double>*>> past;
  for (std::size_t a = 0; a < focal.author_ids.size(); ++a)
    past.push_back(embedded_past(index, store, focal.author_ids[a], focal.year, b, &ids[a]));
  std::vector<double> pool;
  for (std::size_t a = 0; a < past.size(); ++a)
    for (std::size_t e = a + 1; e < past.size(); ++e)
      for (std::size_t i = 0; i < past[a].size(); ++i)
        for (std::size_t j = 0; j < past[e].size(); ++j) {
          if (exclude_shared_doc_pairs && ids[a][i] == ids[e][j]) continue;
          pool.push_back(cosine_distance(*past[a][i], *past[e][j]));
        }
  if (pool.empty()) return std::nullopt;
  return percentile(std::move(pool), q);
}

Shares shares(const CorpusIndex& index, const VectorStore& store,
              const std::string& focal_doc_id, int b, double q, double cutoff_hi,
              double cutoff_lo) {
  const auto& focal = index.doc(focal_doc_id);
  Shares out;
  out.n_authors = static_cast<int>(focal.author_ids.size());
  for (const auto& author : focal.author_ids) {
    auto score = intra_of(index, store, author, focal.year, b, q);
    if (!score) continue;
    if (*score >= cutoff_hi) ++out.n_exploratory;
    if (*score <= cutoff_lo) ++out.n_exploitative;
  }
  if (out.n_authors > 0) {
    out.share_exploratory = static_cast<double>(out.n_exploratory) / out.n_authors;
    out.share_exploitative = static_cast<double>(out.n_exploitative) / out.n_authors;
  }
  out.interaction = out.share_exploratory * out.share_exploitative;
  return out;
}

std::optional<double> uzzi(const CorpusIndex& index, const std::string& doc_id,
                           EntityKind kind, std::uint64_t seed, int resamples,
                           int swap_factor, double agg_q, bool agg_mean) {
  const auto& doc = index.doc(doc_id);
  const int year = doc.year;

  // slots: one per entity instance in the focal year, with a shuffle class
  // tying reference slots to the cited year (unresolved refs share a
  // sentinel class, subject terms all share one class)
  std::vector<std::string> slot_ent;
  std::vector<std::int32_t> slot_class;
  std::vector<std::pair<std::size_t, std::size_t>> ranges;
  constexpr std::int32_t kUnknown = std::numeric_limits<std::int32_t>::min();
  for (const auto& [id, d] : index.docs()) {
    if (d.year != year) continue;
    std::size_t start = slot_ent.size();
    if (kind == EntityKind::journal) {
      for (std::size_t i = 0; i < d.ref_journal_issns.size(); ++i) {
        if (d.ref_journal_issns[i].empty()) continue;
        slot_ent.push_back(d.ref_journal_issns[i]);
        const std::string& rid = d.ref_doc_ids[i];
        const DocumentRecord* cited = rid.empty() ? nullptr : index.find_doc(rid);
        slot_class.push_back(cited ? cited->year : kUnknown);
      }
    } else {
      for (const auto& m : d.mesh_terms) {
        slot_ent.push_back(m);
        slot_class.push_back(0);
      }
    }
    if (slot_ent.size() > start) ranges.emplace_back(start, slot_ent.size());
  }
  const std::size_t S = slot_ent.size();

  struct Acc {
    double sum = 0.0;
    double sumsq = 0.0;
  };
  std::map<SPair, Acc> acc;
  if (S >= 2) {
    std::vector<std::string> ent;
    for (int r = 0; r < resamples; ++r) {
      Rng rng(seed + static_cast<std::uint64_t>(r));
      ent = slot_ent;
      std::uint64_t attempts =
          static_cast<std::uint64_t>(swap_factor) * static_cast<std::uint64_t>(S);
      for (std::uint64_t a = 0; a < attempts; ++a) {
        std::size_t s1 = static_cast<std::size_t>(rng.next_below(S));
        std::size_t s2 = static_cast<std::size_t>(rng.next_below(S));
        if (slot_class[s1] == slot_class[s2]) std::swap(ent[s1], ent[s2]);
      }
      std::map<SPair, std::int64_t> counts;
      for (auto [begin, end] : ranges)
        for (std::size_t i = begin; i < end; ++i)
          for (std::size_t j = i + 1; j < end; ++j) counts[spair(ent[i], ent[j])] += 1;
      for (const auto& [key, c] : counts) {
        auto& cell = acc[key];
        double v = static_cast<double>(c);
        cell.sum += v;
        cell.sumsq += v * v;
      }
    }
  }

  std::map<SPair, std::int64_t> observed;
  for (auto [begin, end] : ranges)
    for (std::size_t i = begin; i < end; ++i)
      for (std::size_t j = i + 1; j < end; ++j)
        observed[spair(slot_ent[i], slot_ent[j])] += 1;
  for (const auto& [key, c] : observed) acc.try_emplace(key);

  const double m = static_cast<double>(resamples);
  auto pairs = pair_instances(doc, kind);
  std::vector<double> z;
  for (const auto& p : pairs) {
    auto it = acc.find(p);
    if (it == acc.end()) continue;
    double mu = it->second.sum / m;
    double var = (it->second.sumsq - it->second.sum * it->second.sum / m) / (m - 1.0);
    double sigma = var > 0.0 ? std::sqrt(var) : 0.0;
    if (sigma <= 0.0) continue;
    double n = static_cast<double>(observed[p]);
    z.push_back((n - mu) / sigma);
  }
  if (z.empty()) return std::nullopt;
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

std::optional<double> lee(const CorpusIndex& index, const std::string& doc_id,
                          EntityKind kind, double agg_q) {
  const auto& doc = index.doc(doc_id);
  auto counts = year_counts(index, kind, doc.year);
  auto pairs = pair_instances(doc, kind);
  if (pairs.empty()) return std::nullopt;
  std::vector<double> c;
  for (const auto& p : pairs) {
    std::int64_t nij = counts.pair_count[p];
    if (nij == 0) {
      c.push_back(0.0);
      continue;
    }
    std::int64_t ni = counts.marginal[p.first];
    std::int64_t nj = counts.marginal[p.second];
    c.push_back((static_cast<double>(nij) * static_cast<double>(counts.total)) /
                (static_cast<double>(ni) * static_cast<double>(nj)));
  }
  double agg = percentile(std::move(c), agg_q);
  if (agg <= 0.0) return std::nullopt;
  return -std::log(agg);
}

std::optional<double> foster(const CorpusIndex& index, const std::string& doc_id,
                             EntityKind kind, const EntityVocabulary& vocab,
                             const CommunityPartition& partition) {
  const auto& doc = index.doc(doc_id);
  auto pairs = pair_instances(doc, kind);
  if (pairs.empty()) return std::nullopt;
  std::int64_t scorable = 0, bridging = 0;
  for (const auto& p : pairs) {
    std::int32_t ca = partition.community.at(vocab.id(p.first));
    std::int32_t cb = partition.community.at(vocab.id(p.second));
    if (ca < 0 || cb < 0) continue;
    ++scorable;
    if (ca != cb) ++bridging;
  }
  if (scorable == 0) return std::nullopt;
  return static_cast<double>(bridging) / static_cast<double>(scorable);
}

std::optional<double> wang(const CorpusIndex& index, const std::string& doc_id,
                           EntityKind kind, int reuse_window, int min_reuse,
                           int profile_window) {
  const auto& doc = index.doc(doc_id);
  const int t = doc.year;
  auto pairs = pair_instances(doc, kind);
  if (pairs.empty()) return std::nullopt;
  std::set<SPair> distinct(pairs.begin(), pairs.end());

  // row profile over [t - profile_window, t - 1], column sums per entity
  auto row_of = [&](const std::string& e) {
    std::map<std::string, std::int64_t> row;
    for (const auto& [id, d] : index.docs()) {
      if (d.year < t - profile_window || d.year > t - 1) continue;
      for (const auto& p : pair_instances(d, kind)) {
        if (p.first == e) row[p.second] += 1;
        if (p.second == e && p.first != p.second) row[p.first] += 1;
      }
    }
    return row;
  };

  double score = 0.0;
  for (const auto& p : distinct) {
    // brand new: the pair never co-occurred in any earlier year
    bool seen_before = false;
    for (const auto& [id, d] : index.docs()) {
      if (d.year >= t) continue;
      auto dp = pair_instances(d, kind);
      if (std::find(dp.begin(), dp.end(), p) != dp.end()) {
        seen_before = true;
        break;
      }
    }
    if (seen_before) continue;

    // reused by enough distinct later docs inside the window
    std::int64_t reused_docs = 0;
    for (const auto& [id, d] : index.docs()) {
      if (d.year < t + 1 || d.year > t + reuse_window) continue;
      auto dp = pair_instances(d, kind);
      if (std::find(dp.begin(), dp.end(), p) != dp.end()) ++reused_docs;
    }
    if (reused_docs < min_reuse) continue;

    auto ri = row_of(p.first);
    auto rj = row_of(p.second);
    double sim = 0.0;
    if (!ri.empty() && !rj.empty()) {
      double dot = 0.0, ni = 0.0, nj = 0.0;
      for (const auto& [k, v] : ri) ni += static_cast<double>(v) * static_cast<double>(v);
      for (const auto& [k, v] : rj) nj += static_cast<double>(v) * static_cast<double>(v);
      for (const auto& [k, v] : ri) {
        auto it = rj.find(k);
        if (it != rj.end()) dot += static_cast<double>(v) * static_cast<double>(it->second);
      }
      sim = dot / (std::sqrt(ni) * std::sqrt(nj));
    }
    score += 1.0 - sim;
  }
  return score;
}

std::optional<double> shibayama(const CorpusIndex& index, const std::string& doc_id,
                                const VectorStore& store, bool use_mean, double q) {
  const auto& doc = index.doc(doc_id);
  std::set<std::string> refs;
  for (const auto& r : doc.ref_doc_ids)
    if (!r.empty()) refs.insert(r);
  std::vector<const std::vector<double>*> vecs;
  for (const auto& r : refs)
    if (const auto* v = store.find(r)) vecs.push_back(v);
  if (vecs.size() < 2) return std::nullopt;
  std::vector<double> d;
  for (std::size_t i = 0; i < vecs.size(); ++i)
    for (std::size_t j = i + 1; j < vecs.size(); ++j)
      d.push_back(cosine_distance(*vecs[i], *vecs[j]));
  if (use_mean) {
    double sum = 0.0;
    for (double v : d) sum += v;
    return sum / static_cast<double>(d.size());
  }
  return percentile(std::move(d), q);
}

std::optional<double> di1(const CorpusIndex& index, const std::string& focal,
                          std::optional<int> horizon) {
  return di_of(index, focal, 1, true, horizon);
}

std::optional<double> di5(const CorpusIndex& index, const std::string& focal,
                          std::optional<int> horizon) {
  return di_of(index, focal, 5, true, horizon);
}

std::optional<double> di1nok(const CorpusIndex& index, const std::string& focal,
                             std::optional<int> horizon) {
  return di_of(index, focal, 1, false, horizon);
}

std::optional<double> dein(const CorpusIndex& index, const std::string& focal,
                           std::optional<int> horizon) {
  auto facts = citer_facts(index, focal, horizon);
  if (facts.citers.empty()) return std::nullopt;
  std::int64_t sum = 0;
  for (int ov : facts.overlap) sum += ov;
  return static_cast<double>(sum) / static_cast<double>(facts.citers.size());
}

std::optional<double> breadth(const CorpusIndex& index, const std::string& focal,
                              std::optional<int> horizon) {
  auto d = depth(index, focal, horizon);
  if (!d) return std::nullopt;
  return 1.0 - *d;
}

std::optional<double> depth(const CorpusIndex& index, const std::string& focal,
                            std::optional<int> horizon) {
  auto facts = citer_facts(index, focal, horizon);
  if (facts.citers.empty()) return std::nullopt;
  std::int64_t mutual = 0;
  for (bool m : facts.mutual)
    if (m) ++mutual;
  return static_cast<double>(mutual) / static_cast<double>(facts.citers.size());
}

std::vector<double> percentile_rank(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<double> out(n, 0.5);
  if (n <= 1) return out;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t less = 0, equal = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (values[j] < values[i]) ++less;
      if (values[j] == values[i]) ++equal;
    }
    double avg_rank = static_cast<double>(less) + static_cast<double>(equal - 1) / 2.0;
    out[i] = avg_rank / static_cast<double>(n - 1);
  }
  return out;
}

std::vector<double> linear_coefficients(const std::vector<std::vector<double>>& rows,
                                        const std::vector<double>& y) {
  if (rows.empty() || rows.size() != y.size())
    throw ComputeError("oracle linear fit: shape mismatch");
  const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index k = static_cast<Eigen::Index>(rows.front().size());
  Eigen::MatrixXd x(n, k);
  Eigen::VectorXd yv(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    yv(i) = y[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < k; ++j)
      x(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  Eigen::MatrixXd xtx = x.transpose() * x;
  Eigen::VectorXd beta = xtx.inverse() * (x.transpose() * yv);
  return std::vector<double>(beta.data(), beta.data() + beta.size());
}

std::vector<double> clustered_se(const std::vector<std::vector<double>>& rows,
                                 const std::vector<double>& y,
                                 const std::vector<std::string>& cluster) {
  if (rows.size() != cluster.size())
    throw ComputeError("oracle clustered se: shape mismatch");
  auto beta = linear_coefficients(rows, y);
  const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index k = static_cast<Eigen::Index>(rows.front().size());
  Eigen::MatrixXd x(n, k);
  Eigen::VectorXd yv(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    yv(i) = y[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < k; ++j)
      x(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  Eigen::VectorXd bv = Eigen::Map<const Eigen::VectorXd>(beta.data(), k);
  Eigen::VectorXd resid = yv - x * bv;

  std::map<std::string, std::vector<Eigen::Index>> groups;
  for (Eigen::Index i = 0; i < n; ++i)
    groups[cluster[static_cast<std::size_t>(i)]].push_back(i);
  const double g = static_cast<double>(groups.size());
  if (groups.size() < 2) throw ComputeError("oracle clustered se: need >= 2 clusters");

  Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(k, k);
  for (const auto& [name, members] : groups) {
    Eigen::VectorXd s = Eigen::VectorXd::Zero(k);
    for (Eigen::Index i : members) s += x.row(i).transpose() * resid(i);
    meat += s * s.transpose();
  }
  const double nn = static_cast<double>(n);
  const double kk = static_cast<double>(k);
  double factor = (g / (g - 1.0)) * ((nn - 1.0) / (nn - kk));
  Eigen::MatrixXd bread = (x.transpose() * x).inverse();
  Eigen::MatrixXd vcov = factor * bread * meat * bread;
  std::vector<double> se(static_cast<std::size_t>(k));
  for (Eigen::Index j = 0; j < k; ++j) se[static_cast<std::size_t>(j)] = std::sqrt(vcov(j, j));
  return se;
}

}  // namespace teamscope::oracle
