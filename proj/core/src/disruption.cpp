#include "teamscope/disruption.hpp"

#include <algorithm>
#include <limits>
#include <set>

namespace teamscope {

std::int64_t DisruptionCounts::n_i(int l) const {
  std::int64_t n = 0;
  for (const auto& [c, overlap] : citer_ref_overlap)
    if (overlap < l) ++n;
  return n;
}

std::int64_t DisruptionCounts::n_j(int l) const {
  std::int64_t n = 0;
  for (const auto& [c, overlap] : citer_ref_overlap)
    if (overlap >= l) ++n;
  return n;
}

DisruptionCounts disruption_counts(const CorpusIndex& index, const std::string& focal,
                                   std::optional<int> horizon) {
  const auto& fdoc = index.doc(focal);
  const int max_year =
      horizon ? fdoc.year + *horizon : std::numeric_limits<int>::max();

  DisruptionCounts out;
  out.focal = focal;
  out.focal_refs = index.resolved_refs(focal);
  std::set<std::string> ref_set(out.focal_refs.begin(), out.focal_refs.end());

  std::set<std::string> citer_set;
  for (const auto& c : index.citing_papers(focal))
    if (index.doc(c).year <= max_year) citer_set.insert(c);
  out.citers.assign(citer_set.begin(), citer_set.end());

  for (const auto& c : out.citers) {
    auto crefs = index.resolved_refs(c);
    int overlap = 0;
    bool mutual = false;
    for (const auto& r : crefs) {
      if (ref_set.count(r)) ++overlap;
      if (r != c && citer_set.count(r)) mutual = true;
    }
    out.citer_ref_overlap.emplace(c, overlap);
    out.citer_mutual.emplace(c, mutual);
  }

  // papers pulled forward by focal's references without citing focal
  std::set<std::string> k_set;
  for (const auto& r : out.focal_refs) {
    for (const auto& p : index.citing_papers(r)) {
      if (p == focal || citer_set.count(p)) continue;
      int y = index.doc(p).year;
      if (y >= fdoc.year && y <= max_year) k_set.insert(p);
    }
  }
  out.n_k = static_cast<std::int64_t>(k_set.size());
  return out;
}

std::optional<double> di(const DisruptionCounts& counts, int l, bool with_k) {
  std::int64_t ni = counts.n_i(l);
  std::int64_t nj = counts.n_j(l);
  std::int64_t denom = ni + nj + (with_k ? counts.n_k : 0);
  if (denom == 0) return std::nullopt;
  return static_cast<double>(ni - nj) / static_cast<double>(denom);
}

std::optional<double> dein(const DisruptionCounts& counts) {
  if (counts.citers.empty()) return std::nullopt;
  std::int64_t sum = 0;
  for (const auto& [c, overlap] : counts.citer_ref_overlap) sum += overlap;
  return static_cast<double>(sum) / static_cast<double>(counts.citers.size());
}

std::optional<BreadthDepth> breadth_depth(const DisruptionCounts& counts) {
  if (counts.citers.empty()) return std::nullopt;
  std::int64_t mutual = 0;
  for (const auto& [c, m] : counts.citer_mutual)
    if (m) ++mutual;
  BreadthDepth bd;
  bd.depth = static_cast<double>(mutual) / static_cast<double>(counts.citers.size());
  bd.breadth = 1.0 - bd.depth;
  return bd;
}

ImpactScores impact_scores(const CorpusIndex& index, const std::string& focal,
                           std::optional<int> horizon) {
  DisruptionCounts counts = disruption_counts(index, focal, horizon);
  ImpactScores s;
  s.doc_id = focal;
  s.citation_count = static_cast<std::int64_t>(counts.citers.size());
  s.di1 = di(counts, 1, true);
  s.di5 = di(counts, 5, true);
  s.di1nok = di(counts, 1, false);
  s.dein = dein(counts);
  if (auto bd = breadth_depth(counts)) {
    s.breadth = bd->breadth;
    s.depth = bd->depth;
  }
  return s;
}

}  // namespace teamscope
