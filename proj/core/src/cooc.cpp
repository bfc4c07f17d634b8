#include "teamscope/cooc.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <set>

#include "teamscope/errors.hpp"
#include "teamscope/io.hpp"
#include "teamscope/parallel.hpp"
#include "teamscope/rng.hpp"

namespace teamscope {

const char* entity_kind_name(EntityKind kind) {
  return kind == EntityKind::journal ? "journal" : "mesh";
}

EntityKind parse_entity_kind(const std::string& name) {
  if (name == "journal") return EntityKind::journal;
  if (name == "mesh") return EntityKind::mesh;
  throw ConfigError("unknown entity kind: " + name);
}

EntityVocabulary EntityVocabulary::build(const CorpusIndex& index, EntityKind kind) {
  std::set<std::string> seen;
  for (const auto& [id, d] : index.docs()) {
    if (kind == EntityKind::journal) {
      for (const auto& issn : d.ref_journal_issns)
        if (!issn.empty()) seen.insert(issn);
    } else {
      for (const auto& m : d.mesh_terms) seen.insert(m);
    }
  }
  EntityVocabulary v;
  v.kind_ = kind;
  v.names_.assign(seen.begin(), seen.end());
  for (std::uint32_t i = 0; i < v.names_.size(); ++i) v.ids_.emplace(v.names_[i], i);
  return v;
}

std::optional<std::uint32_t> EntityVocabulary::find(const std::string& name) const {
  auto it = ids_.find(name);
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

std::uint32_t EntityVocabulary::id(const std::string& name) const {
  auto it = ids_.find(name);
  if (it == ids_.end()) throw NotFoundError("entity not in vocabulary: " + name);
  return it->second;
}

void EntityVocabulary::save(const std::filesystem::path& path) const {
  std::string out;
  for (const auto& n : names_) {
    out += n;
    out += '\n';
  }
  atomic_write_file(path, out);
}

EntityVocabulary EntityVocabulary::load(const std::filesystem::path& path,
                                        EntityKind kind) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  EntityVocabulary v;
  v.kind_ = kind;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    v.names_.push_back(line);
  }
  for (std::uint32_t i = 0; i < v.names_.size(); ++i) {
    if (!v.ids_.emplace(v.names_[i], i).second)
      throw ParseError(path.string() + ": duplicate vocabulary entry " + v.names_[i]);
  }
  return v;
}

std::vector<std::uint32_t> doc_entities(const DocumentRecord& doc, EntityKind kind,
                                        const EntityVocabulary& vocab) {
  std::vector<std::uint32_t> out;
  if (kind == EntityKind::journal) {
    for (const auto& issn : doc.ref_journal_issns)
      if (!issn.empty()) out.push_back(vocab.id(issn));
  } else {
    for (const auto& m : doc.mesh_terms) out.push_back(vocab.id(m));
  }
  return out;
}

std::vector<PairKey> pair_multiset(const DocumentRecord& doc, EntityKind kind,
                                   const EntityVocabulary& vocab) {
  auto ents = doc_entities(doc, kind, vocab);
  std::vector<PairKey> out;
  if (ents.size() < 2) return out;
  out.reserve(ents.size() * (ents.size() - 1) / 2);
  for (std::size_t i = 0; i < ents.size(); ++i)
    for (std::size_t j = i + 1; j < ents.size(); ++j)
      out.push_back(make_pair_key(ents[i], ents[j]));
  return out;
}

std::int64_t PairCountTable::count(PairKey key) const {
  auto it = cells_.find(key);
  return it == cells_.end() ? 0 : it->second.count;
}

std::int64_t PairCountTable::doc_count(PairKey key) const {
  auto it = cells_.find(key);
  return it == cells_.end() ? 0 : it->second.doc_count;
}

void PairCountTable::add_pair(PairKey key, std::int64_t n) {
  cells_[key].count += n;
  total_ += n;
  marginals_.at(key.a) += n;
  if (key.b != key.a) marginals_.at(key.b) += n;
}

void PairCountTable::add_doc_presence(PairKey key) { cells_[key].doc_count += 1; }

void PairCountTable::merge(const PairCountTable& other) {
  for (const auto& [key, cell] : other.cells_) {
    add_pair(key, cell.count);
    cells_[key].doc_count += cell.doc_count;
  }
}

PairCountTable build_counts(const CorpusIndex& index, const EntityVocabulary& vocab,
                            EntityKind kind, int year, int jobs) {
  std::vector<const DocumentRecord*> docs;
  for (const auto& [id, d] : index.docs())
    if (d.year == year) docs.push_back(&d);

  auto map_shard = [&](std::size_t begin, std::size_t end) {
    PairCountTable t(year, vocab.size());
    for (std::size_t k = begin; k < end; ++k) {
      auto pairs = pair_multiset(*docs[k], kind, vocab);
      std::set<PairKey> present;
      for (PairKey key : pairs) {
        t.add_pair(key);
        present.insert(key);
      }
      for (PairKey key : present) t.add_doc_presence(key);
    }
    return t;
  };
  if (docs.empty()) return PairCountTable(year, vocab.size());
  return sharded_reduce<PairCountTable>(docs.size(), jobs, map_shard,
                                        [](PairCountTable& a, PairCountTable&& b) {
                                          a.merge(b);
                                        });
}

double commonness(const PairCountTable& table, PairKey key) {
  std::int64_t nij = table.count(key);
  if (nij == 0) return 0.0;
  std::int64_t ni = table.marginal(key.a);
  std::int64_t nj = table.marginal(key.b);
  if (ni == 0 || nj == 0)
    throw ComputeError("pair count table inconsistent: zero marginal with nonzero cell");
  return (static_cast<double>(nij) * static_cast<double>(table.total())) /
         (static_cast<double>(ni) * static_cast<double>(nj));
}

const MeanSd* NullModelStats::find(PairKey key) const {
  auto it = stats.find(key);
  return it == stats.end() ? nullptr : &it->second;
}

namespace {

constexpr std::int32_t kUnknownYearClass = std::numeric_limits<std::int32_t>::min();

struct SlotData {
  std::vector<std::uint32_t> entity;
  std::vector<std::int32_t> year_class;
  std::vector<std::pair<std::size_t, std::size_t>> doc_ranges;
};

SlotData build_slots(const CorpusIndex& index, const EntityVocabulary& vocab,
                     EntityKind kind, int year) {
  SlotData s;
  for (const auto& [id, d] : index.docs()) {
    if (d.year != year) continue;
    std::size_t start = s.entity.size();
    if (kind == EntityKind::journal) {
      for (std::size_t i = 0; i < d.ref_journal_issns.size(); ++i) {
        if (d.ref_journal_issns[i].empty()) continue;
        s.entity.push_back(vocab.id(d.ref_journal_issns[i]));
        const std::string& rid = d.ref_doc_ids[i];
        const DocumentRecord* cited = rid.empty() ? nullptr : index.find_doc(rid);
        s.year_class.push_back(cited ? cited->year : kUnknownYearClass);
      }
    } else {
      for (const auto& m : d.mesh_terms) {
        s.entity.push_back(vocab.id(m));
        s.year_class.push_back(0);
      }
    }
    if (s.entity.size() > start) s.doc_ranges.emplace_back(start, s.entity.size());
  }
  return s;
}

struct PairAcc {
  double sum = 0.0;
  double sumsq = 0.0;
};

using AccMap = std::map<PairKey, PairAcc>;

void count_resample_pairs(const SlotData& slots, const std::vector<std::uint32_t>& ent,
                          std::map<PairKey, std::int64_t>& out) {
  for (auto [begin, end] : slots.doc_ranges)
    for (std::size_t i = begin; i < end; ++i)
      for (std::size_t j = i + 1; j < end; ++j)
        out[make_pair_key(ent[i], ent[j])] += 1;
}

}  // namespace

NullModelStats null_resample(const CorpusIndex& index, const EntityVocabulary& vocab,
                             EntityKind kind, int year, const NullModelParams& params,
                             std::uint64_t seed, int jobs) {
  if (params.resamples < 2)
    throw ConfigError("null_resample: need at least 2 resamples, sigma is undefined");
  if (params.swap_factor < 0) throw ConfigError("null_resample: negative swap factor");

  SlotData slots = build_slots(index, vocab, kind, year);
  const std::size_t S = slots.entity.size();
  std::uint64_t base_id_sum = 0;
  for (auto e : slots.entity) base_id_sum += e;

  const int M = params.resamples;
  auto map_shard = [&](std::size_t begin, std::size_t end) {
    AccMap acc;
    std::vector<std::uint32_t> ent;
    std::map<PairKey, std::int64_t> counts;
    for (std::size_t r = begin; r < end; ++r) {
      Rng rng(seed + r);
      ent = slots.entity;
      std::uint64_t attempts =
          static_cast<std::uint64_t>(params.swap_factor) * static_cast<std::uint64_t>(S);
      for (std::uint64_t a = 0; a < attempts; ++a) {
        std::size_t s1 = static_cast<std::size_t>(rng.next_below(S));
        std::size_t s2 = static_cast<std::size_t>(rng.next_below(S));
        if (slots.year_class[s1] == slots.year_class[s2]) std::swap(ent[s1], ent[s2]);
      }
      // swaps relocate entities but never slots, so per-doc reference counts
      // and cited-year profiles are untouched; verify the entity multiset
      std::uint64_t id_sum = 0;
      for (auto e : ent) id_sum += e;
      if (id_sum != base_id_sum)
        throw ComputeError("null_resample: entity multiset not conserved");
      counts.clear();
      count_resample_pairs(slots, ent, counts);
      for (const auto& [key, c] : counts) {
        auto& cell = acc[key];
        double v = static_cast<double>(c);
        cell.sum += v;
        cell.sumsq += v * v;
      }
    }
    return acc;
  };

  AccMap acc;
  if (S >= 2) {
    acc = sharded_reduce<AccMap>(static_cast<std::size_t>(M), jobs, map_shard,
                                 [](AccMap& a, AccMap&& b) {
                                   for (auto& [key, cell] : b) {
                                     a[key].sum += cell.sum;
                                     a[key].sumsq += cell.sumsq;
                                   }
                                 });
  }

  // observed pairs belong in the stats even if no resample produced them
  std::map<PairKey, std::int64_t> observed;
  count_resample_pairs(slots, slots.entity, observed);
  for (const auto& [key, c] : observed) acc.try_emplace(key);

  NullModelStats out;
  out.year = year;
  out.resamples = M;
  out.seed = seed;
  double m = static_cast<double>(M);
  for (const auto& [key, cell] : acc) {
    MeanSd ms;
    ms.mu = cell.sum / m;
    double var = (cell.sumsq - cell.sum * cell.sum / m) / (m - 1.0);
    ms.sigma = var > 0.0 ? std::sqrt(var) : 0.0;
    out.stats.emplace(key, ms);
  }
  return out;
}

namespace {

struct Graph {
  std::size_t n = 0;
  std::vector<std::vector<std::pair<std::uint32_t, double>>> adj;  // no self edges
  std::vector<double> self_loop;
  std::vector<double> degree;  // sum_j w_ij + 2 w_ii
  double m2 = 0.0;             // sum of degrees

  static Graph from_weights(const std::map<PairKey, double>& weights, std::size_t n) {
    Graph g;
    g.n = n;
    g.adj.resize(n);
    g.self_loop.assign(n, 0.0);
    g.degree.assign(n, 0.0);
    for (const auto& [key, w] : weights) {
      if (w <= 0.0) continue;
      if (key.a == key.b) {
        g.self_loop[key.a] += w;
      } else {
        g.adj[key.a].emplace_back(key.b, w);
        g.adj[key.b].emplace_back(key.a, w);
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      double k = 2.0 * g.self_loop[i];
      for (auto& [j, w] : g.adj[i]) k += w;
      g.degree[i] = k;
      g.m2 += k;
    }
    return g;
  }
};

// one level of greedy moves; returns final communities (dense ids) or nullopt
// when nothing moved
bool local_move(const Graph& g, double resolution, Rng& rng,
                std::vector<std::int32_t>& comm) {
  std::vector<double> comm_tot(g.n, 0.0);
  for (std::size_t i = 0; i < g.n; ++i) comm_tot[static_cast<std::size_t>(comm[i])] += g.degree[i];

  std::vector<std::uint32_t> order(g.n);
  for (std::size_t i = 0; i < g.n; ++i) order[i] = static_cast<std::uint32_t>(i);

  bool any_move = false;
  bool moved = true;
  while (moved) {
    moved = false;
    rng.shuffle(order);
    for (std::uint32_t u : order) {
      if (g.degree[u] == 0.0) continue;
      std::int32_t c_old = comm[u];
      comm_tot[static_cast<std::size_t>(c_old)] -= g.degree[u];

      std::map<std::int32_t, double> link;  // community -> weight to u
      link[c_old];                          // staying is always a candidate
      for (const auto& [v, w] : g.adj[u]) link[comm[v]] += w;

      std::int32_t best = c_old;
      double best_gain = link[c_old] -
                         resolution * g.degree[u] * comm_tot[static_cast<std::size_t>(c_old)] / g.m2;
      for (const auto& [c, w] : link) {
        double gain = w - resolution * g.degree[u] * comm_tot[static_cast<std::size_t>(c)] / g.m2;
        if (gain > best_gain + 1e-12) {
          best_gain = gain;
          best = c;
        }
      }
      comm[u] = best;
      comm_tot[static_cast<std::size_t>(best)] += g.degree[u];
      if (best != c_old) {
        moved = true;
        any_move = true;
      }
    }
  }
  return any_move;
}

// collapse communities to supernodes, renumbering by ascending community id
Graph aggregate(const Graph& g, const std::vector<std::int32_t>& comm,
                std::vector<std::int32_t>& relabel) {
  std::set<std::int32_t> used(comm.begin(), comm.end());
  std::map<std::int32_t, std::int32_t> dense;
  std::int32_t next = 0;
  for (auto c : used) dense[c] = next++;
  relabel.resize(comm.size());
  for (std::size_t i = 0; i < comm.size(); ++i) relabel[i] = dense[comm[i]];

  std::map<PairKey, double> weights;
  for (std::size_t u = 0; u < g.n; ++u) {
    std::uint32_t cu = static_cast<std::uint32_t>(relabel[u]);
    if (g.self_loop[u] > 0.0) weights[PairKey{cu, cu}] += g.self_loop[u];
    for (const auto& [v, w] : g.adj[u]) {
      if (v < u) continue;  // each undirected edge once
      std::uint32_t cv = static_cast<std::uint32_t>(relabel[v]);
      weights[make_pair_key(cu, cv)] += w;
    }
  }
  return Graph::from_weights(weights, static_cast<std::size_t>(next));
}

double modularity_of(const Graph& g, const std::vector<std::int32_t>& comm,
                     double resolution) {
  std::map<std::int32_t, double> tot, in;
  for (std::size_t u = 0; u < g.n; ++u) {
    if (g.degree[u] == 0.0) continue;
    tot[comm[u]] += g.degree[u];
    in[comm[u]] += 2.0 * g.self_loop[u];
  }
  for (std::size_t u = 0; u < g.n; ++u)
    for (const auto& [v, w] : g.adj[u])
      if (v > u && comm[v] == comm[u]) in[comm[u]] += 2.0 * w;
  double q = 0.0;
  for (const auto& [c, t] : tot)
    q += in[c] / g.m2 - resolution * (t / g.m2) * (t / g.m2);
  return q;
}

}  // namespace

CommunityPartition louvain_partition(const std::map<PairKey, double>& weights,
                                     std::size_t n_nodes, double resolution,
                                     std::uint64_t seed) {
  Graph base = Graph::from_weights(weights, n_nodes);
  if (base.m2 <= 0.0) throw ComputeError("community detection: graph has no edges");

  Rng rng(seed);
  // node -> community on the current (possibly aggregated) graph
  std::vector<std::int32_t> node_comm(n_nodes);
  for (std::size_t i = 0; i < n_nodes; ++i) node_comm[i] = static_cast<std::int32_t>(i);

  Graph g = base;
  std::vector<std::int32_t> comm = node_comm;  // over g's nodes
  while (true) {
    bool improved = local_move(g, resolution, rng, comm);
    std::vector<std::int32_t> relabel;
    Graph next = aggregate(g, comm, relabel);
    // carry the original nodes over to the aggregated graph
    for (auto& c : node_comm) c = relabel[static_cast<std::size_t>(c)];
    if (!improved || next.n == g.n) break;
    g = std::move(next);
    comm.resize(g.n);
    for (std::size_t i = 0; i < g.n; ++i) comm[i] = static_cast<std::int32_t>(i);
  }

  CommunityPartition out;
  out.seed = seed;
  out.community.assign(n_nodes, -1);
  // dense ids in order of first appearance; edgeless nodes stay unassigned
  std::map<std::int32_t, std::int32_t> dense;
  for (std::size_t i = 0; i < n_nodes; ++i) {
    if (base.degree[i] == 0.0) continue;
    auto it = dense.emplace(node_comm[i], static_cast<std::int32_t>(dense.size())).first;
    out.community[i] = it->second;
  }
  out.n_communities = static_cast<int>(dense.size());
  std::vector<std::int32_t> final_comm(n_nodes);
  for (std::size_t i = 0; i < n_nodes; ++i) final_comm[i] = node_comm[i];
  out.modularity = modularity_of(base, final_comm, resolution);
  return out;
}

CommunityPartition community_partition(const CorpusIndex& index,
                                       const EntityVocabulary& vocab, EntityKind kind,
                                       YearWindow window, double resolution,
                                       std::uint64_t seed) {
  if (window.first > window.last)
    throw ConfigError("community_partition: empty year window");
  std::map<PairKey, double> weights;
  for (int y = window.first; y <= window.last; ++y) {
    PairCountTable t = build_counts(index, vocab, kind, y);
    for (const auto& [key, cell] : t.cells())
      weights[key] += static_cast<double>(cell.count);
  }
  CommunityPartition out = louvain_partition(weights, vocab.size(), resolution, seed);
  out.window = window;
  return out;
}

std::optional<int> pair_first_year(std::span<const PairCountTable> history, PairKey key) {
  for (const auto& t : history)
    if (t.count(key) >= 1) return t.year();
  return std::nullopt;
}

double profile_similarity(std::span<const PairCountTable> window, std::uint32_t i,
                          std::uint32_t j) {
  std::map<std::uint32_t, std::int64_t> ri, rj;
  for (const auto& t : window) {
    for (const auto& [key, cell] : t.cells()) {
      if (key.a == i) ri[key.b] += cell.count;
      if (key.b == i && key.a != key.b) ri[key.a] += cell.count;
      if (key.a == j) rj[key.b] += cell.count;
      if (key.b == j && key.a != key.b) rj[key.a] += cell.count;
    }
  }
  if (ri.empty() || rj.empty()) return 0.0;
  double dot = 0.0, ni = 0.0, nj = 0.0;
  for (const auto& [k, v] : ri) ni += static_cast<double>(v) * static_cast<double>(v);
  for (const auto& [k, v] : rj) nj += static_cast<double>(v) * static_cast<double>(v);
  for (const auto& [k, v] : ri) {
    auto it = rj.find(k);
    if (it != rj.end()) dot += static_cast<double>(v) * static_cast<double>(it->second);
  }
  return dot / (std::sqrt(ni) * std::sqrt(nj));
}

namespace {

template <typename T>
void append_raw(std::string& buf, T v) {
  char tmp[sizeof(T)];
  std::memcpy(tmp, &v, sizeof(T));
  buf.append(tmp, sizeof(T));
}

template <typename T>
T read_raw(const std::string& buf, std::size_t& off) {
  T v;
  std::memcpy(&v, buf.data() + off, sizeof(T));
  off += sizeof(T);
  return v;
}

std::filesystem::path doc_sidecar(const std::filesystem::path& path) {
  std::filesystem::path p = path;
  p.replace_extension(".docs.bin");
  return p;
}

}  // namespace

void write_table(const PairCountTable& table, const std::filesystem::path& path) {
  std::string counts, docs;
  for (const auto& [key, cell] : table.cells()) {
    append_raw<std::uint32_t>(counts, key.a);
    append_raw<std::uint32_t>(counts, key.b);
    append_raw<std::uint64_t>(counts, static_cast<std::uint64_t>(cell.count));
    append_raw<std::uint32_t>(docs, key.a);
    append_raw<std::uint32_t>(docs, key.b);
    append_raw<std::uint64_t>(docs, static_cast<std::uint64_t>(cell.doc_count));
  }
  atomic_write_file(path, counts);
  atomic_write_file(doc_sidecar(path), docs);
}

PairCountTable read_table(const std::filesystem::path& path, int year,
                          std::size_t vocab_size) {
  std::string buf = read_text_file(path);
  constexpr std::size_t rec = 2 * sizeof(std::uint32_t) + sizeof(std::uint64_t);
  if (buf.size() % rec != 0)
    throw ParseError(path.string() + ": truncated pair table");
  PairCountTable t(year, vocab_size);
  std::size_t off = 0;
  while (off < buf.size()) {
    auto a = read_raw<std::uint32_t>(buf, off);
    auto b = read_raw<std::uint32_t>(buf, off);
    auto c = read_raw<std::uint64_t>(buf, off);
    if (a > b || b >= vocab_size)
      throw ParseError(path.string() + ": pair out of vocabulary range");
    t.add_pair(PairKey{a, b}, static_cast<std::int64_t>(c));
  }
  auto sidecar = doc_sidecar(path);
  if (std::filesystem::exists(sidecar)) {
    std::string dbuf = read_text_file(sidecar);
    if (dbuf.size() % rec != 0)
      throw ParseError(sidecar.string() + ": truncated doc-count table");
    std::size_t doff = 0;
    while (doff < dbuf.size()) {
      auto a = read_raw<std::uint32_t>(dbuf, doff);
      auto b = read_raw<std::uint32_t>(dbuf, doff);
      auto c = read_raw<std::uint64_t>(dbuf, doff);
      for (std::uint64_t k = 0; k < c; ++k) t.add_doc_presence(PairKey{a, b});
    }
  } else {
    t.set_has_doc_counts(false);
  }
  return t;
}

void write_null_stats(const NullModelStats& stats, const std::filesystem::path& path) {
  std::string buf;
  for (const auto& [key, ms] : stats.stats) {
    append_raw<std::uint32_t>(buf, key.a);
    append_raw<std::uint32_t>(buf, key.b);
    append_raw<double>(buf, ms.mu);
    append_raw<double>(buf, ms.sigma);
  }
  atomic_write_file(path, buf);
}

NullModelStats read_null_stats(const std::filesystem::path& path, int year) {
  std::string buf = read_text_file(path);
  constexpr std::size_t rec = 2 * sizeof(std::uint32_t) + 2 * sizeof(double);
  if (buf.size() % rec != 0)
    throw ParseError(path.string() + ": truncated null stats");
  NullModelStats out;
  out.year = year;
  std::size_t off = 0;
  while (off < buf.size()) {
    auto a = read_raw<std::uint32_t>(buf, off);
    auto b = read_raw<std::uint32_t>(buf, off);
    MeanSd ms;
    ms.mu = read_raw<double>(buf, off);
    ms.sigma = read_raw<double>(buf, off);
    out.stats.emplace(PairKey{a, b}, ms);
  }
  return out;
}

}  // namespace teamscope
