#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "teamscope/corpus.hpp"

namespace teamscope {

enum class EntityKind { journal, mesh };

const char* entity_kind_name(EntityKind kind);  // "journal" | "mesh"
EntityKind parse_entity_kind(const std::string& name);

// dense ids over the entities a corpus can pair: cited-work journal issns or
// mesh terms; lexicographic order makes ids stable across runs
class EntityVocabulary {
 public:
  static EntityVocabulary build(const CorpusIndex& index, EntityKind kind);

  EntityKind kind() const { return kind_; }
  std::size_t size() const { return names_.size(); }
  const std::string& name(std::uint32_t id) const { return names_.at(id); }
  std::optional<std::uint32_t> find(const std::string& name) const;
  std::uint32_t id(const std::string& name) const;  // NotFoundError
  const std::vector<std::string>& names() const { return names_; }

  void save(const std::filesystem::path& path) const;  // one name per line
  static EntityVocabulary load(const std::filesystem::path& path, EntityKind kind);

 private:
  EntityKind kind_ = EntityKind::journal;
  std::vector<std::string> names_;
  std::map<std::string, std::uint32_t> ids_;
};

struct PairKey {
  std::uint32_t a = 0;  // a <= b always
  std::uint32_t b = 0;
  auto operator<=>(const PairKey&) const = default;
};

inline PairKey make_pair_key(std::uint32_t x, std::uint32_t y) {
  return x <= y ? PairKey{x, y} : PairKey{y, x};
}

// the document's entity list for this kind, in record order; reference
// entries without a venue are skipped for the journal kind
std::vector<std::uint32_t> doc_entities(const DocumentRecord& doc, EntityKind kind,
                                        const EntityVocabulary& vocab);

// all C(m,2) unordered slot pairs with multiplicity, same-entity pairs
// included; fewer than 2 entities gives an empty result
std::vector<PairKey> pair_multiset(const DocumentRecord& doc, EntityKind kind,
                                   const EntityVocabulary& vocab);

struct PairCell {
  std::int64_t count = 0;      // pair instances
  std::int64_t doc_count = 0;  // documents containing the pair at least once
};

class PairCountTable {
 public:
  PairCountTable() = default;
  PairCountTable(int year, std::size_t vocab_size)
      : year_(year), marginals_(vocab_size, 0) {}

  int year() const { return year_; }
  std::size_t vocab_size() const { return marginals_.size(); }
  const std::map<PairKey, PairCell>& cells() const { return cells_; }
  std::int64_t count(PairKey key) const;
  std::int64_t doc_count(PairKey key) const;
  // N_i = sum_j N_ij, diagonal counted once
  std::int64_t marginal(std::uint32_t i) const { return marginals_.at(i); }
  // N_t = sum_{i<=j} N_ij
  std::int64_t total() const { return total_; }

  void add_pair(PairKey key, std::int64_t n = 1);
  void add_doc_presence(PairKey key);
  void merge(const PairCountTable& other);

  // false when loaded from a triples file lacking the doc-presence sidecar
  bool has_doc_counts() const { return has_doc_counts_; }
  void set_has_doc_counts(bool v) { has_doc_counts_ = v; }

 private:
  int year_ = 0;
  std::map<PairKey, PairCell> cells_;
  std::vector<std::int64_t> marginals_;
  std::int64_t total_ = 0;
  bool has_doc_counts_ = true;
};

// pair instances and doc presence summed over all docs published in `year`
PairCountTable build_counts(const CorpusIndex& index, const EntityVocabulary& vocab,
                            EntityKind kind, int year, int jobs = 1);

// C_ij = (N_ij * N_t) / (N_i * N_j); 0 when the pair is absent
double commonness(const PairCountTable& table, PairKey key);

struct MeanSd {
  double mu = 0.0;
  double sigma = 0.0;
};

struct NullModelStats {
  int year = 0;
  int resamples = 0;
  std::uint64_t seed = 0;
  std::map<PairKey, MeanSd> stats;  // pairs seen in any resample or observed

  const MeanSd* find(PairKey key) const;
};

struct NullModelParams {
  int resamples = 20;
  int swap_factor = 10;  // attempts = swap_factor * slot count
};

// Citation-switching null: swaps entity slots sharing the cited-item
// publication year within the focal year's documents, resample r seeded as
// seed + r. ConfigError if resamples < 2.
NullModelStats null_resample(const CorpusIndex& index, const EntityVocabulary& vocab,
                             EntityKind kind, int year, const NullModelParams& params,
                             std::uint64_t seed, int jobs = 1);

struct YearWindow {
  int first = 0;
  int last = 0;  // inclusive
};

struct CommunityPartition {
  YearWindow window{};
  std::vector<std::int32_t> community;  // per vocab id; -1 = no edges
  double modularity = 0.0;
  std::uint64_t seed = 0;
  int n_communities = 0;
};

// greedy modularity over the co-occurrence graph accumulated across window
// years; ComputeError on an edgeless graph
CommunityPartition community_partition(const CorpusIndex& index,
                                       const EntityVocabulary& vocab, EntityKind kind,
                                       YearWindow window, double resolution,
                                       std::uint64_t seed);

// same algorithm on an explicit weighted graph (keys a <= b, self-loops ok)
CommunityPartition louvain_partition(const std::map<PairKey, double>& weights,
                                     std::size_t n_nodes, double resolution,
                                     std::uint64_t seed);

// earliest history year with the pair present; history must be ascending by
// year; none = pair unseen
std::optional<int> pair_first_year(std::span<const PairCountTable> history, PairKey key);

// cosine similarity of co-occurrence row profiles summed over the window;
// 0 if either profile is empty
double profile_similarity(std::span<const PairCountTable> window, std::uint32_t i,
                          std::uint32_t j);

// persisted forms: sorted (i, j, count) triples; null files add mu, sigma
void write_table(const PairCountTable& table, const std::filesystem::path& path);
PairCountTable read_table(const std::filesystem::path& path, int year,
                          std::size_t vocab_size);
void write_null_stats(const NullModelStats& stats, const std::filesystem::path& path);
NullModelStats read_null_stats(const std::filesystem::path& path, int year);

}  // namespace teamscope
