#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace teamscope {

struct DocVector {
  std::string doc_id;
  std::vector<double> values;  // unit length
};

class VectorStore {
 public:
  VectorStore() = default;
  explicit VectorStore(int dim) : dim_(dim) {}

  int dim() const { return dim_; }
  std::size_t size() const { return vectors_.size(); }
  bool contains(const std::string& doc_id) const { return vectors_.count(doc_id) > 0; }
  const std::vector<double>* find(const std::string& doc_id) const;
  const std::map<std::string, std::vector<double>>& all() const { return vectors_; }

  // normalizes; rejects dim mismatch, duplicates, non-finite or zero vectors
  void insert(const std::string& doc_id, std::vector<double> values);

 private:
  int dim_ = 0;
  std::map<std::string, std::vector<double>> vectors_;
};

// jsonl of {doc_id, values:[...]}; every vector renormalized on load
VectorStore load_vectors(const std::filesystem::path& path);
void write_vectors(const VectorStore& store, const std::filesystem::path& path);

// Deterministic bag-of-words signed random projection: lowercase tokens on
// non-alphanumeric boundaries, each token hashed (with seed) to a +-1 pattern,
// token counts summed, result L2-normalized. Test substitute for a real
// embedding model.
std::vector<double> embed_fallback(std::string_view text, int dim, std::uint64_t seed);

// 1 - <u,v> for unit vectors; [0, 2]
double cosine_distance(std::span<const double> u, std::span<const double> v);

}  // namespace teamscope
