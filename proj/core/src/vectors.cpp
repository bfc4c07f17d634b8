#include "teamscope/vectors.hpp"

#include <cctype>
#include <cmath>

#include "teamscope/errors.hpp"
#include "teamscope/io.hpp"
#include "teamscope/rng.hpp"

namespace teamscope {

namespace {

void normalize(std::vector<double>& v, const std::string& what) {
  double ss = 0.0;
  for (double x : v) {
    if (!std::isfinite(x)) throw ParseError(what + ": non-finite value");
    ss += x * x;
  }
  if (ss == 0.0) throw ParseError(what + ": zero vector cannot be normalized");
  double inv = 1.0 / std::sqrt(ss);
  for (double& x : v) x *= inv;
}

}  // namespace

const std::vector<double>* VectorStore::find(const std::string& doc_id) const {
  auto it = vectors_.find(doc_id);
  return it == vectors_.end() ? nullptr : &it->second;
}

void VectorStore::insert(const std::string& doc_id, std::vector<double> values) {
  if (dim_ == 0) dim_ = static_cast<int>(values.size());
  if (static_cast<int>(values.size()) != dim_)
    throw ParseError("vector for " + doc_id + " has dim " +
                     std::to_string(values.size()) + ", store dim is " +
                     std::to_string(dim_));
  normalize(values, "vector for " + doc_id);
  if (!vectors_.emplace(doc_id, std::move(values)).second)
    throw ParseError("duplicate vector for " + doc_id);
}

VectorStore load_vectors(const std::filesystem::path& path) {
  VectorStore store;
  for_each_jsonl(path, [&](const nlohmann::json& obj, std::size_t lineno) {
    std::string where = path.string() + ":" + std::to_string(lineno);
    auto id_it = obj.find("doc_id");
    auto val_it = obj.find("values");
    if (id_it == obj.end() || !id_it->is_string())
      throw ParseError(where + ": missing string field 'doc_id'");
    if (val_it == obj.end() || !val_it->is_array())
      throw ParseError(where + ": missing array field 'values'");
    std::vector<double> values;
    values.reserve(val_it->size());
    for (const auto& v : *val_it) {
      if (!v.is_number()) throw ParseError(where + ": values must be numbers");
      values.push_back(v.get<double>());
    }
    try {
      store.insert(id_it->get<std::string>(), std::move(values));
    } catch (const ParseError& e) {
      throw ParseError(where + ": " + e.what());
    }
  });
  return store;
}

void write_vectors(const VectorStore& store, const std::filesystem::path& path) {
  std::string out;
  for (const auto& [id, values] : store.all()) {
    nlohmann::ordered_json obj;
    obj["doc_id"] = id;
    obj["values"] = values;
    out += obj.dump();
    out += '\n';
  }
  atomic_write_file(path, out);
}

std::vector<double> embed_fallback(std::string_view text, int dim, std::uint64_t seed) {
  if (dim < 8) throw ConfigError("embed_fallback: dim must be >= 8");
  std::vector<double> acc(static_cast<std::size_t>(dim), 0.0);
  std::string token;
  bool any = false;
  auto flush = [&] {
    if (token.empty()) return;
    any = true;
    // per-token deterministic +-1 pattern
    Rng rng(hash64(token, seed));
    for (double& x : acc) x += (rng.next_u64() & 1) ? 1.0 : -1.0;
    token.clear();
  };
  for (char c : text) {
    unsigned char u = static_cast<unsigned char>(c);
    if (std::isalnum(u)) {
      token += static_cast<char>(std::tolower(u));
    } else {
      flush();
    }
  }
  flush();
  if (!any) throw ParseError("embed_fallback: text has no tokens");
  normalize(acc, "fallback embedding");
  return acc;
}

double cosine_distance(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size())
    throw ConfigError("cosine_distance: dimension mismatch " +
                      std::to_string(u.size()) + " vs " + std::to_string(v.size()));
  double dot = 0.0;
  bool equal = true;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    equal = equal && u[i] == v[i];
  }
  // identical vectors are exactly distance 0; otherwise clamp out the
  // normalization rounding that can push 1 - dot a hair outside [0, 2]
  if (equal) return 0.0;
  double d = 1.0 - dot;
  if (d < 0.0) return 0.0;
  if (d > 2.0) return 2.0;
  return d;
}

}  // namespace teamscope
