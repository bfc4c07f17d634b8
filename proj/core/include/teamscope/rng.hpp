#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace teamscope {

// Deterministic random source. mt19937_64 output is fixed by the standard;
// the distribution helpers below are hand-rolled because the std distribution
// objects are implementation-defined and would break reproducibility across
// toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // uniform in [0, n), unbiased via rejection
  std::uint64_t next_below(std::uint64_t n);

  // uniform double in [0, 1), 53 bits
  double next_unit() { return (engine_() >> 11) * 0x1.0p-53; }

  // standard normal, polar Box-Muller (one value per call, cache discarded
  // deliberately so draw counts stay easy to reason about)
  double next_normal();

  // Fisher-Yates
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(next_below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

// FNV-1a over bytes, mixed with a seed; used for seeding per-token streams
std::uint64_t hash64(std::string_view bytes, std::uint64_t seed = 0);

// splitmix64 step; handy for deriving independent stream seeds
std::uint64_t mix64(std::uint64_t x);

}  // namespace teamscope
