#include "teamscope/rng.hpp"

#include <cmath>

namespace teamscope {

std::uint64_t Rng::next_below(std::uint64_t n) {
  if (n == 0) return 0;
  // rejection sampling over the largest multiple of n
  std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % n;
}

double Rng::next_normal() {
  // polar method; consumes a variable but deterministic number of draws
  while (true) {
    double u = 2.0 * next_unit() - 1.0;
    double v = 2.0 * next_unit() - 1.0;
    double s = u * u + v * v;
    if (s > 0.0 && s < 1.0) {
      return u * std::sqrt(-2.0 * std::log(s) / s);
    }
  }
}

std::uint64_t hash64(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t h = 14695981039346656037ull ^ mix64(seed);
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

}  // namespace teamscope
