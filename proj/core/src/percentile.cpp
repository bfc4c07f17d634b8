#include "teamscope/percentile.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace teamscope {

double percentile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw std::invalid_argument("percentile: empty input");
  if (!(q >= 0.0 && q <= 100.0))
    throw std::invalid_argument("percentile: q must be in [0, 100]");
  const std::size_t n = sorted.size();
  if (n == 1) return sorted[0];
  double p = (q / 100.0) * static_cast<double>(n - 1);
  std::size_t lo = static_cast<std::size_t>(p);
  if (lo >= n - 1) return sorted[n - 1];
  double frac = p - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

double percentile(std::vector<double> values, double q) {
  std::sort(values.begin(), values.end());
  return percentile_sorted(values, q);
}

std::vector<double> percentile_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<double> out(n, 0.5);
  if (n <= 1) return out;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return values[a] < values[b];
  });

  const double denom = static_cast<double>(n - 1);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    // ties get the average of the ranks they span (0-based)
    double avg_rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) out[order[k]] = avg_rank / denom;
    i = j + 1;
  }
  return out;
}

}  // namespace teamscope
