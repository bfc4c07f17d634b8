#pragma once

#include <optional>
#include <span>
#include <vector>

namespace teamscope {

// Linear-interpolation percentile: for sorted v of size n, position
// p = (q/100)*(n-1), result v[floor(p)] + frac*(v[floor(p)+1] - v[floor(p)]).
// Throws std::invalid_argument on empty input or q outside [0, 100].
double percentile(std::vector<double> values, double q);

// same, but the caller guarantees `sorted` is ascending
double percentile_sorted(std::span<const double> sorted, double q);

// Percentile rank (rank-1)/(n-1) with ties sharing the average rank of their
// block; a single value maps to 0.5. Input order is preserved in the output.
std::vector<double> percentile_ranks(std::span<const double> values);

}  // namespace teamscope
