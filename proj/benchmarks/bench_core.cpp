#include <benchmark/benchmark.h>

#include <cstdint>
#include <map>
#include <vector>

#include "teamscope/cooc.hpp"
#include "teamscope/percentile.hpp"
#include "teamscope/rng.hpp"
#include "teamscope/vectors.hpp"

namespace {

using namespace teamscope;

std::vector<double> random_unit(Rng& rng, int dim) {
  std::vector<double> v(dim);
  double norm = 0.0;
  for (auto& x : v) {
    x = rng.next_normal();
    norm += x * x;
  }
  norm = std::sqrt(norm);
  for (auto& x : v) x /= norm;
  return v;
}

void bench_cosine_distance(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  Rng rng(7);
  auto u = random_unit(rng, dim);
  auto v = random_unit(rng, dim);
  for (auto _ : state) benchmark::DoNotOptimize(cosine_distance(u, v));
}
BENCHMARK(bench_cosine_distance)->Arg(64)->Arg(256)->Arg(768);

void bench_pairwise_percentile(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  Rng rng(11);
  std::vector<std::vector<double>> vecs;
  for (std::size_t i = 0; i < n; ++i) vecs.push_back(random_unit(rng, 64));
  for (auto _ : state) {
    std::vector<double> d;
    d.reserve(n * (n - 1) / 2);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) d.push_back(cosine_distance(vecs[i], vecs[j]));
    benchmark::DoNotOptimize(percentile(std::move(d), 90.0));
  }
}
BENCHMARK(bench_pairwise_percentile)->Arg(10)->Arg(40);

void bench_percentile_ranks(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  Rng rng(13);
  std::vector<double> values(n);
  for (auto& v : values) v = rng.next_unit();
  for (auto _ : state) benchmark::DoNotOptimize(percentile_ranks(values));
}
BENCHMARK(bench_percentile_ranks)->Arg(1000)->Arg(100000);

void bench_louvain(benchmark::State& state) {
  const std::uint32_t blocks = 8;
  const std::uint32_t per_block = static_cast<std::uint32_t>(state.range(0));
  const std::uint32_t n = blocks * per_block;
  Rng rng(17);
  std::map<PairKey, double> weights;
  for (std::uint32_t b = 0; b < blocks; ++b)
    for (std::uint32_t i = 0; i < per_block; ++i)
      for (std::uint32_t j = i + 1; j < per_block; ++j)
        if (rng.next_unit() < 0.5)
          weights[make_pair_key(b * per_block + i, b * per_block + j)] = 1.0;
  for (std::uint32_t e = 0; e < n; ++e)
    weights[make_pair_key(rng.next_below(n), rng.next_below(n))] = 1.0;
  for (auto _ : state)
    benchmark::DoNotOptimize(louvain_partition(weights, n, 1.0, 23));
}
BENCHMARK(bench_louvain)->Arg(16)->Arg(64);

void bench_shuffle(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  std::vector<std::uint32_t> slots(n);
  for (std::size_t i = 0; i < n; ++i) slots[i] = static_cast<std::uint32_t>(i % 97);
  for (auto _ : state) {
    Rng rng(29);
    auto copy = slots;
    for (std::size_t a = 0; a < 10 * n; ++a) {
      std::size_t s1 = rng.next_below(n);
      std::size_t s2 = rng.next_below(n);
      std::swap(copy[s1], copy[s2]);
    }
    benchmark::DoNotOptimize(copy);
  }
}
BENCHMARK(bench_shuffle)->Arg(10000);

}  // namespace

BENCHMARK_MAIN();
