#pragma once

#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace teamscope {

namespace detail {

// joins all threads, then rethrows the first exception any of them raised
class WorkerGroup {
 public:
  template <typename Fn>
  void spawn(Fn fn) {
    threads_.emplace_back([this, fn = std::move(fn)]() mutable {
      try {
        fn();
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu_);
        if (!error_) error_ = std::current_exception();
      }
    });
  }

  void join_all() {
    for (auto& t : threads_) t.join();
    threads_.clear();
    if (error_) std::rethrow_exception(error_);
  }

 private:
  std::vector<std::thread> threads_;
  std::mutex mu_;
  std::exception_ptr error_;
};

}  // namespace detail

// Static contiguous sharding so results are schedule-independent: shard k
// covers [k*n/jobs, (k+1)*n/jobs) and partials are merged in shard order.
template <typename Result, typename MapFn, typename ReduceFn>
Result sharded_reduce(std::size_t n, int jobs, MapFn map_shard, ReduceFn reduce) {
  if (jobs < 1) jobs = 1;
  if (static_cast<std::size_t>(jobs) > n) jobs = n == 0 ? 1 : static_cast<int>(n);
  if (jobs == 1) return map_shard(std::size_t{0}, n);

  std::vector<Result> partials(static_cast<std::size_t>(jobs));
  detail::WorkerGroup group;
  for (int k = 0; k < jobs; ++k) {
    std::size_t begin = n * static_cast<std::size_t>(k) / static_cast<std::size_t>(jobs);
    std::size_t end = n * static_cast<std::size_t>(k + 1) / static_cast<std::size_t>(jobs);
    group.spawn([&partials, &map_shard, k, begin, end] {
      partials[static_cast<std::size_t>(k)] = map_shard(begin, end);
    });
  }
  group.join_all();

  Result out = std::move(partials[0]);
  for (int k = 1; k < jobs; ++k) reduce(out, std::move(partials[static_cast<std::size_t>(k)]));
  return out;
}

// fn(i) for i in [0, n); writes must go to per-index slots
template <typename Fn>
void parallel_for_index(std::size_t n, int jobs, Fn fn) {
  if (jobs < 1) jobs = 1;
  if (static_cast<std::size_t>(jobs) > n) jobs = n == 0 ? 1 : static_cast<int>(n);
  if (jobs == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  detail::WorkerGroup group;
  for (int k = 0; k < jobs; ++k) {
    std::size_t begin = n * static_cast<std::size_t>(k) / static_cast<std::size_t>(jobs);
    std::size_t end = n * static_cast<std::size_t>(k + 1) / static_cast<std::size_t>(jobs);
    group.spawn([&fn, begin, end] {
      for (std::size_t i = begin; i < end; ++i) fn(i);
    });
  }
  group.join_all();
}

}  // namespace teamscope
