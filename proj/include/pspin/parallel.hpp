// Deterministic data-parallel map over independent tasks.
#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace pspin {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed of task `index` under run seed `seed`; independent of scheduling.
inline std::uint64_t task_seed(std::uint64_t seed, std::uint64_t index) { return seed ^ splitmix64(index); }

template <typename T>
struct TaskResult {
  std::optional<T> value;
  std::string error;

  bool ok() const { return value.has_value(); }
};

/// Runs fn(i) for i in [0, n_tasks) on `workers` threads and returns the
/// results in task order. An exception thrown by one task is recorded in
/// its slot and does not affect the others.
template <typename Fn>
auto parallel_map(std::size_t n_tasks, int workers, Fn&& fn) -> std::vector<TaskResult<decltype(fn(std::size_t{}))>> {
  using T = decltype(fn(std::size_t{}));
  std::vector<TaskResult<T>> results(n_tasks);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next.fetch_add(1); i < n_tasks; i = next.fetch_add(1)) {
      try {
        results[i].value.emplace(fn(i));
      } catch (const std::exception& e) {
        results[i].error = e.what();
      } catch (...) {
        results[i].error = "unknown error";
      }
    }
  };
  const int n_threads = static_cast<int>(std::min<std::size_t>(std::max(workers, 1), std::max<std::size_t>(n_tasks, 1)));
  if (n_threads <= 1) {
    work();
    return results;
  }
  std::vector<std::jthread> pool;
  pool.reserve(n_threads);
  for (int t = 0; t < n_threads; ++t) pool.emplace_back(work);
  pool.clear();
  return results;
}

/// Unwraps results, rethrowing the first recorded task error.
template <typename T>
std::vector<T> collect(std::vector<TaskResult<T>>&& results) {
  std::vector<T> out;
  out.reserve(results.size());
  for (auto& r : results) {
    if (!r.ok()) throw std::runtime_error(r.error);
    out.push_back(std::move(*r.value));
  }
  return out;
}

}  // namespace pspin
