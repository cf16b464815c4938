#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace hypercolor {

/// Number of worker threads to use when the caller passes 0.
inline int default_threads() {
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Evaluates fn(0), ..., fn(count - 1) on up to `threads` workers and
/// returns the results in index order, so the output does not depend on
/// scheduling. The first exception thrown by any task is rethrown.
template <class Fn>
auto parallel_map(std::size_t count, int threads, Fn fn)
    -> std::vector<decltype(fn(std::size_t{}))> {
  using Result = decltype(fn(std::size_t{}));
  std::vector<Result> out(count);
  if (threads <= 0) threads = default_threads();
  const std::size_t workers = std::min<std::size_t>(std::size_t(threads), count);
  if (workers <= 1) {
    for (std::size_t t = 0; t < count; ++t) out[t] = fn(t);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    while (true) {
      const std::size_t t = next.fetch_add(1);
      if (t >= count) return;
      try {
        out[t] = fn(t);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = count;
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace hypercolor
