#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace misinfo {

/// Number of workers to use when the caller passes 0.
inline unsigned default_workers() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

/// Runs fn(begin, end) over contiguous shards of [0, n). Shard boundaries
/// depend only on n and the worker count; callers write results into
/// per-index slots so output never depends on scheduling. The first
/// exception thrown by any shard is rethrown after all shards finish.
template <typename Fn>
void parallel_for(std::size_t n, unsigned workers, Fn&& fn) {
  if (workers == 0) workers = default_workers();
  const std::size_t shards = std::min<std::size_t>(workers, n);
  if (shards <= 1) {
    if (n > 0) fn(std::size_t{0}, n);
    return;
  }
  std::vector<std::exception_ptr> errors(shards);
  {
    std::vector<std::jthread> threads;
    threads.reserve(shards);
    for (std::size_t s = 0; s < shards; ++s) {
      const std::size_t begin = n * s / shards;
      const std::size_t end = n * (s + 1) / shards;
      threads.emplace_back([&, s, begin, end] {
        try {
          fn(begin, end);
        } catch (...) {
          errors[s] = std::current_exception();
        }
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace misinfo
