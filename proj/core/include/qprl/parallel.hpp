#pragma once

#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace qprl {

/// Runs fn(i) for every i in [0, count) split into contiguous chunks across
/// `workers` threads; workers <= 1 stays on the calling thread. Work items
/// must be independent — callers pass per-index rng streams and write to
/// per-index slots, so results do not depend on the worker count. The first
/// exception raised by any chunk is rethrown after all threads join.
inline void parallel_for(std::size_t count, int workers,
                         const std::function<void(std::size_t)>& fn) {
  if (count == 0) return;
  std::size_t w = workers <= 1 ? 1 : static_cast<std::size_t>(workers);
  if (w > count) w = count;
  if (w == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }

  std::vector<std::exception_ptr> errors(w);
  std::vector<std::thread> threads;
  threads.reserve(w);
  const std::size_t chunk = (count + w - 1) / w;
  for (std::size_t t = 0; t < w; ++t) {
    const std::size_t begin = t * chunk;
    const std::size_t end = std::min(count, begin + chunk);
    threads.emplace_back([&, t, begin, end] {
      try {
        for (std::size_t i = begin; i < end; ++i) fn(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (std::thread& thread : threads) thread.join();
  for (const std::exception_ptr& err : errors) {
    if (err) std::rethrow_exception(err);
  }
}

}  // namespace qprl
