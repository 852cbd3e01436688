#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>
#include <vector>

namespace tlasso::harness {

// Runs fn(0..count-1) on up to `threads` workers. Results come back in index
// order regardless of completion order, so output never depends on scheduling.
// The first exception escaping fn is rethrown after all workers join.
template <class T, class Fn>
std::vector<T> parallel_map(std::size_t count, std::size_t threads, Fn fn) {
  std::vector<T> out(count);
  if (count == 0) return out;
  threads = std::clamp<std::size_t>(threads, 1, count);
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) out[i] = fn(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = next++; i < count; i = next++) out[i] = fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
        next = count;
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

}  // namespace tlasso::harness
