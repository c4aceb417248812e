#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace epictrl {

/// Thread cap from EPICTRL_THREADS, falling back to the hardware concurrency.
unsigned thread_limit();

/// Runs fn(0..count-1) on up to max_threads threads. Each index is handled by
/// exactly one thread; the first exception thrown is rethrown after all joins.
template <class Fn>
void parallel_for(std::size_t count, unsigned max_threads, Fn&& fn) {
  const std::size_t workers = std::min<std::size_t>(count, max_threads == 0 ? 1 : max_threads);
  if (workers <= 1) {
    for (std::size_t k = 0; k < count; ++k) fn(k);
    return;
  }
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t k = w; k < count; k += workers) {
        try {
          fn(k);
        } catch (...) {
          const std::lock_guard lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace epictrl
