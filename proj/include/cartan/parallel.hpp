#pragma once

#include <cstddef>
#include <exception>
#include <mutex>

namespace cartan::par {

// Runs fn(i) for i in [0, n) across OpenMP threads. Each index writes only its
// own output slot, so results are identical to the serial loop. The first
// exception thrown by any iteration (lowest index wins) is rethrown.
template <typename Fn>
void for_each_index(std::size_t n, Fn&& fn) {
  std::exception_ptr first_error;
  std::size_t first_index = n;
  std::mutex guard;
  const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 1)
  for (long long i = 0; i < count; ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard<std::mutex> lock(guard);
      if (static_cast<std::size_t>(i) < first_index) {
        first_index = static_cast<std::size_t>(i);
        first_error = std::current_exception();
      }
    }
  }
  if (first_error) std::rethrow_exception(first_error);
}

template <typename Fn>
void for_each_index_serial(std::size_t n, Fn&& fn) {
  for (std::size_t i = 0; i < n; ++i) fn(i);
}

}  // namespace cartan::par
