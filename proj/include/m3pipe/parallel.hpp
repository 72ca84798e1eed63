#pragma once

#include <cstddef>
#include <exception>
#include <mutex>
#include <utility>

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace m3pipe {

// Every data-parallel loop in the pipeline runs through for_each_index so a
// single serial reference path exists for differential testing and for the
// kernel benchmark. Outputs must be written to per-index slots; no kernel may
// depend on iteration order.
enum class ExecMode { serial, openmp };

template <class Fn>
void for_each_index(ExecMode mode, std::size_t n, int threads, Fn&& fn) {
  if (mode == ExecMode::serial || threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
#if defined(_OPENMP)
  std::exception_ptr first_error;
  std::mutex error_mutex;
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (long long i = 0; i < static_cast<long long>(n); ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (!first_error) first_error = std::current_exception();
    }
  }
  if (first_error) std::rethrow_exception(first_error);
#else
  for (std::size_t i = 0; i < n; ++i) fn(i);
#endif
}

}  // namespace m3pipe
