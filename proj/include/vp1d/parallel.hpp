#pragma once

// Loop drivers shared by the data-parallel kernels. Serial is the reference
// path; Parallel must produce bit-identical results because every index is
// computed independently and all reductions happen afterwards in index
// order.

#include <cstddef>
#include <exception>
#include <mutex>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace vp1d {

enum class Execution { Serial, Parallel };

inline std::string to_string(Execution e) { return e == Execution::Serial ? "serial" : "parallel"; }

inline void set_thread_count(int threads) {
#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#else
  (void)threads;
#endif
}

inline int thread_count() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

/// Calls fn(k) for k in [0, n). Exceptions thrown by fn are captured and the
/// one from the lowest index is rethrown after the loop.
template <class Fn>
void for_each_index(Execution policy, std::size_t n, Fn&& fn) {
  if (policy == Execution::Serial) {
    for (std::size_t k = 0; k < n; ++k) fn(k);
    return;
  }
  std::exception_ptr error;
  std::size_t error_index = n;
  std::mutex guard;
  const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 1)
  for (long long k = 0; k < count; ++k) {
    try {
      fn(static_cast<std::size_t>(k));
    } catch (...) {
      std::lock_guard lock(guard);
      if (static_cast<std::size_t>(k) < error_index) {
        error_index = static_cast<std::size_t>(k);
        error = std::current_exception();
      }
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace vp1d
