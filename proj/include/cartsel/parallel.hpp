#pragma once

#include <cstddef>
#include <exception>
#include <mutex>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cartsel {

/// Runs body(i) for i in [0, n) on up to `jobs` OpenMP threads. Each index
/// must write only its own output slot; the first exception is rethrown.
template <class Body>
void parallel_for(std::size_t n, int jobs, Body&& body) {
  std::exception_ptr error;
  std::mutex error_mutex;
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic) num_threads(jobs > 0 ? jobs : 1)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard lock(error_mutex);
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
}

inline int hardware_jobs() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace cartsel
