#pragma once

#include <exception>
#include <vector>

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace mcbf {

// Every data-parallel loop in the library goes through ForEachIndex. The
// serial path is the reference: parallel runs must reproduce it bit for bit,
// which holds because each index writes only its own output slot.
enum class Execution { kSerial, kParallel };

inline bool InParallelRegion() {
#if defined(_OPENMP)
  return omp_in_parallel() != 0;
#else
  return false;
#endif
}

inline int MaxThreads() {
#if defined(_OPENMP)
  return omp_get_max_threads();
#else
  return 1;
#endif
}

template <class F>
void ForEachIndex(Execution exec, int n, F&& f) {
  if (exec == Execution::kSerial || n <= 1 || InParallelRegion()) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
  // Exceptions may not cross the OpenMP region boundary.
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n; ++i) {
    try {
      f(i);
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace mcbf
