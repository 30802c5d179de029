#pragma once

#include <cstddef>

#ifdef MINKFLOW_HAVE_OPENMP
#include <omp.h>
#endif

namespace minkflow {

// Caps worker threads from MINKFLOW_THREADS (if set). Safe to call repeatedly.
void apply_thread_cap_from_env();

// Nodewise map over [0, n). Each index is written by exactly one worker, so
// results do not depend on the thread count. Reductions are done serially by callers.
template <class F>
void parallel_for(std::size_t n, F&& body) {
#ifdef MINKFLOW_HAVE_OPENMP
  const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(static) if (count > 512)
  for (long long i = 0; i < count; ++i) body(static_cast<std::size_t>(i));
#else
  for (std::size_t i = 0; i < n; ++i) body(i);
#endif
}

}  // namespace minkflow
