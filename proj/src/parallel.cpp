#include "minkflow/parallel.hpp"

#include <cstdlib>
#include <string>

namespace minkflow {

void apply_thread_cap_from_env() {
#ifdef MINKFLOW_HAVE_OPENMP
  const char* env = std::getenv("MINKFLOW_THREADS");
  if (env == nullptr || *env == '\0') return;
  try {
    const int n = std::stoi(env);
    if (n > 0) omp_set_num_threads(n);
  } catch (const std::exception&) {
    // ignore junk, keep the runtime default
  }
#endif
}

}  // namespace minkflow
