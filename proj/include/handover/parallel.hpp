#pragma once

#include <thread>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace handover {

inline int default_jobs() {
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

// Parallel loop over [0, n). Each index must write only its own output slots;
// results must not depend on execution order, so the loop is deterministic
// for any job count. jobs <= 1 runs the plain serial loop.
template <class F>
void parallel_for(int n, int jobs, F&& body) {
  if (jobs <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1) num_threads(jobs)
  for (int i = 0; i < n; ++i) body(i);
#else
  for (int i = 0; i < n; ++i) body(i);
#endif
}

}  // namespace handover
