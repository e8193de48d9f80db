#pragma once

#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace casclab {

// Global worker-count knob (CLI --threads). 1 is the determinism reference;
// all parallel loops write results by index so any count reproduces the
// same bytes.
void set_threads(int count);
int threads();

// Index-parallel map. fn(i) must only write state owned by index i; any
// reduction happens afterwards as a serial fold in index order.
template <class F>
void parallel_for(std::size_t count, F&& fn) {
#ifdef _OPENMP
  if (threads() > 1) {
    #pragma omp parallel for schedule(static) num_threads(threads())
    for (long long i = 0; i < static_cast<long long>(count); ++i) {
      fn(static_cast<std::size_t>(i));
    }
    return;
  }
#endif
  for (std::size_t i = 0; i < count; ++i) fn(i);
}

// Serial reference path, kept callable so tests and the benchmark can
// compare against the parallel kernels directly.
template <class F>
void serial_for(std::size_t count, F&& fn) {
  for (std::size_t i = 0; i < count; ++i) fn(i);
}

}  // namespace casclab
