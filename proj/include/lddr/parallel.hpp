#pragma once

#include <utility>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace lddr {

// Scenario work is embarrassingly parallel. Callers index results by scenario
// and reduce serially afterwards, so outputs match the serial reference
// bit-for-bit regardless of thread count.
enum class ExecMode { Serial, Parallel };

template <typename F>
void for_each_index(int n, F&& f, ExecMode mode = ExecMode::Parallel) {
#ifdef _OPENMP
    if (mode == ExecMode::Parallel && n > 1) {
#pragma omp parallel for schedule(dynamic)
        for (int i = 0; i < n; ++i) f(i);
        return;
    }
#else
    (void)mode;
#endif
    for (int i = 0; i < n; ++i) f(i);
}

inline int hardware_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace lddr
