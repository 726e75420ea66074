#pragma once

#include <cstddef>

#include "relgreen/types.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace relgreen {

// Apply fn(i) for i in [0, n).  The parallel path distributes indices over
// threads; every index is written by exactly one call and there are no
// cross-index reductions, so results are bitwise identical to the serial
// path by construction.
template <class Fn>
void parallel_map(std::size_t n, Exec exec, Fn&& fn) {
#ifdef _OPENMP
    if (exec == Exec::parallel) {
        const long long nn = static_cast<long long>(n);
#pragma omp parallel for schedule(static)
        for (long long i = 0; i < nn; ++i) fn(static_cast<std::size_t>(i));
        return;
    }
#else
    (void)exec;
#endif
    for (std::size_t i = 0; i < n; ++i) fn(i);
}

} // namespace relgreen
