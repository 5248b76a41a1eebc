#ifndef REEBLAB_PARALLEL_HPP
#define REEBLAB_PARALLEL_HPP

#include <cstddef>
#include <functional>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace reeblab {

// OpenMP map over an index range.  Each slot is written exactly once by its
// own index, so results are identical for any thread count; the serial path
// is the reference implementation used by the determinism tests.
template <class F>
void parallel_for(std::size_t n, int jobs, bool parallel, F&& body) {
#ifdef _OPENMP
    if (parallel && n > 1) {
        int threads = jobs > 0 ? jobs : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
        for (long long i = 0; i < static_cast<long long>(n); ++i)
            body(static_cast<std::size_t>(i));
        return;
    }
#else
    (void)jobs;
    (void)parallel;
#endif
    for (std::size_t i = 0; i < n; ++i) body(i);
}

inline int hardware_jobs() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace reeblab

#endif
