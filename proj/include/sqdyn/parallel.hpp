#pragma once

#include <cstddef>
#include <vector>

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace sqdyn {

// Execution switch for the data-parallel kernels.  Every kernel has the
// shape "independent per-element work, then an ordered serial reduction",
// so the parallel path produces bit-identical results to the serial one.
// The serial path is kept as the reference implementation for tests and
// for the kernel benchmark.
enum class Exec { Serial, Parallel };

inline int hardware_threads() {
#if defined(_OPENMP)
    return omp_get_max_threads();
#else
    return 1;
#endif
}

// Apply fn(i) for i in [0, n).  fn must only touch element-local state.
template <typename Fn>
void for_each_index(std::size_t n, Exec exec, Fn&& fn) {
    if (exec == Exec::Parallel) {
#if defined(_OPENMP)
#pragma omp parallel for schedule(dynamic, 16)
        for (long long i = 0; i < static_cast<long long>(n); ++i) {
            fn(static_cast<std::size_t>(i));
        }
        return;
#endif
    }
    for (std::size_t i = 0; i < n; ++i) fn(i);
}

// Map each index to a value; the output vector is filled slot-by-slot so
// the subsequent reduction order never depends on the thread schedule.
template <typename T, typename Fn>
std::vector<T> map_indexed(std::size_t n, Exec exec, Fn&& fn) {
    std::vector<T> out(n);
    for_each_index(n, exec, [&](std::size_t i) { out[i] = fn(i); });
    return out;
}

}  // namespace sqdyn
