#pragma once

#include <cstddef>
#include <exception>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace henon {

/// Serial kernels are kept as reference implementations; both must produce
/// bit-identical results because every task is a pure function of its index.
enum class Execution { serial, parallel };

/// Runs fn(i) for i in [0, n). An exception thrown by a task is rethrown after
/// the loop; with several failing tasks the one with the smallest index wins,
/// matching the serial order.
template <class Fn>
void for_each_index(std::size_t n, Execution exec, Fn&& fn)
{
    if (exec == Execution::parallel) {
        std::exception_ptr first;
        std::size_t first_index = n;
#pragma omp parallel for schedule(dynamic, 16)
        for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
            try {
                fn(static_cast<std::size_t>(i));
            } catch (...) {
#pragma omp critical(henon_for_each_index)
                if (static_cast<std::size_t>(i) < first_index) {
                    first_index = static_cast<std::size_t>(i);
                    first = std::current_exception();
                }
            }
        }
        if (first) std::rethrow_exception(first);
        return;
    }
    for (std::size_t i = 0; i < n; ++i) fn(i);
}

inline int thread_count()
{
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

inline void set_thread_count(int n)
{
#ifdef _OPENMP
    if (n > 0) omp_set_num_threads(n);
#else
    (void)n;
#endif
}

}  // namespace henon
