#include "marsnet/parallel.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace marsnet {

std::size_t max_threads() noexcept {
#ifdef _OPENMP
    return static_cast<std::size_t>(omp_get_max_threads());
#else
    return 1;
#endif
}

void set_threads(std::size_t n) noexcept {
#ifdef _OPENMP
    if (n > 0) omp_set_num_threads(static_cast<int>(n));
#else
    (void)n;
#endif
}

}  // namespace marsnet
