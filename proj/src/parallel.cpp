#include "mmill/parallel.hpp"

#include <omp.h>

namespace mmill {

int resolve_threads(int requested) noexcept {
    return requested > 0 ? requested : omp_get_max_threads();
}

int available_threads() noexcept { return omp_get_num_procs(); }

}  // namespace mmill
