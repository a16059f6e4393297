#include "maglap/parallel.hpp"

#include <algorithm>

#include <omp.h>

namespace maglap {

void set_max_threads(int n) { omp_set_num_threads(std::max(1, n)); }

int max_threads() { return omp_get_max_threads(); }

}  // namespace maglap
