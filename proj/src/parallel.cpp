#include "slk/parallel.hpp"

#include <omp.h>

#include <stdexcept>

namespace slk {

void set_thread_count(int threads) {
  if (threads < 0) throw std::invalid_argument("thread count must be >= 0");
  omp_set_num_threads(threads == 0 ? omp_get_num_procs() : threads);
}

int thread_count() { return omp_get_max_threads(); }

}  // namespace slk
