#include "floq/types.hpp"

#include <algorithm>
#include <thread>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace floq {

namespace {
thread_local int g_kernel_threads = 0;
}

int hardware_threads() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

void set_kernel_threads(int n) { g_kernel_threads = std::max(0, n); }

int kernel_threads() {
  if (g_kernel_threads > 0) return g_kernel_threads;
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace floq
