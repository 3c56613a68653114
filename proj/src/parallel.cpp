#include "anoma/parallel.hpp"

#include <cstdlib>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace anoma {

namespace {
#ifdef _OPENMP
const int default_threads = omp_get_max_threads();
#endif
}  // namespace

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void set_max_threads(int n) {
#ifdef _OPENMP
  omp_set_num_threads(n >= 1 ? n : default_threads);
#else
  (void)n;
#endif
}

int apply_thread_env() {
  const char* raw = std::getenv("ANOMA_THREADS");
  if (raw == nullptr) return 0;
  try {
    std::size_t used = 0;
    const int n = std::stoi(raw, &used);
    if (used != std::string(raw).size() || n < 1) return 0;
    set_max_threads(n);
    return n;
  } catch (const std::exception&) {
    return 0;
  }
}

}  // namespace anoma
