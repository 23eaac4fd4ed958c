#include "mrf/parallel.hpp"

#include <cstdlib>
#include <mutex>
#include <string>

#include <omp.h>

namespace mrf {

void configure_threads() {
  static std::once_flag once;
  std::call_once(once, [] {
    const char* env = std::getenv("MRF_THREADS");
    if (env == nullptr) return;
    try {
      const int requested = std::stoi(env);
      if (requested > 0) omp_set_num_threads(requested);
    } catch (const std::exception&) {
      // unparsable values fall back to the OpenMP default
    }
  });
}

int thread_count() {
  configure_threads();
  return omp_get_max_threads();
}

}  // namespace mrf
