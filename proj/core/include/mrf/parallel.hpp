#pragma once

#include <cstddef>

namespace mrf {

/// Reads MRF_THREADS (0 or unset = OpenMP default) and applies it. Idempotent.
void configure_threads();

/// Number of worker threads parallel loops will use.
int thread_count();

}  // namespace mrf
