#pragma once

namespace anoma {

/// Number of worker threads OpenMP regions will use.
int max_threads();

/// Caps worker threads; n < 1 restores the implementation default.
void set_max_threads(int n);

/// Applies ANOMA_THREADS when set to a positive integer. Returns the cap applied
/// or 0 when the variable is absent or invalid.
int apply_thread_env();

}  // namespace anoma
