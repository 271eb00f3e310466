#pragma once

#include <cstddef>
#include <functional>

namespace sieve {

// Worker count from JUDGMENT_SIEVE_THREADS; 0 or unset means one worker per
// hardware thread.
unsigned worker_count();

// Runs fn over [0, n) split into contiguous chunks, one per worker. Callers
// must derive any randomness from the item index so results are
// schedule-independent.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace sieve
