#pragma once

#include <functional>

namespace spotvol {

/// Runs fn(i) for i in [0, n) on up to `workers` threads.  Work items must be
/// independent; callers collect results into pre-sized storage indexed by i
/// so that reductions stay deterministic regardless of the worker count.
void parallel_for(long n, int workers, const std::function<void(long)>& fn);

}  // namespace spotvol
