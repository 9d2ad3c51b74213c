#pragma once

#include <cstddef>
#include <functional>

namespace ltm {

/// Worker cap: LTM_THREADS environment variable if set (>=1), otherwise the
/// hardware concurrency.
int max_threads();

/// Runs fn(i) for i in [0, n). Results must be written by index; iteration
/// order is unspecified, output layout is deterministic.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace ltm
