#pragma once

#include <cstddef>
#include <functional>

namespace panoforge {

/// Runs fn(0..n-1) across a bounded worker pool. Index assignment is
/// dynamic; callers must write results keyed by index so output is
/// schedule-independent. workers <= 1 runs inline. The first exception
/// thrown by fn is rethrown after all workers join.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

/// Resolves a configured worker count: 0 means hardware concurrency.
int resolve_workers(int requested);

}  // namespace panoforge
