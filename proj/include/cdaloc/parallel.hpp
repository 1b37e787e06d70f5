#pragma once

#include <cstddef>
#include <functional>

namespace cdaloc {

/// Worker count: CDA_LOC_THREADS when set to a positive integer, otherwise the
/// hardware concurrency (at least 1).
std::size_t max_threads();

/// Runs body(i) for i in [0, n) on up to max_threads() workers. Callers write
/// results by index so output never depends on scheduling. The first
/// exception thrown by any worker is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace cdaloc
