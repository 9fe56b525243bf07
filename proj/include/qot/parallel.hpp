#pragma once

#include <cstddef>
#include <functional>

namespace qot {

/// Worker cap from QOT_THREADS (default 1).
unsigned worker_count();

/// Runs body(i) for i in [0, count). Iterations must be independent; results
/// are written by index so the outcome does not depend on the worker count.
/// The first exception thrown by any iteration is rethrown.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace qot
