#pragma once

// Static-partition data parallelism. Workers write into disjoint slots, so
// every reduction done afterwards by the caller is deterministic.

#include <cstddef>
#include <functional>

namespace holo {

/// Worker count: HOLO_THREADS if set to a positive integer, otherwise the
/// hardware concurrency (at least 1).
int thread_count();

/// Calls body(i) for every i in [0, count). The first exception thrown by
/// any worker is rethrown on the calling thread.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace holo
