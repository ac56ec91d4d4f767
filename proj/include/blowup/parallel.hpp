#pragma once

#include <cstddef>
#include <functional>

namespace blowup {

/// Worker count: BLOWUPLAB_THREADS if set to a positive integer, else the
/// hardware concurrency.
unsigned worker_count();

/// Runs body(i) for i in [0, n) on up to worker_count() threads. Bodies must
/// write only to their own slot; results are merged by the caller in index
/// order, so output never depends on the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace blowup
