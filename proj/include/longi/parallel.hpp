#pragma once

#include <cstddef>
#include <functional>

namespace longi {

/// Worker count: LONGI_READOUT_THREADS if set to a positive integer,
/// otherwise the hardware concurrency (at least 1).
unsigned worker_count();

/// Calls body(i) for i in [0, n) on up to worker_count() threads. Each index
/// is visited exactly once; the first exception thrown is rethrown here after
/// all workers have stopped.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace longi
