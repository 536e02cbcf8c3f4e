#pragma once

#include <cstddef>
#include <functional>

namespace bevkit {

/// Worker count: BEV_KIT_THREADS when set to a positive integer, otherwise
/// the hardware concurrency (at least 1).
unsigned worker_count();

/// Splits [0, n) into contiguous chunks and runs fn(begin, end) on each,
/// one chunk per worker. Chunk boundaries depend only on n and the worker
/// count. Exceptions from workers are rethrown on the caller.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace bevkit
