#pragma once

#include <functional>

namespace tracker {

/// Worker cap: TRACKER_THREADS when set, otherwise the hardware concurrency.
int max_threads();

/// Runs body(begin, end) over fixed-size index blocks, possibly on several
/// threads. Blocks are fixed independent of the worker count so that any
/// block-wise reduction done in block order is bit-reproducible.
void parallel_blocks(int count, int block_size, const std::function<void(int, int)>& body);

}  // namespace tracker
