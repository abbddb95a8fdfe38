#pragma once

#include <cstddef>
#include <functional>

namespace expanse {

// Worker cap from EXPANSE_THREADS (0 or unset = hardware concurrency).
int thread_budget();

// Runs fn(chunk_index, begin, end) over a deterministic contiguous
// partition of [0,n). Returns the number of chunks used. Reductions must be
// order-insensitive (min/max/integer sums) to stay bit-identical to serial
// execution.
int parallel_chunks(std::size_t n, std::size_t min_grain,
                    const std::function<void(int, std::size_t, std::size_t)>& fn);

}  // namespace expanse
