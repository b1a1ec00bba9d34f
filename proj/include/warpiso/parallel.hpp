#pragma once

#include <cstddef>
#include <functional>

namespace warpiso {

/// Worker cap from the WARPISO_THREADS environment variable, defaulting to
/// the hardware concurrency. Always at least 1.
unsigned max_threads();

/// Run fn(i) for i in [0, count). Results must be written to per-index
/// slots by the caller so the output ordering is deterministic regardless
/// of scheduling. Exceptions from workers are rethrown on the caller.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

}  // namespace warpiso
