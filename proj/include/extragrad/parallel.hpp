#pragma once

#include <cstddef>
#include <functional>

namespace extragrad {

/// Worker count: EXTRAGRAD_THREADS if set and valid, else requested, else
/// hardware concurrency; always at least 1.
std::size_t resolve_threads(std::size_t requested = 0);

/// Calls fn(i) for i in [0, count) on up to threads workers. Each index runs
/// exactly once; callers write into per-index slots, so results do not depend
/// on scheduling. The first exception thrown by any task is rethrown.
void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& fn);

}  // namespace extragrad
