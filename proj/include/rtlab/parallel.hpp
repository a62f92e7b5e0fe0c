#pragma once

#include <cstddef>
#include <functional>

namespace rtlab {

/// Runs body(i) for i in [0, count) on up to `threads` workers (0 = hardware
/// concurrency). Indices are handed out dynamically; callers write results to
/// slot i so the reduction order never depends on scheduling. The first
/// exception thrown by any worker is rethrown after all workers stop.
void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& body);

}  // namespace rtlab
