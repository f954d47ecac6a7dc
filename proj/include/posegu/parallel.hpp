#pragma once

#include <cstddef>
#include <functional>

namespace posegu {

// Worker count: POSEGU_THREADS if set and positive, else the hardware count.
int worker_count();

// Runs fn(i) for i in [0, n) on up to worker_count() threads. Callers write
// results by index, so output never depends on scheduling. The first
// exception thrown by any task is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace posegu
