#pragma once

#include <cstddef>
#include <functional>

namespace shen::run {

// Worker count: explicit request, else SHEN_THREADS, else hardware concurrency.
int resolve_threads(int requested = 0);

// Runs body(i) for i in [0, count) on the given number of workers. Work items
// are claimed through a shared atomic counter; callers must write results
// into per-index slots so that aggregation order never depends on scheduling.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body);

}  // namespace shen::run
