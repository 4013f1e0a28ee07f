#pragma once

#include <cstddef>
#include <functional>

namespace sgq {

// Worker count used when a caller passes threads == 0.
unsigned default_threads();

// Runs fn(i) for i in [0, n) on up to `threads` workers. Each index runs
// exactly once; the first exception thrown by any task is rethrown here
// after all workers have joined.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn);

}  // namespace sgq
