#pragma once

#include <functional>

namespace magbloch {

// Worker count: MAGBLOCH_THREADS if set to a positive integer, else the hardware concurrency.
int thread_count();

// Runs body(i) for i in [0, n) on thread_count() workers. Each index is handled exactly
// once, so results written per index do not depend on the worker count. The first
// exception thrown by any body is rethrown after all workers join.
void parallel_for(long n, const std::function<void(long)>& body);

}  // namespace magbloch
