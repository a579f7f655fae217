#pragma once

#include <cstddef>
#include <functional>

namespace passmat {

/// Worker count: hardware concurrency, capped by the PASSMAT_THREADS
/// environment variable when it holds a positive integer.
int max_threads();

/// Runs body(i) for i in [0, n) on up to max_threads() threads. Each index is
/// visited exactly once; the first exception thrown by any body is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace passmat
