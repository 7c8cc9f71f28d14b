#pragma once

#include <cstddef>
#include <functional>

namespace nfwaves {

/// Worker count: hardware concurrency, capped by NFWAVES_THREADS when set.
unsigned worker_count();

/// Runs f(i) for i in [0, n) on worker_count() threads. Each index is
/// touched exactly once; the first exception is rethrown after all workers
/// have joined.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& f);

}  // namespace nfwaves
