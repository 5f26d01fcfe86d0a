#pragma once

#include <cstddef>
#include <functional>

namespace inversio {

// Worker count: hardware concurrency, capped by INVERSIO_THREADS when set.
std::size_t worker_count();

// Splits [0, n) into contiguous chunks and runs body(begin, end) on each, one
// chunk per worker. Exceptions from workers are rethrown on the caller.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace inversio
