#pragma once

#include <cstddef>
#include <functional>

namespace fracschro {

// Worker count: FRACSCHRO_THREADS if set (>= 1), else hardware concurrency.
int thread_count();

// Runs body(i) for i in [0, n). Results must be written to per-index slots;
// callers reduce them in index order so output does not depend on scheduling.
// Nested calls run serially.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace fracschro
