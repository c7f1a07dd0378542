#pragma once

#include <cstddef>
#include <functional>

namespace muskat {

// Worker count used by data-parallel loops; 1 runs inline.
void set_thread_count(int n);
int thread_count();

// Calls body(k) for k in [0, n), splitting contiguous chunks across workers.
// Each index is handled exactly once, so results that depend only on k are
// independent of the worker count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace muskat
