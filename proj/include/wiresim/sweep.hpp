#pragma once

#include <functional>

namespace wiresim {

// Runs fn(i) for i in [0, n) on up to `jobs` worker threads (jobs <= 1 or
// n <= 1 runs inline). Results must be written to pre-sized slots indexed by
// i so the output order is the grid order, independent of scheduling.
void parallel_for_indexed(int n, int jobs, const std::function<void(int)>& fn);

}  // namespace wiresim
