#pragma once

#include <cstdint>
#include <functional>

namespace fvsim {

/// Run fn(i) for i in [0, n) across up to `workers` threads.
/// Work items must be independent and write to disjoint slots; results are
/// then identical for any worker count. workers <= 1 runs inline.
void parallel_for(int64_t n, int workers, const std::function<void(int64_t)>& fn);

}  // namespace fvsim
