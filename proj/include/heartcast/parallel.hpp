#pragma once

#include <cstddef>
#include <functional>

namespace heartcast {

/// Worker count from HEARTCAST_THREADS, else hardware concurrency. Always >= 1.
std::size_t default_thread_count();

/// Runs body(i) for i in [0, n) over up to `threads` workers using static
/// contiguous chunks. body must only write to slots owned by its index.
void parallel_for(std::size_t n, std::size_t threads,
                  const std::function<void(std::size_t)>& body);

}  // namespace heartcast
