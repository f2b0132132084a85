#pragma once

#include <cstddef>
#include <functional>

namespace gfstop {

/// Worker cap: the GFSTOP_THREADS environment variable when set, otherwise
/// the hardware concurrency.
std::size_t max_workers();

/// Runs fn(i) for i in [0, n) on up to max_workers() threads. Exceptions
/// from workers are rethrown on the calling thread. fn must be safe to call
/// concurrently for distinct i.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace gfstop
