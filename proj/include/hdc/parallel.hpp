#pragma once

#include <cstddef>
#include <functional>

namespace hdc {

/// Worker count from the HDC_THREADS environment variable, falling back to
/// the hardware concurrency. Always at least 1.
int default_thread_count();

/// Runs body(i) for i in [0, n) across a fixed static partition of indices.
/// Each index computes independently and writes only to its own slot, so
/// results are bit-identical for every thread count. Exceptions propagate;
/// when several workers throw, the one from the lowest thread index wins.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body);

}  // namespace hdc
