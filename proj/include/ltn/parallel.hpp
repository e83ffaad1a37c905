#pragma once

#include <cstddef>
#include <functional>

namespace ltn {

/// Worker cap used when a call passes threads = 0. Defaults to the hardware
/// concurrency.
unsigned default_threads();
void set_default_threads(unsigned threads);

/// Runs body(i) for i in [0, count) on up to `threads` workers (0 = default).
/// Indices are handed out in contiguous chunks; the first exception thrown by
/// any worker is rethrown after all workers have joined.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body,
                  unsigned threads = 0);

}  // namespace ltn
