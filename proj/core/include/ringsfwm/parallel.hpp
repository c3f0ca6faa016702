#pragma once

#include <cstddef>
#include <functional>

namespace ringsfwm {

/// Worker count: RINGSFWM_THREADS if set to a positive integer, otherwise
/// the hardware concurrency (at least 1).
std::size_t thread_count();

/// Calls body(i) for i in [0, n) across up to thread_count() threads.
/// Iterations must write disjoint outputs. The first exception thrown by
/// any iteration is rethrown on the calling thread.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace ringsfwm
