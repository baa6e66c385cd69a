#pragma once

#include <cstddef>
#include <functional>

namespace mppctl {

/// Worker count used by Monte Carlo loops. Results never depend on it.
void set_thread_count(unsigned n);
unsigned thread_count();

/// Calls fn(i) for i in [0, n), split into contiguous blocks across workers.
/// fn must only write to slot i of caller-owned storage.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace mppctl
