#pragma once

#include <cstddef>
#include <functional>

namespace plkit {

// Worker cap: PSEUDOLABEL_KIT_THREADS when set to a positive integer,
// otherwise the machine's hardware concurrency (at least 1).
std::size_t worker_count();

// Runs fn(i) for i in [0, n) across at most worker_count() threads in
// contiguous index blocks. fn must not touch shared mutable state except
// through distinct per-index slots; exceptions propagate to the caller.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace plkit
