#pragma once

#include <cstddef>
#include <functional>

namespace swistab {

/// Caps the number of worker threads used by parallel_for (0 = hardware concurrency).
void set_thread_count(std::size_t threads);
std::size_t thread_count();

/// Runs body(i) for i in [0, n) over contiguous chunks on up to thread_count()
/// workers. Callers write results into per-index slots, so any reduction done
/// afterwards in index order is deterministic. The first exception thrown by
/// a worker is rethrown on the calling thread.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace swistab
