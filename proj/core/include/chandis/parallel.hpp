#pragma once

#include <cstddef>
#include <functional>

namespace chandis {

/// Worker count: CHANDIS_THREADS if set and positive, else hardware concurrency.
std::size_t worker_count();

/// Runs body(i) for i in [0, n) on up to `workers` threads.
///
/// Callers write results into slot i of a pre-sized container, so output order
/// never depends on scheduling. The first exception thrown by any task is
/// rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body,
                  std::size_t workers = worker_count());

}  // namespace chandis
