#pragma once

#include <cstddef>
#include <exception>
#include <functional>

namespace polishsense {

/// Worker cap from POLISHSENSE_THREADS, else hardware concurrency (>= 1).
std::size_t worker_count();

/// Runs body(i) for i in [0, n) on up to `workers` threads. Each index is
/// visited exactly once; callers write results into slot i so output order
/// never depends on scheduling. The exception from the lowest failing index is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body,
                  std::size_t workers = worker_count());

}  // namespace polishsense
