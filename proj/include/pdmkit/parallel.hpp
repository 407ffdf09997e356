#pragma once

#include <cstddef>
#include <functional>

namespace pdmkit {

/// Worker count: PDMKIT_THREADS when set to a positive integer, otherwise
/// the hardware concurrency.
std::size_t worker_count();

/// Runs body(i) for i in [0, count) on up to `workers` threads (0 selects
/// worker_count()). Results must be written to per-index storage. If any call
/// throws, the exception of the lowest failing index is rethrown.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body,
                  std::size_t workers = 0);

}  // namespace pdmkit
