#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

namespace elastix {

/// Number of worker threads for element loops: hardware concurrency capped
/// by the ELASTIX_THREADS environment variable (>= 1).
int assembly_thread_count();

/// Runs body(i) for i in [0, n). Work is chunked across threads; results must
/// be written to disjoint per-index slots so the outcome is independent of
/// the thread count. Falls back to a serial loop for small n.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

/// Fixed-format scientific repr (17 significant digits) used for all report
/// output; byte-stable across runs.
std::string format_double(double v);

} // namespace elastix
