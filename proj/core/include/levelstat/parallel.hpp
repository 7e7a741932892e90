#pragma once

#include <cstddef>
#include <functional>

namespace levelstat {

/// Worker count taken from the LEVELSTAT_THREADS environment variable, or
/// the hardware concurrency when it is unset. Always at least 1.
std::size_t thread_count();

/// Calls fn(i) once for every i in [0, n), spread over thread_count()
/// threads. Callers write results into per-index slots, so the outcome does
/// not depend on scheduling. If any call throws, the exception from the
/// smallest failing index is rethrown after all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace levelstat
