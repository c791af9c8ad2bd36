#ifndef FDBREAK_PARALLEL_HPP
#define FDBREAK_PARALLEL_HPP

#include <functional>

namespace fdbreak {

/// Worker count resolution: explicit request > FDBREAK_THREADS > hardware.
int resolve_thread_count(int requested);

/// Runs body(i) for i in [0, count) over contiguous blocks. Workers must write
/// only to their own slots; results are then independent of the worker count.
/// If several iterations throw, the exception from the smallest index wins,
/// which keeps failures deterministic too.
void parallel_for(int count, const std::function<void(int)>& body, int threads = 0);

}  // namespace fdbreak

#endif
