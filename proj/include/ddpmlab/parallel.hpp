#pragma once

#include <cstddef>
#include <functional>

namespace ddpmlab {

// Process-wide worker cap for data-parallel loops (the CLI --workers flag).
// Results are required to be byte-identical for any worker count: work is
// split into chunks whose boundaries depend only on (n, grain), each chunk
// writes a disjoint output slice, and cross-chunk reductions are combined in
// chunk-index order by the caller.
void set_workers(std::size_t n);
std::size_t workers();

// Runs fn(begin, end) over [0, n) in chunks of at most `grain` items.
// Executes inline when n <= grain or only one worker is configured.
void parallel_for(std::size_t n, std::size_t grain,
                  const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace ddpmlab
