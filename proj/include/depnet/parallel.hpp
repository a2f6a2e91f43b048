#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace depnet {

/// Process-wide worker count; 0 means hardware concurrency.
void set_worker_count(int workers);
int worker_count();

/// Runs fn(begin..end) over fixed-size chunks. Chunk boundaries depend only
/// on the range, never on the worker count, so any per-chunk partial results
/// merged in chunk order are identical for every worker count.
void parallel_for_chunks(std::size_t n, std::size_t chunk_size,
                         const std::function<void(std::size_t chunk_index, std::size_t begin,
                                                  std::size_t end)>& fn);

/// Convenience: one call per index, chunked internally.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace depnet
