#include "depnet/parallel.hpp"

namespace depnet {

namespace {
std::atomic<int> g_workers{0};
}

void set_worker_count(int workers) { g_workers.store(workers < 0 ? 0 : workers); }

int worker_count() {
  int w = g_workers.load();
  if (w <= 0) {
    unsigned hc = std::thread::hardware_concurrency();
    w = hc == 0 ? 1 : static_cast<int>(hc);
  }
  return w;
}

void parallel_for_chunks(std::size_t n, std::size_t chunk_size,
                         const std::function<void(std::size_t, std::size_t, std::size_t)>& fn) {
  if (n == 0) return;
  if (chunk_size == 0) chunk_size = 1;
  const std::size_t num_chunks = (n + chunk_size - 1) / chunk_size;
  const int workers = std::min<int>(worker_count(), static_cast<int>(num_chunks));

  if (workers <= 1) {
    for (std::size_t c = 0; c < num_chunks; ++c) {
      const std::size_t b = c * chunk_size;
      fn(c, b, std::min(n, b + chunk_size));
    }
    return;
  }

  std::atomic<std::size_t> next{0};
  auto body = [&] {
    for (;;) {
      const std::size_t c = next.fetch_add(1);
      if (c >= num_chunks) break;
      const std::size_t b = c * chunk_size;
      fn(c, b, std::min(n, b + chunk_size));
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers) - 1);
  for (int t = 1; t < workers; ++t) pool.emplace_back(body);
  body();
  for (auto& th : pool) th.join();
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  const std::size_t chunk = 256;
  parallel_for_chunks(n, chunk, [&](std::size_t, std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) fn(i);
  });
}

}  // namespace depnet
