#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <thread>
#include <vector>

namespace kscore {

/// Worker cap: WPO_SCORE_THREADS if set (>=1), else all hardware threads.
inline int max_threads() {
  if (const char* env = std::getenv("WPO_SCORE_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<int>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

namespace detail {
// Chunk boundaries depend only on n, never on the worker count, so results
// assembled per chunk and reduced in chunk order are bitwise reproducible
// under any WPO_SCORE_THREADS setting.
inline std::int64_t chunk_size_for(std::int64_t n) {
  return std::max<std::int64_t>(1, (n + 255) / 256);
}
}  // namespace detail

/// Runs fn(begin, end) over a fixed deterministic chunking of [0, n).
/// fn must only write to disjoint per-index or per-chunk storage.
template <class Fn>
void parallel_for(std::int64_t n, Fn&& fn) {
  if (n <= 0) return;
  const std::int64_t chunk = detail::chunk_size_for(n);
  const std::int64_t n_chunks = (n + chunk - 1) / chunk;
  const int workers = std::min<std::int64_t>(max_threads(), n_chunks);
  if (workers <= 1) {
    for (std::int64_t c = 0; c < n_chunks; ++c)
      fn(c * chunk, std::min(n, (c + 1) * chunk));
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::int64_t c = w; c < n_chunks; c += workers)
        fn(c * chunk, std::min(n, (c + 1) * chunk));
    });
  }
  for (auto& t : pool) t.join();
}

/// Deterministic map-reduce: per-chunk partials combined sequentially in
/// chunk order regardless of how chunks were scheduled.
template <class T, class ChunkFn, class Combine>
T parallel_reduce(std::int64_t n, T init, ChunkFn&& chunk_fn, Combine&& combine) {
  if (n <= 0) return init;
  const std::int64_t chunk = detail::chunk_size_for(n);
  const std::int64_t n_chunks = (n + chunk - 1) / chunk;
  std::vector<T> partials(static_cast<std::size_t>(n_chunks), init);
  parallel_for(n, [&](std::int64_t begin, std::int64_t end) {
    partials[static_cast<std::size_t>(begin / chunk)] = chunk_fn(begin, end);
  });
  T acc = init;
  for (const T& p : partials) acc = combine(acc, p);
  return acc;
}

}  // namespace kscore
