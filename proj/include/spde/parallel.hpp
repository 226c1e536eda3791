#pragma once

#include <atomic>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace spde {

/// Runs fn(begin, end, block_index) over fixed-size blocks of [0, count).
/// Blocks are claimed atomically by a pool of `threads` workers, but the
/// block decomposition itself never depends on the worker count, so callers
/// that store per-block partials and reduce them in block order get
/// bit-identical results for any thread count.
inline void for_each_block(std::size_t count, std::size_t block_size,
                           int threads,
                           const std::function<void(std::size_t, std::size_t,
                                                    std::size_t)>& fn) {
  if (count == 0) return;
  const std::size_t blocks = (count + block_size - 1) / block_size;
  if (threads <= 1 || blocks == 1) {
    for (std::size_t b = 0; b < blocks; ++b)
      fn(b * block_size, std::min(count, (b + 1) * block_size), b);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t b = next.fetch_add(1); b < blocks; b = next.fetch_add(1))
      fn(b * block_size, std::min(count, (b + 1) * block_size), b);
  };
  std::vector<std::thread> pool;
  const int spawned = std::min<int>(threads, int(blocks));
  pool.reserve(spawned);
  for (int t = 0; t < spawned; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

inline constexpr std::size_t kDefaultBlockSize = 1024;

}  // namespace spde
