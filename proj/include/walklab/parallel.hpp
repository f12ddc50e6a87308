#pragma once

// Replica-level parallelism. Every replica owns an independent RNG stream
// derived from (seed, replica index); results land in a preallocated slot
// and are merged in replica order afterwards, so the output is bit-identical
// for any worker count.

#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace walklab {

inline unsigned worker_count(std::optional<unsigned> requested = std::nullopt) {
  unsigned n = requested.value_or(0);
  if (n == 0) {
    if (const char* env = std::getenv("WALKLAB_THREADS")) {
      const long v = std::strtol(env, nullptr, 10);
      if (v > 0) n = static_cast<unsigned>(v);
    }
  }
  if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
  return n;
}

// fn(replica_index) -> R, executed across `threads` workers.
template <class R, class Fn>
std::vector<R> run_replicas(std::size_t n_replicas, Fn&& fn, unsigned threads) {
  std::vector<R> results(n_replicas);
  if (threads <= 1 || n_replicas <= 1) {
    for (std::size_t i = 0; i < n_replicas; ++i) results[i] = fn(i);
    return results;
  }
  std::atomic<std::size_t> next{0};
  const unsigned n_workers = static_cast<unsigned>(
      std::min<std::size_t>(threads, n_replicas));
  std::vector<std::thread> pool;
  pool.reserve(n_workers);
  for (unsigned w = 0; w < n_workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
        if (i >= n_replicas) return;
        results[i] = fn(i);
      }
    });
  }
  for (std::thread& t : pool) t.join();
  return results;
}

}  // namespace walklab
