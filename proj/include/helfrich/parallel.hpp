#pragma once

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

namespace helfrich {

/// Worker count: HELFRICH_THREADS caps the hardware concurrency.
inline unsigned thread_budget() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("HELFRICH_THREADS")) {
    const long cap = std::strtol(env, nullptr, 10);
    if (cap >= 1) n = std::min(n, static_cast<unsigned>(cap));
  }
  return n;
}

/// Runs body(i) for i in [0, count). Iterations must be independent; each
/// index is processed by exactly one worker so results do not depend on the
/// thread count.
template <typename Body>
void parallel_for(std::size_t count, Body&& body, std::size_t min_chunk = 64) {
  const unsigned workers = static_cast<unsigned>(
      std::min<std::size_t>(thread_budget(), std::max<std::size_t>(1, count / std::max<std::size_t>(min_chunk, 1))));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      const std::size_t lo = count * w / workers, hi = count * (w + 1) / workers;
      for (std::size_t i = lo; i < hi; ++i) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace helfrich
