#pragma once

// Order-stable parallel map. Results land at their task index, so the output
// is identical to a sequential loop regardless of the worker count.

#include <atomic>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace charvar {

/// Worker count: CHARVAR_THREADS if set and positive, else `fallback`, else
/// the hardware concurrency.
inline int worker_count(int fallback = 0) {
  if (const char* env = std::getenv("CHARVAR_THREADS")) {
    try {
      const int v = std::stoi(env);
      if (v > 0) return v;
    } catch (...) {
    }
  }
  if (fallback > 0) return fallback;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 1;
}

template <class F>
auto parallel_map(std::size_t count, F&& task, int threads = 0)
    -> std::vector<decltype(task(std::size_t{}))> {
  using R = decltype(task(std::size_t{}));
  std::vector<R> out(count);
  const int workers = std::min<int>(worker_count(threads), static_cast<int>(count));
  if (workers <= 1) {
    for (std::size_t k = 0; k < count; ++k) out[k] = task(k);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t k = next++; k < count; k = next++) out[k] = task(k);
    });
  for (auto& th : pool) th.join();
  return out;
}

}  // namespace charvar
