#pragma once

#include <algorithm>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace tmc {

/// Runs body(i) for i in [0, count) on up to `workers` threads, each worker
/// taking a contiguous index range. Results must be written to per-index
/// slots by the body; the partition never affects what any index computes.
/// The first exception thrown by a body is rethrown on the caller.
inline void parallel_for(std::int64_t count, int workers,
                         const std::function<void(std::int64_t)>& body) {
  if (count <= 0) return;
  const int n_workers =
      std::max<std::int64_t>(1, std::min<std::int64_t>(workers, count));
  if (n_workers == 1) {
    for (std::int64_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::mutex error_mutex;
  const std::int64_t chunk = (count + n_workers - 1) / n_workers;
  for (int w = 0; w < n_workers; ++w) {
    const std::int64_t begin = w * chunk;
    const std::int64_t end = std::min(count, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&, begin, end] {
      try {
        for (std::int64_t i = begin; i < end; ++i) body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace tmc
