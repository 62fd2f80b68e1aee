#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace mqrif {

// Resolve a worker-count hint: positive value wins, otherwise the
// MQRIF_THREADS environment variable, otherwise the hardware count.
int resolve_workers(int hint);

// Run fn(i) for i in [0, count).  Work items must write only to their own
// output slot; results are then independent of the schedule, so a run with
// 8 workers is bit-identical to a run with 1.  Exceptions are captured and
// the first one is rethrown after all workers join.
inline void parallel_for(std::size_t count,
                         const std::function<void(std::size_t)>& fn,
                         int workers_hint = 0) {
  const int workers = resolve_workers(workers_hint);
  if (workers <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  const int n_threads = static_cast<int>(
      std::min<std::size_t>(static_cast<std::size_t>(workers), count));
  pool.reserve(static_cast<std::size_t>(n_threads));
  for (int t = 0; t < n_threads; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count || failed.load()) return;
        try {
          fn(i);
        } catch (...) {
          if (!failed.exchange(true)) first_error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failed.load() && first_error) std::rethrow_exception(first_error);
}

}  // namespace mqrif
