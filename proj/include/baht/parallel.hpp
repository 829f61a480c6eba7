#pragma once

#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace baht {

// Worker cap: BAHT_THREADS if set to a positive integer, else the hardware
// concurrency. Malformed values fall back to the hardware count.
inline int thread_budget() {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw < 1) hw = 1;
  const char* env = std::getenv("BAHT_THREADS");
  if (!env) return hw;
  int v = std::atoi(env);
  if (v < 1) return hw;
  return v < 256 ? v : 256;
}

// Runs fn(i) for i in [0, count) on up to thread_budget() workers. Each index
// owns its output slot, so results are identical to the serial order no
// matter how indices are scheduled. The first exception wins and is rethrown.
template <typename Fn>
void parallel_for_index(int count, Fn&& fn) {
  if (count <= 0) return;
  int workers = thread_budget();
  if (workers > count) workers = count;
  if (workers <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        int i = next.fetch_add(1);
        if (i >= count || failed.load()) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          failed.store(true);
          return;
        }
      }
    });
  }
  for (std::thread& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace baht
