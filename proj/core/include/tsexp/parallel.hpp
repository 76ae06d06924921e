#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace tsexp {

// Run body(i) for i in [0, n) on up to `threads` workers. Each index owns its
// output slot and all randomness is derived from the index, so results do not
// depend on the thread count or on scheduling. The first exception thrown by
// any worker is rethrown on the caller.
inline void parallel_for(std::size_t n, unsigned threads,
                         const std::function<void(std::size_t)>& body) {
  if (n == 0) return;
  if (threads <= 1 || n == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  const std::size_t chunk = std::max<std::size_t>(1, n / (workers * std::size_t{8}));

  std::atomic<std::size_t> cursor{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned k = 0; k < workers; ++k) {
    pool.emplace_back([&]() {
      for (;;) {
        const std::size_t begin = cursor.fetch_add(chunk);
        if (begin >= n || failed.load()) return;
        const std::size_t end = std::min(n, begin + chunk);
        try {
          for (std::size_t i = begin; i < end; ++i) body(i);
        } catch (...) {
          if (!failed.exchange(true)) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failed.load()) std::rethrow_exception(error);
}

}  // namespace tsexp
