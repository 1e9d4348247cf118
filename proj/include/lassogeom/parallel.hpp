#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace lassogeom {

/// LASSOGEOM_THREADS as a positive integer, or 0 when unset or malformed.
inline unsigned env_worker_cap() {
  if (const char* env = std::getenv("LASSOGEOM_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (...) {
    }
  }
  return 0;
}

/// Worker count: the request if > 0, else hardware concurrency; never above LASSOGEOM_THREADS when set.
inline unsigned resolve_workers(unsigned requested = 0) {
  const unsigned want = requested > 0 ? requested : std::max(1u, std::thread::hardware_concurrency());
  const unsigned cap = env_worker_cap();
  return cap > 0 ? std::min(want, cap) : want;
}

/// Calls body(i) for i in [0, count) across `workers` threads. Tasks are
/// pulled from a shared counter; callers write results into slot i so the
/// output never depends on scheduling. The first exception is rethrown.
template <class Body>
void parallel_for(std::size_t count, unsigned workers, Body&& body) {
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto run = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(count);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(run);
  run();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace lassogeom
