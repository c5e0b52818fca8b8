#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace truncbound {

namespace detail {
inline std::atomic<unsigned>& thread_cap() {
  static std::atomic<unsigned> cap{0};
  return cap;
}
}  // namespace detail

/// Caps data-parallel stages. 0 restores the default (all hardware threads).
inline void set_thread_count(unsigned n) { detail::thread_cap().store(n); }

inline unsigned thread_count() {
  unsigned cap = detail::thread_cap().load();
  if (cap == 0) cap = std::max(1u, std::thread::hardware_concurrency());
  return cap;
}

/// Runs body(i) for i in [0, n). Work is split into contiguous chunks; each
/// index is processed exactly once, so results written per index do not
/// depend on the thread count. If any body throws, the exception from the
/// lowest failing index is rethrown, matching the sequential loop.
template <typename Body>
void parallel_for(std::size_t n, Body&& body) {
  const std::size_t workers =
      std::min<std::size_t>(thread_count(), n == 0 ? 1 : n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t lo = w * chunk;
    const std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&, w, lo, hi] {
      try {
        for (std::size_t i = lo; i < hi; ++i) body(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace truncbound
