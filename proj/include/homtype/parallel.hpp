#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace homtype {

// Runs fn(i) for i in [0, n) on up to `threads` workers. Callers write results into
// per-index slots, so reductions done afterwards in index order stay deterministic.
template <class F>
void parallel_for(std::size_t n, unsigned threads, F&& fn) {
  unsigned t = std::max(1u, std::min<unsigned>(threads, unsigned(std::min<std::size_t>(n, 256))));
  if (t <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::mutex m;
  std::vector<std::thread> pool;
  for (unsigned k = 0; k < t; ++k)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < n;) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> g(m);
          if (!err) err = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace homtype
