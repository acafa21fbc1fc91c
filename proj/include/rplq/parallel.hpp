#pragma once

// Deterministic parallel helpers.
//
// Work items are indexed; each item writes only to its own slot, so the fill
// phase is scheduling-independent.  Reductions then run over the slots in a
// fixed-shape pairwise tree whose structure depends only on the item count,
// never on the number of workers.  Together this makes results bitwise
// identical across thread counts.

#include <cstdlib>
#include <functional>
#include <string>
#include <thread>
#include <vector>

namespace rplq {

inline int default_thread_count() {
  if (const char* env = std::getenv("RPLQ_THREADS")) {
    int v = std::atoi(env);
    if (v >= 1) return v;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs f(i) for i in [0, count) across `threads` workers on contiguous
// chunks.  f must only touch state owned by item i.
template <class F>
void parallel_for(std::size_t count, F&& f, int threads = 0) {
  if (threads <= 0) threads = default_thread_count();
  if (threads == 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) f(i);
    return;
  }
  std::size_t workers = std::min<std::size_t>(threads, count);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::size_t chunk = (count + workers - 1) / workers;
  std::exception_ptr first_error;
  std::mutex error_mutex;
  for (std::size_t w = 0; w < workers; ++w) {
    std::size_t lo = w * chunk;
    std::size_t hi = std::min(count, lo + chunk);
    pool.emplace_back([&, lo, hi] {
      try {
        for (std::size_t i = lo; i < hi; ++i) f(i);
      } catch (...) {
        std::lock_guard<std::mutex> g(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

// Pairwise-tree reduction over [lo, hi).  The split point depends only on
// the range, so the summation order is a pure function of the item count.
template <class T, class Get, class Add>
T pairwise_reduce(std::size_t lo, std::size_t hi, Get&& get, Add&& add) {
  if (hi - lo == 1) return get(lo);
  std::size_t mid = lo + (hi - lo) / 2;
  T left = pairwise_reduce<T>(lo, mid, get, add);
  T right = pairwise_reduce<T>(mid, hi, get, add);
  return add(std::move(left), std::move(right));
}

template <class T, class Add>
T pairwise_reduce(const std::vector<T>& items, Add&& add) {
  return pairwise_reduce<T>(
      0, items.size(), [&](std::size_t i) { return items[i]; }, add);
}

}  // namespace rplq
