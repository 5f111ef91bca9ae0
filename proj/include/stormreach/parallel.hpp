#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace stormreach {

/// Process-wide worker count used by the parallel loops (>= 1).
int worker_threads();
void set_worker_threads(int n);

/// Runs body(i) for i in [begin, end) over contiguous chunks. Each index must write
/// only its own outputs; the first exception thrown by any worker is rethrown.
template <class Body>
void parallel_for(std::size_t begin, std::size_t end, Body&& body) {
  const std::size_t n = end > begin ? end - begin : 0;
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(worker_threads()), n);
  if (workers <= 1) {
    for (std::size_t i = begin; i < end; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        const std::size_t lo = begin + w * chunk;
        const std::size_t hi = std::min(end, lo + chunk);
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

}  // namespace stormreach
