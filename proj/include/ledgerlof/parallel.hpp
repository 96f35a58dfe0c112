#pragma once

#include "types.hpp"

#include <algorithm>
#include <exception>
#include <thread>
#include <vector>

namespace ledgerlof {

/// 0 means "one per available core".
inline unsigned resolve_threads(unsigned requested)
{
  if (requested > 0) { return requested; }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs body(begin, end) over contiguous chunks of [0, n). Chunk boundaries
/// depend only on n and the thread count; bodies must write disjoint outputs.
template <typename Body> void parallel_for(Index n, unsigned threads, Body &&body)
{
  threads = resolve_threads(threads);
  if (threads <= 1 || n < 2 * static_cast<Index>(threads)) {
    body(Index{0}, n);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  Index const chunk = (n + threads - 1) / threads;
  for (unsigned t = 0; t < threads; ++t) {
    Index const begin = std::min(n, chunk * t);
    Index const end = std::min(n, begin + chunk);
    pool.emplace_back([&, t, begin, end] {
      try {
        body(begin, end);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto &th : pool) { th.join(); }
  for (auto const &e : errors) {
    if (e) { std::rethrow_exception(e); }
  }
}

} // namespace ledgerlof
