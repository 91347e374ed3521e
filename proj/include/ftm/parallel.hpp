#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace ftm {

/// 0 means "one per hardware thread".
inline std::size_t resolve_threads(std::size_t requested) {
  if (requested != 0) return requested;
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

/// Splits [0, n) into contiguous chunks and calls fn(begin, end, chunk) for each. Chunk boundaries
/// depend only on n and the chunk count, so callers that merge per-chunk results in chunk order get
/// output independent of scheduling. Rethrows the first exception by chunk order.
template <typename Fn>
void parallel_chunks(std::size_t n, std::size_t threads, std::size_t chunks, Fn&& fn) {
  if (n == 0 || chunks == 0) return;
  chunks = std::min(chunks, n);
  threads = std::min(resolve_threads(threads), chunks);
  auto bounds = [&](std::size_t c) { return std::pair<std::size_t, std::size_t>(n * c / chunks, n * (c + 1) / chunks); };
  if (threads <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) {
      auto [b, e] = bounds(c);
      fn(b, e, c);
    }
    return;
  }
  std::vector<std::exception_ptr> errors(chunks);
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      for (std::size_t c = t; c < chunks; c += threads) {
        try {
          auto [b, e] = bounds(c);
          fn(b, e, c);
        } catch (...) {
          errors[c] = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

/// Maps every index in [0, n) to a vector of results and concatenates them in index order.
template <typename T, typename Fn>
std::vector<T> parallel_collect(std::size_t n, std::size_t threads, Fn&& fn) {
  const std::size_t chunks = std::min<std::size_t>(n, resolve_threads(threads) * 8);
  std::vector<std::vector<T>> parts(chunks);
  parallel_chunks(n, threads, chunks, [&](std::size_t b, std::size_t e, std::size_t c) {
    for (std::size_t i = b; i < e; ++i) fn(i, parts[c]);
  });
  std::vector<T> out;
  std::size_t total = 0;
  for (auto& p : parts) total += p.size();
  out.reserve(total);
  for (auto& p : parts) std::move(p.begin(), p.end(), std::back_inserter(out));
  return out;
}

}  // namespace ftm
