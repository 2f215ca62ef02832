#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <thread>
#include <vector>

namespace qct {

// Default slacks for floating-point comparisons: relative for norm-vs-norm
// inequalities, absolute to absorb cancellation near zero.
inline constexpr double kRelSlack = 1e-9;
inline constexpr double kAbsSlack = 1e-12;

/// a <= b up to relative + absolute slack.
inline bool leq_slack(double a, double b, double rel = kRelSlack, double abs = kAbsSlack) {
  return a <= b + rel * std::max(std::abs(a), std::abs(b)) + abs;
}

/// a >= b up to relative + absolute slack.
inline bool geq_slack(double a, double b, double rel = kRelSlack, double abs = kAbsSlack) {
  return a >= b - rel * std::max(std::abs(a), std::abs(b)) - abs;
}

/// Stateless splittable hash; drives all sampling and per-piece seeds so
/// results do not depend on evaluation order or thread count.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Canonical double in [0,1) from 64 random bits (identical on every platform).
inline double canonical_double(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Splits [0,n) into contiguous chunks and folds each on its own thread.
/// `accumulate(state, i)` must touch only its local state; `merge` is applied
/// to the chunk states in ascending chunk order, so any reduction that is
/// insensitive to chunk boundaries (min/max/sum/ordered-append) gives results
/// independent of the thread count.
template <class State, class Accumulate, class Merge>
State parallel_fold(std::uint64_t n, int threads, State init, Accumulate accumulate, Merge merge) {
  threads = std::max(1, threads);
  if (threads == 1 || n < 4096) {
    State s = init;
    for (std::uint64_t i = 0; i < n; ++i) accumulate(s, i);
    return s;
  }
  const std::uint64_t chunks = static_cast<std::uint64_t>(threads);
  std::vector<State> states(chunks, init);
  std::vector<std::thread> pool;
  pool.reserve(chunks);
  for (std::uint64_t c = 0; c < chunks; ++c) {
    const std::uint64_t lo = n * c / chunks;
    const std::uint64_t hi = n * (c + 1) / chunks;
    pool.emplace_back([&states, c, lo, hi, &accumulate] {
      for (std::uint64_t i = lo; i < hi; ++i) accumulate(states[c], i);
    });
  }
  for (auto& t : pool) t.join();
  State out = std::move(states[0]);
  for (std::uint64_t c = 1; c < chunks; ++c) merge(out, states[c]);
  return out;
}

}  // namespace qct
