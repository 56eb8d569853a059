#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <span>

#include <omp.h>

#include "spmvopt/partition.hpp"

namespace spmvopt {

using Clock = std::chrono::steady_clock;

inline double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

/// Runs body(range) for every range of `p`, one range per thread. Busy times
/// are written per range when `busy` is nonempty.
template <class Body>
void parallel_for_ranges(const Partition& p, std::span<double> busy, Body&& body) {
  const int n = static_cast<int>(p.nthreads());
  if (n == 1) {
    auto t0 = Clock::now();
    body(p.ranges[0]);
    if (!busy.empty()) busy[0] = seconds_since(t0);
    return;
  }
#pragma omp parallel num_threads(n)
  {
    const int nt = omp_get_num_threads();
    for (int t = omp_get_thread_num(); t < n; t += nt) {
      auto t0 = Clock::now();
      body(p.ranges[t]);
      if (!busy.empty()) busy[t] = seconds_since(t0);
    }
  }
}

/// Self-scheduling loop over [0, nrows): threads claim chunks of rows from a
/// shared counter until none are left.
template <class Body>
void parallel_for_dynamic(std::size_t nrows, std::size_t nthreads, std::size_t chunk, std::span<double> busy,
                          Body&& body) {
  if (chunk == 0) chunk = 1;
  std::atomic<std::size_t> next{0};
  const int n = static_cast<int>(nthreads);
  for (double& b : busy) b = 0.0;
#pragma omp parallel num_threads(n)
  {
    const int tid = omp_get_thread_num();
    auto t0 = Clock::now();
    for (;;) {
      std::size_t begin = next.fetch_add(chunk, std::memory_order_relaxed);
      if (begin >= nrows) break;
      body(RowRange{begin, std::min(begin + chunk, nrows)});
    }
    if (!busy.empty()) busy[tid] = seconds_since(t0);
  }
}

}  // namespace spmvopt
