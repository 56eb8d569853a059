#pragma once

#include <span>
#include <vector>

#include "spmvopt/kernels.hpp"

namespace spmvopt {

inline constexpr std::size_t kDefaultRuns = 5;
inline constexpr std::size_t kDefaultIterations = 128;

/// Warm-cache timing of one kernel.
struct TimingResult {
  /// Harmonic mean of run_rates, in flop/s.
  double rate = 0.0;
  /// Per run: 2*NNZ / mean wall time per iteration, in flop/s.
  std::vector<double> run_rates;
  /// Per run: mean wall time per iteration, in seconds.
  std::vector<double> run_iteration_seconds;
  /// Per thread: busy time per iteration, averaged over iterations and runs.
  std::vector<double> per_thread_times;
  std::size_t runs = 0;
  std::size_t iterations = 0;

  double gflops() const { return rate * 1e-9; }
  /// Mean wall time of one SpMV over all runs.
  double seconds_per_iteration() const;
};

double harmonic_mean(std::span<const double> values);
double median(std::vector<double> values);

/// Rate of one run: 2*NNZ*iterations / total_seconds.
double run_rate(std::size_t nnz, std::size_t iterations, double total_seconds);

/// One untimed warm-up SpMV, then `runs` runs of `iterations` back-to-back
/// SpMVs on the same x and y. Not reentrant.
TimingResult benchmark(const Kernel& kernel, std::size_t runs = kDefaultRuns,
                       std::size_t iterations = kDefaultIterations);

/// Assembles a TimingResult from raw measurements: per-run total seconds and
/// per-run, per-thread summed busy seconds.
TimingResult summarize_timing(std::size_t nnz, std::size_t iterations, std::span<const double> run_seconds,
                              const std::vector<std::vector<double>>& run_thread_seconds);

/// Deterministic input vector used by all benchmarks.
std::vector<double> benchmark_vector(std::size_t n);

}  // namespace spmvopt
