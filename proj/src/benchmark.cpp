#include "spmvopt/benchmark.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "spmvopt/parallel.hpp"

namespace spmvopt {

double TimingResult::seconds_per_iteration() const {
  if (run_iteration_seconds.empty()) return 0.0;
  return std::accumulate(run_iteration_seconds.begin(), run_iteration_seconds.end(), 0.0) /
         static_cast<double>(run_iteration_seconds.size());
}

double harmonic_mean(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("harmonic_mean of empty sequence");
  double inv = 0.0;
  for (double v : values) {
    if (!(v >= 0.0)) throw std::invalid_argument("harmonic_mean requires non-negative values");
    if (v == 0.0) return 0.0;
    inv += 1.0 / v;
  }
  return static_cast<double>(values.size()) / inv;
}

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median of empty sequence");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double run_rate(std::size_t nnz, std::size_t iterations, double total_seconds) {
  return 2.0 * static_cast<double>(nnz) * static_cast<double>(iterations) / total_seconds;
}

TimingResult summarize_timing(std::size_t nnz, std::size_t iterations, std::span<const double> run_seconds,
                              const std::vector<std::vector<double>>& run_thread_seconds) {
  if (run_seconds.empty() || iterations == 0) throw std::invalid_argument("summarize_timing: no measurements");
  TimingResult r;
  r.runs = run_seconds.size();
  r.iterations = iterations;
  for (double total : run_seconds) {
    r.run_iteration_seconds.push_back(total / static_cast<double>(iterations));
    r.run_rates.push_back(run_rate(nnz, iterations, total));
  }
  r.rate = harmonic_mean(r.run_rates);
  if (!run_thread_seconds.empty()) {
    const std::size_t nthreads = run_thread_seconds.front().size();
    r.per_thread_times.assign(nthreads, 0.0);
    for (const auto& per_run : run_thread_seconds)
      for (std::size_t t = 0; t < nthreads; ++t) r.per_thread_times[t] += per_run[t];
    const double denom = static_cast<double>(iterations * run_thread_seconds.size());
    for (double& t : r.per_thread_times) t /= denom;
  }
  return r;
}

std::vector<double> benchmark_vector(std::size_t n) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = 1.0 + 0.125 * static_cast<double>(i % 7);
  return x;
}

TimingResult benchmark(const Kernel& kernel, std::size_t runs, std::size_t iterations) {
  if (runs == 0 || iterations == 0) throw std::invalid_argument("benchmark: runs and iterations must be positive");
  const std::vector<double> x = benchmark_vector(kernel.ncols());
  std::vector<double> y(kernel.nrows(), 0.0);
  const std::size_t nthreads = kernel.nthreads();
  std::vector<double> busy(nthreads, 0.0);

  kernel.run(x, y, busy);  // warm-up

  std::vector<double> run_seconds;
  std::vector<std::vector<double>> run_thread_seconds;
  for (std::size_t r = 0; r < runs; ++r) {
    std::vector<double> thread_total(nthreads, 0.0);
    auto t0 = Clock::now();
    for (std::size_t it = 0; it < iterations; ++it) {
      kernel.run(x, y, busy);
      for (std::size_t t = 0; t < nthreads; ++t) thread_total[t] += busy[t];
    }
    double total = seconds_since(t0);
    if (!(total > 0.0)) throw std::runtime_error("benchmark: timer resolution too coarse");
    run_seconds.push_back(total);
    run_thread_seconds.push_back(std::move(thread_total));
  }
  return summarize_timing(kernel.nnz(), iterations, run_seconds, run_thread_seconds);
}

}  // namespace spmvopt
