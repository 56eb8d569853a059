#include "spmvopt/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "spmvopt/parallel.hpp"

namespace spmvopt {
namespace {

// One triad pass, repeated `reps` times; returns elapsed seconds.
double timed_triad(std::vector<double>& a, const std::vector<double>& b, const std::vector<double>& c, double s,
                   std::size_t reps, int nthreads) {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(a.size());
  double* pa = a.data();
  const double* pb = b.data();
  const double* pc = c.data();
  auto t0 = Clock::now();
  for (std::size_t r = 0; r < reps; ++r) {
#pragma omp parallel for num_threads(nthreads) schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) pa[i] = pb[i] + s * pc[i];
  }
  return seconds_since(t0);
}

}  // namespace

TriadResult triad_bandwidth(std::size_t elements, std::size_t nthreads, std::size_t trials) {
  if (elements == 0 || trials == 0) throw MeasurementError("triad: empty working set or no trials");
  const int nt = static_cast<int>(std::max<std::size_t>(1, nthreads));
  std::vector<double> a(elements), b(elements), c(elements);
  // First touch by the worker threads.
#pragma omp parallel for num_threads(nt) schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(elements); ++i) {
    a[i] = 0.0;
    b[i] = 1.0;
    c[i] = 2.0;
  }

  // Repeat short passes so one trial spans at least a millisecond.
  std::size_t reps = 1;
  double t = timed_triad(a, b, c, 3.0, reps, nt);
  while (t < 1e-3 && reps < (std::size_t{1} << 24)) {
    reps *= 2;
    t = timed_triad(a, b, c, 3.0, reps, nt);
  }

  TriadResult r;
  double sum = 0.0;
  for (std::size_t k = 0; k < trials; ++k) {
    double secs = timed_triad(a, b, c, 3.0, reps, nt);
    if (!(secs > 0.0)) throw MeasurementError("triad: timer resolution too coarse");
    double bw = kTriadBytesPerElement * static_cast<double>(elements) * static_cast<double>(reps) / secs;
    r.best = std::max(r.best, bw);
    sum += bw;
  }
  r.mean = sum / static_cast<double>(trials);
  if (!std::isfinite(r.best) || r.best <= 0.0) throw MeasurementError("triad: no usable measurement");
  return r;
}

MachineProfile measure_bandwidth(const BandwidthOptions& opts) {
  CacheGeometry geo = detect_cache_geometry();
  MachineProfile prof;
  prof.llc_bytes = opts.llc_bytes.value_or(geo.llc_bytes);
  prof.cache_line_bytes = opts.cache_line_bytes.value_or(geo.cache_line_bytes);
  prof.nthreads = std::max<std::size_t>(1, opts.nthreads);
  prof.fingerprint = machine_fingerprint();

  const auto per_element = static_cast<std::size_t>(kTriadBytesPerElement);
  std::size_t main_elements = (4 * prof.llc_bytes + per_element - 1) / per_element;
  main_elements = std::min(main_elements, opts.max_main_bytes / per_element);
  std::size_t llc_elements = std::max<std::size_t>(1, prof.llc_bytes / 2 / per_element);

  prof.bmax_main = triad_bandwidth(main_elements, prof.nthreads, opts.trials).best;
  prof.bmax_llc = triad_bandwidth(llc_elements, prof.nthreads, opts.trials).best;
  // The cache-resident figure only ever adjusts the bound upwards.
  prof.bmax_llc = std::max(prof.bmax_llc, prof.bmax_main);
  return prof;
}

TrafficModel traffic_model(std::size_t nrows, std::size_t ncols, std::size_t nnz) {
  TrafficModel t;
  t.matrix_csr = static_cast<double>(nnz) * (kValueBytes + kIndexBytes) + static_cast<double>(nrows + 1) * kIndexBytes;
  t.matrix_values = static_cast<double>(nnz) * kValueBytes;
  t.vectors = static_cast<double>(ncols) * kValueBytes + static_cast<double>(nrows) * kValueBytes;
  return t;
}

bool fits_in_llc(const TrafficModel& t, const MachineProfile& prof) {
  return t.working_set() <= static_cast<double>(prof.llc_bytes);
}

double effective_bandwidth(const TrafficModel& t, const MachineProfile& prof) {
  return fits_in_llc(t, prof) ? prof.bmax_llc : prof.bmax_main;
}

double p_mb(std::size_t nrows, std::size_t ncols, std::size_t nnz, const MachineProfile& prof) {
  TrafficModel t = traffic_model(nrows, ncols, nnz);
  return 2.0 * static_cast<double>(nnz) / ((t.matrix_csr + t.vectors) / effective_bandwidth(t, prof));
}

double p_mb(const CsrMatrix& m, const MachineProfile& prof) { return p_mb(m.nrows, m.ncols, m.nnz(), prof); }

double p_peak(std::size_t nrows, std::size_t ncols, std::size_t nnz, const MachineProfile& prof) {
  TrafficModel t = traffic_model(nrows, ncols, nnz);
  return 2.0 * static_cast<double>(nnz) / ((t.matrix_values + t.vectors) / effective_bandwidth(t, prof));
}

double p_peak(const CsrMatrix& m, const MachineProfile& prof) { return p_peak(m.nrows, m.ncols, m.nnz(), prof); }

double p_imb(const TimingResult& timing, std::size_t nnz) {
  if (timing.per_thread_times.empty()) throw std::invalid_argument("p_imb: no per-thread times");
  if (nnz == 0) return 0.0;
  double t_median = median(timing.per_thread_times);
  if (!(t_median > 0.0)) throw MeasurementError("p_imb: median thread time is zero");
  return 2.0 * static_cast<double>(nnz) / t_median;
}

CsrMatrix regularized_clone(const CsrMatrix& m) {
  CsrMatrix clone = m;
  const index_t last_col = m.ncols == 0 ? 0 : static_cast<index_t>(m.ncols - 1);
  for (std::size_t i = 0; i < m.nrows; ++i) {
    const index_t col = std::min(static_cast<index_t>(i), last_col);
    std::fill(clone.colind.begin() + m.rowptr[i], clone.colind.begin() + m.rowptr[i + 1], col);
  }
  return clone;
}

ColumnFreeKernel::ColumnFreeKernel(std::span<const index_t> rowptr, std::span<const double> values,
                                   std::size_t ncols, std::size_t nthreads)
    : rowptr_(rowptr), values_(values), ncols_(ncols), partition_(partition_by_nnz(rowptr, nthreads)) {}

void ColumnFreeKernel::run(std::span<const double> x, std::span<double> y, std::span<double> busy) const {
  if (x.size() != ncols_ || y.size() != nrows()) throw DimensionMismatch("column-free kernel: vector length");
  const index_t* rowptr = rowptr_.data();
  const double* val = values_.data();
  const double* xp = x.data();
  double* yp = y.data();
  const std::size_t last = ncols_ == 0 ? 0 : ncols_ - 1;
  parallel_for_ranges(partition_, busy, [&](RowRange r) {
    for (std::size_t i = r.begin; i < r.end; ++i) {
      const double xi = xp[std::min(i, last)];
      double sum = 0.0;
      for (index_t j = rowptr[i]; j < rowptr[i + 1]; ++j) sum += val[j] * xi;
      yp[i] = sum;
    }
  });
}

double p_ml(const CsrMatrix& m, const BenchmarkConfig& cfg) {
  const CsrMatrix clone = regularized_clone(m);
  ComposedKernel kernel(KernelId{}, clone, KernelOptions{.nthreads = cfg.nthreads});
  return benchmark(kernel, cfg.runs, cfg.iterations).rate;
}

double p_cmp(const CsrMatrix& m, const BenchmarkConfig& cfg) {
  ColumnFreeKernel kernel(m.rowptr, m.values, m.ncols, cfg.nthreads);
  return benchmark(kernel, cfg.runs, cfg.iterations).rate;
}

BoundsReport profile(const CsrMatrix& m, const MachineProfile& prof, const BenchmarkConfig& cfg) {
  BoundsReport r;
  r.nthreads = cfg.nthreads;
  TrafficModel t = traffic_model(m.nrows, m.ncols, m.nnz());
  r.working_set = t.working_set();
  r.fits_in_llc = fits_in_llc(t, prof);
  r.bandwidth_used = effective_bandwidth(t, prof);

  ComposedKernel baseline(KernelId{}, m, KernelOptions{.nthreads = cfg.nthreads});
  r.baseline = benchmark(baseline, cfg.runs, cfg.iterations);
  r.p_csr = r.baseline.rate;
  r.p_imb = p_imb(r.baseline, m.nnz());
  r.p_ml = p_ml(m, cfg);
  r.p_cmp = p_cmp(m, cfg);
  r.micro_benchmarks = 3;
  r.p_mb = p_mb(m, prof);
  r.p_peak = p_peak(m, prof);
  return r;
}

}  // namespace spmvopt
