#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>

#include "spmvopt/benchmark.hpp"
#include "spmvopt/csr_matrix.hpp"
#include "spmvopt/machine_profile.hpp"

namespace spmvopt {

struct BandwidthOptions {
  std::size_t nthreads = 1;
  /// Overrides for the detected cache geometry.
  std::optional<std::size_t> llc_bytes;
  std::optional<std::size_t> cache_line_bytes;
  std::size_t trials = 10;
  /// Upper limit on the main-memory triad working set (all three arrays).
  std::size_t max_main_bytes = std::size_t{2} << 30;
};

class MeasurementError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bytes moved and flops performed per triad element a[i] = b[i] + s*c[i].
inline constexpr double kTriadBytesPerElement = 24.0;
inline constexpr double kTriadFlopsPerElement = 2.0;

/// Best-of-trials triad bandwidth with a working set of at least 4x the LLC
/// (main) and at most half the LLC (llc).
MachineProfile measure_bandwidth(const BandwidthOptions& opts);

/// Best and mean bandwidth (bytes/s) of `trials` triad passes over arrays of
/// `elements` doubles.
struct TriadResult {
  double best = 0.0;
  double mean = 0.0;
};
TriadResult triad_bandwidth(std::size_t elements, std::size_t nthreads, std::size_t trials);

/// Compulsory-miss traffic model of one SpMV, in bytes.
struct TrafficModel {
  double matrix_csr = 0.0;     ///< values + column indices + row pointers
  double matrix_values = 0.0;  ///< values only
  double vectors = 0.0;        ///< x and y, each read or written once
  /// S_CSR + S_x + S_y; decides whether the LLC bandwidth applies.
  double working_set() const { return matrix_csr + vectors; }
};
TrafficModel traffic_model(std::size_t nrows, std::size_t ncols, std::size_t nnz);

bool fits_in_llc(const TrafficModel& t, const MachineProfile& prof);
/// bmax_llc when the working set fits in the LLC, bmax_main otherwise.
double effective_bandwidth(const TrafficModel& t, const MachineProfile& prof);

/// Bandwidth bound of the CSR kernel: all CSR bytes and both vectors moved
/// once at the effective bandwidth.
double p_mb(const CsrMatrix& m, const MachineProfile& prof);
double p_mb(std::size_t nrows, std::size_t ncols, std::size_t nnz, const MachineProfile& prof);

/// Format-independent bound: only the values array and the vectors moved.
double p_peak(const CsrMatrix& m, const MachineProfile& prof);
double p_peak(std::size_t nrows, std::size_t ncols, std::size_t nnz, const MachineProfile& prof);

/// Imbalance bound 2*NNZ / median per-thread busy time.
double p_imb(const TimingResult& timing, std::size_t nnz);

/// Copy of m whose column indices all point at the row's own index (clamped
/// to ncols-1), so accesses to x become regular. Not a valid CsrMatrix when a
/// row holds more than one nonzero.
CsrMatrix regularized_clone(const CsrMatrix& m);

/// Kernel computing y[i] = sum_j values[j] * x[i]. It only holds the row
/// pointers and values, so the column indices are never read.
class ColumnFreeKernel final : public Kernel {
 public:
  ColumnFreeKernel(std::span<const index_t> rowptr, std::span<const double> values, std::size_t ncols,
                   std::size_t nthreads);

  std::size_t nrows() const override { return rowptr_.size() - 1; }
  std::size_t ncols() const override { return ncols_; }
  std::size_t nnz() const override { return values_.size(); }
  std::size_t nthreads() const override { return partition_.nthreads(); }
  void run(std::span<const double> x, std::span<double> y, std::span<double> busy) const override;

 private:
  std::span<const index_t> rowptr_;
  std::span<const double> values_;
  std::size_t ncols_;
  Partition partition_;
};

struct BenchmarkConfig {
  std::size_t nthreads = 1;
  std::size_t runs = kDefaultRuns;
  std::size_t iterations = kDefaultIterations;
};

/// Rate of the csr kernel on regularized_clone(m).
double p_ml(const CsrMatrix& m, const BenchmarkConfig& cfg);
/// Rate of ColumnFreeKernel on m.
double p_cmp(const CsrMatrix& m, const BenchmarkConfig& cfg);

struct BoundsReport {
  double p_csr = 0.0;
  double p_mb = 0.0;
  double p_ml = 0.0;
  double p_imb = 0.0;
  double p_cmp = 0.0;
  double p_peak = 0.0;
  double working_set = 0.0;
  bool fits_in_llc = false;
  double bandwidth_used = 0.0;
  std::size_t index_bytes = kIndexBytes;
  std::size_t nthreads = 1;
  /// Timed kernels: baseline, regularized clone, column-free kernel.
  std::size_t micro_benchmarks = 0;
  /// p_csr, p_ml, p_cmp and p_imb come from timing; p_mb and p_peak are computed.
  TimingResult baseline;
};

/// Full bound-and-bottleneck analysis of one matrix.
BoundsReport profile(const CsrMatrix& m, const MachineProfile& prof, const BenchmarkConfig& cfg);

}  // namespace spmvopt
