#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "spmvopt/csr_matrix.hpp"
#include "spmvopt/decomposed_csr.hpp"
#include "spmvopt/delta_csr.hpp"
#include "spmvopt/partition.hpp"

#ifndef SPMVOPT_UNROLL_FACTOR
#define SPMVOPT_UNROLL_FACTOR 4
#endif

namespace spmvopt {

inline constexpr std::size_t kUnrollFactor = SPMVOPT_UNROLL_FACTOR;
inline constexpr std::size_t kDefaultChunkRows = 64;
inline constexpr std::size_t kDefaultCacheLineBytes = 64;

/// Prefetch distance in nonzeros: the number of column indices that fit in
/// one cache line.
constexpr std::size_t prefetch_distance(std::size_t cache_line_bytes) {
  return cache_line_bytes / kIndexBytes;
}

enum class Schedule { Static, Dynamic };
enum class InnerLoop { Plain, Unrolled };

/// A point in the optimization space. delta_indices and decompose_long_rows
/// select mutually exclusive matrix representations; the other switches
/// combine freely with either.
struct KernelId {
  bool delta_indices = false;
  bool decompose_long_rows = false;
  bool prefetch = false;
  Schedule schedule = Schedule::Static;
  InnerLoop inner = InnerLoop::Plain;

  bool valid() const { return !(delta_indices && decompose_long_rows); }
  friend bool operator==(const KernelId&, const KernelId&) = default;
};

/// e.g. "csr/static/plain", "delta+prefetch/static/unrolled".
std::string to_string(const KernelId& id);
KernelId parse_kernel_id(const std::string& text);

class InvalidCombination : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct KernelOptions {
  std::size_t nthreads = 1;
  /// Long-row cutoff for decomposition; 0 selects default_decompose_threshold.
  index_t decompose_threshold = 0;
  std::size_t chunk_rows = kDefaultChunkRows;
  std::size_t cache_line_bytes = kDefaultCacheLineBytes;
};

/// Anything the timing harness can run: y = A*x on a fixed thread count.
class Kernel {
 public:
  virtual ~Kernel() = default;
  virtual std::size_t nrows() const = 0;
  virtual std::size_t ncols() const = 0;
  virtual std::size_t nnz() const = 0;
  virtual std::size_t nthreads() const = 0;
  /// Overwrites y. When `busy` is nonempty it must hold nthreads() entries and
  /// receives each thread's busy time in seconds.
  virtual void run(std::span<const double> x, std::span<double> y, std::span<double> busy) const = 0;

  void operator()(std::span<const double> x, std::span<double> y) const { run(x, y, {}); }
};

/// A kernel variant bound to one matrix. Conversions (delta compression,
/// decomposition, partitioning) happen in the constructor. The source matrix
/// must outlive the kernel when the csr representation is used.
class ComposedKernel final : public Kernel {
 public:
  ComposedKernel(const KernelId& id, const CsrMatrix& m, const KernelOptions& opts);

  std::size_t nrows() const override { return nrows_; }
  std::size_t ncols() const override { return ncols_; }
  std::size_t nnz() const override { return nnz_; }
  std::size_t nthreads() const override { return opts_.nthreads; }
  void run(std::span<const double> x, std::span<double> y, std::span<double> busy) const override;

  const KernelId& requested() const { return requested_; }
  /// Differs from requested() only when delta compression was requested but
  /// the matrix has a delta wider than 16 bits; the kernel then uses csr.
  const KernelId& effective() const { return effective_; }
  const Partition& partition() const { return partition_; }

 private:
  KernelId requested_;
  KernelId effective_;
  KernelOptions opts_;
  std::size_t nrows_ = 0, ncols_ = 0, nnz_ = 0;
  const CsrMatrix* csr_ = nullptr;
  std::variant<std::monostate, DeltaCsrMatrix, DecomposedCsrMatrix> converted_;
  Partition partition_;
  mutable std::vector<double> partials_;
};

/// Builds the kernel implementing every feature of `id` at once.
/// Throws InvalidCombination for delta + decomposition.
std::unique_ptr<ComposedKernel> compose(const KernelId& id, const CsrMatrix& m, const KernelOptions& opts);

// Individual variants. All overwrite y and throw DimensionMismatch when
// x.size() != ncols or y.size() != nrows.

void spmv_csr(const CsrMatrix& m, std::span<const double> x, std::span<double> y, const Partition& p);
void spmv_delta(const DeltaCsrMatrix& m, std::span<const double> x, std::span<double> y, const Partition& p);
/// Phase 1 runs the short rows on `p` (a partition of m.rowptr); phase 2 splits
/// every long row evenly across p.nthreads() threads and reduces the partial
/// sums on one thread.
void spmv_decomposed(const DecomposedCsrMatrix& m, std::span<const double> x, std::span<double> y,
                     const Partition& p);
void spmv_prefetch(const CsrMatrix& m, std::span<const double> x, std::span<double> y, const Partition& p,
                   std::size_t cache_line_bytes = kDefaultCacheLineBytes);
/// Rows are claimed from a shared counter in chunks of `chunk_rows`.
void spmv_dynamic(const CsrMatrix& m, std::span<const double> x, std::span<double> y, std::size_t nthreads,
                  std::size_t chunk_rows = kDefaultChunkRows);
/// Inner loop unrolled by kUnrollFactor with independent accumulators.
void spmv_unrolled(const CsrMatrix& m, std::span<const double> x, std::span<double> y, const Partition& p);

}  // namespace spmvopt
