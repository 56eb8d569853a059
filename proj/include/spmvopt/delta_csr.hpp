#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "spmvopt/csr_matrix.hpp"

namespace spmvopt {

enum class DeltaWidth : std::uint8_t { Bits8 = 8, Bits16 = 16 };

/// CSR with column indices stored as per-row deltas.
///
/// Each nonempty row keeps its first column absolute in `first_col`; the
/// following columns are reconstructed by adding deltas. Delta slots are laid
/// out one per nonzero so the slot of nonzero j is j; the slot of a row's first
/// nonzero holds 0. Empty rows carry first_col == ncols, which is never read.
/// Exactly one of `deltas8` / `deltas16` is populated, matching `width`.
struct DeltaCsrMatrix {
  std::size_t nrows = 0;
  std::size_t ncols = 0;
  std::vector<index_t> rowptr{0};
  std::vector<index_t> first_col;
  std::vector<std::uint8_t> deltas8;
  std::vector<std::uint16_t> deltas16;
  std::vector<double> values;
  DeltaWidth width = DeltaWidth::Bits8;

  std::size_t nnz() const { return values.size(); }
  std::size_t storage_bytes() const;
};

struct NotCompressible {
  /// Largest within-row delta, which does not fit in 16 bits.
  std::uint64_t max_delta = 0;
};

/// Largest within-row column delta (0 when no row has two nonzeros).
std::uint64_t max_row_delta(const CsrMatrix& m);

/// Chooses width 8 when every within-row delta is < 256, width 16 when every
/// delta is < 65536, and otherwise reports the matrix as not compressible.
std::variant<DeltaCsrMatrix, NotCompressible> compress_delta(const CsrMatrix& m);

/// Inverse of compress_delta.
CsrMatrix decompress_delta(const DeltaCsrMatrix& d);

}  // namespace spmvopt
