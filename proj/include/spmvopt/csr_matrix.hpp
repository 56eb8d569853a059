#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace spmvopt {

/// Column and row-pointer index type. Four bytes per index is assumed by the
/// bandwidth bounds; matrices with ncols >= 2^32 or NNZ >= 2^32 are rejected.
using index_t = std::uint32_t;

inline constexpr std::size_t kIndexBytes = sizeof(index_t);
inline constexpr std::size_t kValueBytes = sizeof(double);

/// Compressed sparse row matrix.
///
/// Fields are public so that derived structural clones (used by the bound
/// micro-benchmarks) can be built without going through validation. Code that
/// accepts external input should call validate() before using the matrix.
struct CsrMatrix {
  std::size_t nrows = 0;
  std::size_t ncols = 0;
  std::vector<index_t> rowptr{0};
  std::vector<index_t> colind;
  std::vector<double> values;

  std::size_t nnz() const { return colind.size(); }
  index_t row_length(std::size_t row) const { return rowptr[row + 1] - rowptr[row]; }

  /// Bytes of the CSR arrays: values, column indices and row pointers.
  std::size_t storage_bytes() const {
    return nnz() * (kValueBytes + kIndexBytes) + (nrows + 1) * kIndexBytes;
  }

  static CsrMatrix identity(std::size_t n);
  /// Builds a matrix from a row-major dense array, keeping nonzero entries.
  static CsrMatrix from_dense(std::size_t nrows, std::size_t ncols, const std::vector<double>& dense);
  std::vector<double> to_dense() const;

  friend bool operator==(const CsrMatrix&, const CsrMatrix&) = default;
};

struct Violation {
  std::string what;
  /// Row index or nonzero index, depending on the invariant.
  std::size_t location = 0;
};

/// Returns std::nullopt when every CSR invariant holds, otherwise the first
/// violated invariant.
std::optional<Violation> validate(const CsrMatrix& m);

class InvalidMatrix : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Throws InvalidMatrix describing the first violation, if any.
void require_valid(const CsrMatrix& m);

class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace spmvopt
