#pragma once

#include <vector>

#include "spmvopt/csr_matrix.hpp"

namespace spmvopt {

/// CSR split into short rows and long rows (rows with more than `threshold`
/// nonzeros). The colind/values streams are the original ones, so long-row
/// nonzeros stay in place:
///
///   rowptr[i]  counts only short-row nonzeros before row i
///   offset[i]  counts long-row nonzeros before row i
///   rowptr[i] + offset[i] == original rowptr[i]
///
/// Short row i occupies [rowptr[i] + offset[i], rowptr[i+1] + offset[i]); long
/// row r occupies [rowptr[r] + offset[r], rowptr[r] + offset[r+1]).
struct DecomposedCsrMatrix {
  std::size_t nrows = 0;
  std::size_t ncols = 0;
  std::vector<index_t> rowptr{0};
  std::vector<index_t> offset{0};
  std::vector<index_t> long_rows;
  std::vector<index_t> colind;
  std::vector<double> values;
  index_t threshold = 0;

  std::size_t nnz() const { return values.size(); }
  index_t long_row_begin(index_t row) const { return rowptr[row] + offset[row]; }
  index_t long_row_end(index_t row) const { return rowptr[row] + offset[row + 1]; }
};

/// Default long-row cutoff: 8 x the mean row length (at least 1).
index_t default_decompose_threshold(const CsrMatrix& m);

/// Marks rows with more than `threshold` nonzeros as long. threshold >= 1.
DecomposedCsrMatrix decompose(const CsrMatrix& m, index_t threshold);

/// Inverse of decompose, used by tests.
CsrMatrix recompose(const DecomposedCsrMatrix& d);

}  // namespace spmvopt
