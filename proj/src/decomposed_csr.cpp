#include "spmvopt/decomposed_csr.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace spmvopt {

index_t default_decompose_threshold(const CsrMatrix& m) {
  if (m.nrows == 0) return 1;
  double avg = static_cast<double>(m.nnz()) / static_cast<double>(m.nrows);
  return static_cast<index_t>(std::max(1.0, std::floor(8.0 * avg)));
}

DecomposedCsrMatrix decompose(const CsrMatrix& m, index_t threshold) {
  if (threshold < 1) throw std::invalid_argument("decompose: threshold must be >= 1");
  DecomposedCsrMatrix d;
  d.nrows = m.nrows;
  d.ncols = m.ncols;
  d.threshold = threshold;
  d.colind = m.colind;
  d.values = m.values;
  d.rowptr.assign(m.nrows + 1, 0);
  d.offset.assign(m.nrows + 1, 0);
  for (std::size_t i = 0; i < m.nrows; ++i) {
    index_t len = m.row_length(i);
    bool is_long = len > threshold;
    if (is_long) d.long_rows.push_back(static_cast<index_t>(i));
    d.rowptr[i + 1] = d.rowptr[i] + (is_long ? 0 : len);
    d.offset[i + 1] = d.offset[i] + (is_long ? len : 0);
  }
  return d;
}

CsrMatrix recompose(const DecomposedCsrMatrix& d) {
  CsrMatrix m;
  m.nrows = d.nrows;
  m.ncols = d.ncols;
  m.colind = d.colind;
  m.values = d.values;
  m.rowptr.resize(d.nrows + 1);
  for (std::size_t i = 0; i <= d.nrows; ++i) m.rowptr[i] = d.rowptr[i] + d.offset[i];
  return m;
}

}  // namespace spmvopt
