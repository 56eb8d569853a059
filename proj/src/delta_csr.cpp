#include "spmvopt/delta_csr.hpp"

#include <algorithm>

namespace spmvopt {

std::size_t DeltaCsrMatrix::storage_bytes() const {
  return values.size() * kValueBytes + deltas8.size() + deltas16.size() * 2 + first_col.size() * kIndexBytes +
         rowptr.size() * kIndexBytes;
}

std::uint64_t max_row_delta(const CsrMatrix& m) {
  std::uint64_t max_delta = 0;
  for (std::size_t i = 0; i < m.nrows; ++i)
    for (index_t j = m.rowptr[i] + 1; j < m.rowptr[i + 1]; ++j)
      max_delta = std::max<std::uint64_t>(max_delta, m.colind[j] - m.colind[j - 1]);
  return max_delta;
}

namespace {

template <typename Delta>
std::vector<Delta> encode(const CsrMatrix& m) {
  std::vector<Delta> deltas(m.nnz(), 0);
  for (std::size_t i = 0; i < m.nrows; ++i)
    for (index_t j = m.rowptr[i] + 1; j < m.rowptr[i + 1]; ++j)
      deltas[j] = static_cast<Delta>(m.colind[j] - m.colind[j - 1]);
  return deltas;
}

}  // namespace

std::variant<DeltaCsrMatrix, NotCompressible> compress_delta(const CsrMatrix& m) {
  const std::uint64_t max_delta = max_row_delta(m);
  if (max_delta >= (1u << 16)) return NotCompressible{max_delta};

  DeltaCsrMatrix d;
  d.nrows = m.nrows;
  d.ncols = m.ncols;
  d.rowptr = m.rowptr;
  d.values = m.values;
  d.first_col.resize(m.nrows);
  for (std::size_t i = 0; i < m.nrows; ++i)
    d.first_col[i] = m.rowptr[i] == m.rowptr[i + 1] ? static_cast<index_t>(m.ncols) : m.colind[m.rowptr[i]];
  if (max_delta < (1u << 8)) {
    d.width = DeltaWidth::Bits8;
    d.deltas8 = encode<std::uint8_t>(m);
  } else {
    d.width = DeltaWidth::Bits16;
    d.deltas16 = encode<std::uint16_t>(m);
  }
  return d;
}

CsrMatrix decompress_delta(const DeltaCsrMatrix& d) {
  CsrMatrix m;
  m.nrows = d.nrows;
  m.ncols = d.ncols;
  m.rowptr = d.rowptr;
  m.values = d.values;
  m.colind.resize(d.nnz());
  for (std::size_t i = 0; i < d.nrows; ++i) {
    index_t col = d.first_col[i];
    for (index_t j = d.rowptr[i]; j < d.rowptr[i + 1]; ++j) {
      col += d.width == DeltaWidth::Bits8 ? d.deltas8[j] : d.deltas16[j];
      m.colind[j] = col;
    }
  }
  return m;
}

}  // namespace spmvopt
