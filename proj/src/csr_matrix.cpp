#include "spmvopt/csr_matrix.hpp"

#include <limits>

namespace spmvopt {

CsrMatrix CsrMatrix::identity(std::size_t n) {
  CsrMatrix m;
  m.nrows = n;
  m.ncols = n;
  m.rowptr.resize(n + 1);
  m.colind.resize(n);
  m.values.assign(n, 1.0);
  for (std::size_t i = 0; i <= n; ++i) m.rowptr[i] = static_cast<index_t>(i);
  for (std::size_t i = 0; i < n; ++i) m.colind[i] = static_cast<index_t>(i);
  return m;
}

CsrMatrix CsrMatrix::from_dense(std::size_t nrows, std::size_t ncols, const std::vector<double>& dense) {
  if (dense.size() != nrows * ncols) throw DimensionMismatch("from_dense: array size != nrows*ncols");
  CsrMatrix m;
  m.nrows = nrows;
  m.ncols = ncols;
  m.rowptr.assign(nrows + 1, 0);
  for (std::size_t i = 0; i < nrows; ++i) {
    for (std::size_t j = 0; j < ncols; ++j) {
      double v = dense[i * ncols + j];
      if (v != 0.0) {
        m.colind.push_back(static_cast<index_t>(j));
        m.values.push_back(v);
      }
    }
    m.rowptr[i + 1] = static_cast<index_t>(m.colind.size());
  }
  return m;
}

std::vector<double> CsrMatrix::to_dense() const {
  std::vector<double> dense(nrows * ncols, 0.0);
  for (std::size_t i = 0; i < nrows; ++i)
    for (index_t j = rowptr[i]; j < rowptr[i + 1]; ++j) dense[i * ncols + colind[j]] += values[j];
  return dense;
}

std::optional<Violation> validate(const CsrMatrix& m) {
  if (m.ncols > std::numeric_limits<index_t>::max())
    return Violation{"ncols exceeds 32-bit column index range", 0};
  if (m.rowptr.size() != m.nrows + 1) return Violation{"rowptr length must be nrows+1", m.rowptr.size()};
  if (m.values.size() != m.colind.size()) return Violation{"values and colind lengths differ", m.values.size()};
  if (m.rowptr[0] != 0) return Violation{"rowptr[0] must be 0", 0};
  for (std::size_t i = 0; i < m.nrows; ++i)
    if (m.rowptr[i + 1] < m.rowptr[i]) return Violation{"rowptr nondecreasing", i};
  if (m.rowptr[m.nrows] != m.nnz()) return Violation{"rowptr[nrows] must equal NNZ", m.nrows};
  for (std::size_t i = 0; i < m.nrows; ++i) {
    for (index_t j = m.rowptr[i]; j < m.rowptr[i + 1]; ++j) {
      if (m.colind[j] >= m.ncols) return Violation{"column index out of range", j};
      if (j > m.rowptr[i] && m.colind[j] <= m.colind[j - 1]) {
        return Violation{m.colind[j] == m.colind[j - 1] ? "duplicate entry (strictly increasing columns)"
                                                        : "strictly increasing columns",
                         j};
      }
    }
  }
  return std::nullopt;
}

void require_valid(const CsrMatrix& m) {
  if (auto v = validate(m))
    throw InvalidMatrix("invalid CSR matrix: " + v->what + " at " + std::to_string(v->location));
}

}  // namespace spmvopt
