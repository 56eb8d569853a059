#pragma once

#include <span>
#include <utility>
#include <vector>

#include "spmvopt/csr_matrix.hpp"

namespace spmvopt {

struct RowRange {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const { return end - begin; }
  friend bool operator==(const RowRange&, const RowRange&) = default;
};

/// One contiguous row range per thread; ranges are ordered, disjoint and
/// cover [0, nrows).
struct Partition {
  std::vector<RowRange> ranges;
  std::size_t nthreads() const { return ranges.size(); }
};

/// Static 1-D row partition with approximately NNZ/nthreads nonzeros per
/// thread. Boundary t is the first row whose nonzero prefix reaches
/// t*NNZ/nthreads, so each range is within nnz_max of the ideal share.
/// With more threads than rows the trailing ranges are empty.
Partition partition_by_nnz(std::span<const index_t> rowptr, std::size_t nthreads);
Partition partition_by_nnz(const CsrMatrix& m, std::size_t nthreads);

}  // namespace spmvopt
