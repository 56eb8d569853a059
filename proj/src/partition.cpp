#include "spmvopt/partition.hpp"

#include <algorithm>
#include <span>
#include <stdexcept>

namespace spmvopt {

Partition partition_by_nnz(std::span<const index_t> rowptr, std::size_t nthreads) {
  if (nthreads < 1) throw std::invalid_argument("partition_by_nnz: nthreads must be >= 1");
  if (rowptr.empty()) throw std::invalid_argument("partition_by_nnz: empty rowptr");
  const std::size_t nrows = rowptr.size() - 1;
  const std::uint64_t nnz = rowptr[nrows] - rowptr[0];

  Partition p;
  p.ranges.resize(nthreads);
  std::size_t begin = 0;
  for (std::size_t t = 0; t < nthreads; ++t) {
    std::size_t end = nrows;
    if (t + 1 < nthreads) {
      // First row boundary k >= begin with (rowptr[k]-rowptr[0]) * nthreads >= (t+1) * nnz.
      const std::uint64_t goal = (t + 1) * nnz;
      auto it = std::lower_bound(rowptr.begin() + static_cast<std::ptrdiff_t>(begin), rowptr.end(), goal,
                                 [&](index_t v, std::uint64_t g) {
                                   return static_cast<std::uint64_t>(v - rowptr[0]) * nthreads < g;
                                 });
      end = std::min<std::size_t>(nrows, static_cast<std::size_t>(it - rowptr.begin()));
      // A matrix without nonzeros is split by rows.
      if (nnz == 0) end = std::max(begin, nrows * (t + 1) / nthreads);
    }
    p.ranges[t] = {begin, end};
    begin = end;
  }
  return p;
}

Partition partition_by_nnz(const CsrMatrix& m, std::size_t nthreads) {
  return partition_by_nnz(std::span<const index_t>(m.rowptr), nthreads);
}

}  // namespace spmvopt
