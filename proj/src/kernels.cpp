#include "spmvopt/kernels.hpp"

#include <algorithm>
#include <sstream>
#include <type_traits>

#include "spmvopt/parallel.hpp"

namespace spmvopt {
namespace {

inline void prefetch_l1(const double* addr) {
#if defined(__GNUC__) || defined(__clang__)
  __builtin_prefetch(addr, 0, 3);
#else
  (void)addr;
#endif
}

void check_dims(std::size_t nrows, std::size_t ncols, std::span<const double> x, std::span<double> y) {
  if (x.size() != ncols)
    throw DimensionMismatch("x has length " + std::to_string(x.size()) + ", expected ncols=" + std::to_string(ncols));
  if (y.size() != nrows)
    throw DimensionMismatch("y has length " + std::to_string(y.size()) + ", expected nrows=" + std::to_string(nrows));
}

// Sum of val[j] * x[col[j]] over [begin, end). The prefetch target is clamped
// to the last nonzero of the whole matrix, never past the arrays.
template <bool Prefetch, bool Unroll>
inline double csr_row_sum(const double* __restrict val, const index_t* __restrict col, index_t begin, index_t end,
                          const double* __restrict x, index_t last_nz, index_t dist) {
  if constexpr (!Unroll) {
    double sum = 0.0;
    for (index_t j = begin; j < end; ++j) {
      if constexpr (Prefetch) prefetch_l1(x + col[std::min<index_t>(j + dist, last_nz)]);
      sum += val[j] * x[col[j]];
    }
    return sum;
  } else {
    constexpr index_t U = kUnrollFactor;
    double acc[U] = {};
    index_t j = begin;
    for (; j + U <= end; j += U) {
#pragma GCC unroll 16
      for (index_t k = 0; k < U; ++k) {
        if constexpr (Prefetch) prefetch_l1(x + col[std::min<index_t>(j + k + dist, last_nz)]);
        acc[k] += val[j + k] * x[col[j + k]];
      }
    }
    double sum = acc[0];
    for (index_t k = 1; k < U; ++k) sum += acc[k];
    for (; j < end; ++j) {
      if constexpr (Prefetch) prefetch_l1(x + col[std::min<index_t>(j + dist, last_nz)]);
      sum += val[j] * x[col[j]];
    }
    return sum;
  }
}

// Row sum with column indices reconstructed from deltas. delta[begin] is 0,
// so the running column starts at the row's absolute first column. The
// prefetch cursor runs `dist` slots ahead, clamped to the row end.
template <typename Delta, bool Prefetch, bool Unroll>
inline double delta_row_sum(const double* __restrict val, const Delta* __restrict delta, index_t first, index_t begin,
                            index_t end, const double* __restrict x, index_t dist) {
  index_t c = first;
  index_t ahead = begin;
  index_t ahead_col = first;
  auto advance_prefetch = [&](index_t j) {
    if constexpr (Prefetch) {
      const index_t target = std::min<index_t>(j + dist, end - 1);
      while (ahead < target) ahead_col += delta[++ahead];
      prefetch_l1(x + ahead_col);
    }
  };
  if constexpr (!Unroll) {
    double sum = 0.0;
    for (index_t j = begin; j < end; ++j) {
      advance_prefetch(j);
      c += delta[j];
      sum += val[j] * x[c];
    }
    return sum;
  } else {
    constexpr index_t U = kUnrollFactor;
    double acc[U] = {};
    index_t j = begin;
    for (; j + U <= end; j += U) {
      index_t cols[U];
#pragma GCC unroll 16
      for (index_t k = 0; k < U; ++k) {
        c += delta[j + k];
        cols[k] = c;
      }
#pragma GCC unroll 16
      for (index_t k = 0; k < U; ++k) {
        advance_prefetch(j + k);
        acc[k] += val[j + k] * x[cols[k]];
      }
    }
    double sum = acc[0];
    for (index_t k = 1; k < U; ++k) sum += acc[k];
    for (; j < end; ++j) {
      advance_prefetch(j);
      c += delta[j];
      sum += val[j] * x[c];
    }
    return sum;
  }
}

struct ExecConfig {
  Schedule schedule = Schedule::Static;
  const Partition* partition = nullptr;
  std::size_t nthreads = 1;
  std::size_t chunk_rows = kDefaultChunkRows;
};

template <class Body>
void for_rows(std::size_t nrows, const ExecConfig& cfg, std::span<double> busy, Body&& body) {
  if (cfg.schedule == Schedule::Static)
    parallel_for_ranges(*cfg.partition, busy, std::forward<Body>(body));
  else
    parallel_for_dynamic(nrows, cfg.nthreads, cfg.chunk_rows, busy, std::forward<Body>(body));
}

template <bool Prefetch, bool Unroll>
void csr_impl(const CsrMatrix& m, const double* x, double* y, const ExecConfig& cfg, index_t dist,
              std::span<double> busy) {
  const index_t last_nz = m.nnz() == 0 ? 0 : static_cast<index_t>(m.nnz() - 1);
  const double* val = m.values.data();
  const index_t* col = m.colind.data();
  const index_t* rowptr = m.rowptr.data();
  for_rows(m.nrows, cfg, busy, [&](RowRange r) {
    for (std::size_t i = r.begin; i < r.end; ++i)
      y[i] = csr_row_sum<Prefetch, Unroll>(val, col, rowptr[i], rowptr[i + 1], x, last_nz, dist);
  });
}

template <typename Delta, bool Prefetch, bool Unroll>
void delta_impl(const DeltaCsrMatrix& m, const Delta* delta, const double* x, double* y, const ExecConfig& cfg,
                index_t dist, std::span<double> busy) {
  const double* val = m.values.data();
  const index_t* first = m.first_col.data();
  const index_t* rowptr = m.rowptr.data();
  for_rows(m.nrows, cfg, busy, [&](RowRange r) {
    for (std::size_t i = r.begin; i < r.end; ++i)
      y[i] = delta_row_sum<Delta, Prefetch, Unroll>(val, delta, first[i], rowptr[i], rowptr[i + 1], x, dist);
  });
}

// Phase 1: short rows, scheduled like any csr kernel. Phase 2: each long row is
// cut into nthreads contiguous spans; span s goes to thread s. After a
// barrier thread 0 adds the partial sums in span order.
template <bool Prefetch, bool Unroll>
void decomposed_impl(const DecomposedCsrMatrix& m, const double* x, double* y, const ExecConfig& cfg, index_t dist,
                     std::vector<double>& partials, std::span<double> busy) {
  const std::size_t n = cfg.nthreads;
  const std::size_t nlong = m.long_rows.size();
  partials.resize(nlong * n);
  const index_t last_nz = m.nnz() == 0 ? 0 : static_cast<index_t>(m.nnz() - 1);
  const double* val = m.values.data();
  const index_t* col = m.colind.data();
  const index_t* rowptr = m.rowptr.data();
  const index_t* offset = m.offset.data();
  double* part = partials.data();

  std::atomic<std::size_t> next{0};
  for (double& b : busy) b = 0.0;

  auto short_rows = [&](RowRange r) {
    for (std::size_t i = r.begin; i < r.end; ++i)
      y[i] = csr_row_sum<Prefetch, Unroll>(val, col, rowptr[i] + offset[i], rowptr[i + 1] + offset[i], x, last_nz,
                                           dist);
  };
  auto long_spans = [&](std::size_t s) {
    for (std::size_t k = 0; k < nlong; ++k) {
      const index_t row = m.long_rows[k];
      const index_t begin = m.long_row_begin(row);
      const std::size_t len = m.long_row_end(row) - begin;
      const auto sb = static_cast<index_t>(begin + len * s / n);
      const auto se = static_cast<index_t>(begin + len * (s + 1) / n);
      part[k * n + s] = csr_row_sum<Prefetch, Unroll>(val, col, sb, se, x, last_nz, dist);
    }
  };
  auto reduce = [&] {
    for (std::size_t k = 0; k < nlong; ++k) {
      double sum = 0.0;
      for (std::size_t s = 0; s < n; ++s) sum += part[k * n + s];
      y[m.long_rows[k]] = sum;
    }
  };

#pragma omp parallel num_threads(static_cast<int>(n))
  {
    const std::size_t tid = static_cast<std::size_t>(omp_get_thread_num());
    const std::size_t nt = static_cast<std::size_t>(omp_get_num_threads());
    auto t0 = Clock::now();
    if (cfg.schedule == Schedule::Static) {
      for (std::size_t t = tid; t < n; t += nt) short_rows(cfg.partition->ranges[t]);
    } else {
      const std::size_t chunk = std::max<std::size_t>(1, cfg.chunk_rows);
      for (;;) {
        std::size_t b = next.fetch_add(chunk, std::memory_order_relaxed);
        if (b >= m.nrows) break;
        short_rows(RowRange{b, std::min(b + chunk, m.nrows)});
      }
    }
    for (std::size_t s = tid; s < n; s += nt) long_spans(s);
    double elapsed = seconds_since(t0);
#pragma omp barrier
    if (tid == 0) {
      auto t1 = Clock::now();
      reduce();
      elapsed += seconds_since(t1);
    }
    if (!busy.empty() && tid < busy.size()) busy[tid] = elapsed;
  }
}

template <class F>
void with_flags(bool prefetch, bool unroll, F&& f) {
  if (prefetch) {
    if (unroll)
      f(std::true_type{}, std::true_type{});
    else
      f(std::true_type{}, std::false_type{});
  } else {
    if (unroll)
      f(std::false_type{}, std::true_type{});
    else
      f(std::false_type{}, std::false_type{});
  }
}

index_t distance_for(std::size_t line_bytes) {
  return static_cast<index_t>(std::max<std::size_t>(1, prefetch_distance(line_bytes)));
}

}  // namespace

std::string to_string(const KernelId& id) {
  std::string base = id.delta_indices ? "delta" : id.decompose_long_rows ? "decomposed" : "csr";
  if (id.delta_indices && id.decompose_long_rows) base = "delta+decomposed";
  if (id.prefetch) base += "+prefetch";
  base += id.schedule == Schedule::Static ? "/static" : "/dynamic";
  base += id.inner == InnerLoop::Plain ? "/plain" : "/unrolled";
  return base;
}

KernelId parse_kernel_id(const std::string& text) {
  KernelId id;
  std::stringstream ss(text);
  std::string base, schedule = "static", inner = "plain";
  std::getline(ss, base, '/');
  if (std::getline(ss, schedule, '/')) std::getline(ss, inner, '/');
  std::stringstream bs(base);
  for (std::string part; std::getline(bs, part, '+');) {
    if (part == "csr") {
    } else if (part == "delta") {
      id.delta_indices = true;
    } else if (part == "decomposed") {
      id.decompose_long_rows = true;
    } else if (part == "prefetch") {
      id.prefetch = true;
    } else {
      throw std::invalid_argument("unknown kernel feature '" + part + "' in '" + text + "'");
    }
  }
  if (schedule == "static")
    id.schedule = Schedule::Static;
  else if (schedule == "dynamic")
    id.schedule = Schedule::Dynamic;
  else
    throw std::invalid_argument("unknown schedule '" + schedule + "'");
  if (inner == "plain")
    id.inner = InnerLoop::Plain;
  else if (inner == "unrolled")
    id.inner = InnerLoop::Unrolled;
  else
    throw std::invalid_argument("unknown inner loop '" + inner + "'");
  return id;
}

ComposedKernel::ComposedKernel(const KernelId& id, const CsrMatrix& m, const KernelOptions& opts)
    : requested_(id), effective_(id), opts_(opts), nrows_(m.nrows), ncols_(m.ncols), nnz_(m.nnz()) {
  if (!id.valid()) throw InvalidCombination("delta compression and decomposition cannot be combined");
  if (opts_.nthreads < 1) throw std::invalid_argument("nthreads must be >= 1");
  if (id.delta_indices) {
    auto compressed = compress_delta(m);
    if (auto* d = std::get_if<DeltaCsrMatrix>(&compressed)) {
      converted_ = std::move(*d);
    } else {
      effective_.delta_indices = false;
    }
  } else if (id.decompose_long_rows) {
    index_t threshold = opts_.decompose_threshold ? opts_.decompose_threshold : default_decompose_threshold(m);
    auto& d = converted_.emplace<DecomposedCsrMatrix>(decompose(m, threshold));
    partials_.resize(d.long_rows.size() * opts_.nthreads);
  }
  if (std::holds_alternative<std::monostate>(converted_)) csr_ = &m;

  if (auto* d = std::get_if<DecomposedCsrMatrix>(&converted_))
    partition_ = partition_by_nnz(std::span<const index_t>(d->rowptr), opts_.nthreads);
  else
    partition_ = partition_by_nnz(std::span<const index_t>(m.rowptr), opts_.nthreads);
}

void ComposedKernel::run(std::span<const double> x, std::span<double> y, std::span<double> busy) const {
  check_dims(nrows_, ncols_, x, y);
  ExecConfig cfg{effective_.schedule, &partition_, opts_.nthreads, opts_.chunk_rows};
  const index_t dist = distance_for(opts_.cache_line_bytes);
  with_flags(effective_.prefetch, effective_.inner == InnerLoop::Unrolled, [&](auto pf, auto un) {
    constexpr bool P = decltype(pf)::value;
    constexpr bool U = decltype(un)::value;
    if (csr_) {
      csr_impl<P, U>(*csr_, x.data(), y.data(), cfg, dist, busy);
    } else if (auto* d = std::get_if<DeltaCsrMatrix>(&converted_)) {
      if (d->width == DeltaWidth::Bits8)
        delta_impl<std::uint8_t, P, U>(*d, d->deltas8.data(), x.data(), y.data(), cfg, dist, busy);
      else
        delta_impl<std::uint16_t, P, U>(*d, d->deltas16.data(), x.data(), y.data(), cfg, dist, busy);
    } else {
      decomposed_impl<P, U>(std::get<DecomposedCsrMatrix>(converted_), x.data(), y.data(), cfg, dist, partials_,
                            busy);
    }
  });
}

std::unique_ptr<ComposedKernel> compose(const KernelId& id, const CsrMatrix& m, const KernelOptions& opts) {
  return std::make_unique<ComposedKernel>(id, m, opts);
}

void spmv_csr(const CsrMatrix& m, std::span<const double> x, std::span<double> y, const Partition& p) {
  check_dims(m.nrows, m.ncols, x, y);
  ExecConfig cfg{Schedule::Static, &p, p.nthreads()};
  csr_impl<false, false>(m, x.data(), y.data(), cfg, 1, {});
}

void spmv_delta(const DeltaCsrMatrix& m, std::span<const double> x, std::span<double> y, const Partition& p) {
  check_dims(m.nrows, m.ncols, x, y);
  ExecConfig cfg{Schedule::Static, &p, p.nthreads()};
  if (m.width == DeltaWidth::Bits8)
    delta_impl<std::uint8_t, false, false>(m, m.deltas8.data(), x.data(), y.data(), cfg, 1, {});
  else
    delta_impl<std::uint16_t, false, false>(m, m.deltas16.data(), x.data(), y.data(), cfg, 1, {});
}

void spmv_decomposed(const DecomposedCsrMatrix& m, std::span<const double> x, std::span<double> y,
                     const Partition& p) {
  check_dims(m.nrows, m.ncols, x, y);
  ExecConfig cfg{Schedule::Static, &p, p.nthreads()};
  std::vector<double> partials;
  decomposed_impl<false, false>(m, x.data(), y.data(), cfg, 1, partials, {});
}

void spmv_prefetch(const CsrMatrix& m, std::span<const double> x, std::span<double> y, const Partition& p,
                   std::size_t cache_line_bytes) {
  check_dims(m.nrows, m.ncols, x, y);
  ExecConfig cfg{Schedule::Static, &p, p.nthreads()};
  csr_impl<true, false>(m, x.data(), y.data(), cfg, distance_for(cache_line_bytes), {});
}

void spmv_dynamic(const CsrMatrix& m, std::span<const double> x, std::span<double> y, std::size_t nthreads,
                  std::size_t chunk_rows) {
  check_dims(m.nrows, m.ncols, x, y);
  if (nthreads < 1) throw std::invalid_argument("nthreads must be >= 1");
  ExecConfig cfg{Schedule::Dynamic, nullptr, nthreads, chunk_rows};
  csr_impl<false, false>(m, x.data(), y.data(), cfg, 1, {});
}

void spmv_unrolled(const CsrMatrix& m, std::span<const double> x, std::span<double> y, const Partition& p) {
  check_dims(m.nrows, m.ncols, x, y);
  ExecConfig cfg{Schedule::Static, &p, p.nthreads()};
  csr_impl<false, true>(m, x.data(), y.data(), cfg, 1, {});
}

}  // namespace spmvopt
