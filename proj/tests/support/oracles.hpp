#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "spmvopt/csr_matrix.hpp"
#include "spmvopt/features.hpp"
#include "spmvopt/generator.hpp"
#include "spmvopt/kernels.hpp"

namespace testsupport {

using spmvopt::CsrMatrix;

// Plain O(nrows*ncols) matvec over the dense expansion.
inline std::vector<double> dense_matvec(const CsrMatrix& m, const std::vector<double>& x) {
  const std::vector<double> a = m.to_dense();
  std::vector<double> y(m.nrows, 0.0);
  for (std::size_t i = 0; i < m.nrows; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < m.ncols; ++j) s += a[i * m.ncols + j] * x[j];
    y[i] = s;
  }
  return y;
}

// Per-row sum of |a_ij * x_j|, the natural scale of the rounding error of y_i.
inline std::vector<double> abs_row_scale(const CsrMatrix& m, const std::vector<double>& x) {
  std::vector<double> s(m.nrows, 0.0);
  for (std::size_t i = 0; i < m.nrows; ++i)
    for (auto j = m.rowptr[i]; j < m.rowptr[i + 1]; ++j) s[i] += std::abs(m.values[j] * x[m.colind[j]]);
  return s;
}

// Largest componentwise error |y - ref| / scale (0 where both are exact zeros).
inline double max_relative_error(const std::vector<double>& y, const std::vector<double>& ref,
                                 const std::vector<double>& scale) {
  double worst = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double diff = std::abs(y[i] - ref[i]);
    if (diff == 0.0) continue;
    worst = std::max(worst, scale[i] > 0.0 ? diff / scale[i] : INFINITY);
  }
  return worst;
}

inline std::vector<double> random_vector(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  std::vector<double> x(n);
  for (double& v : x) v = d(rng);
  return x;
}

struct NamedCase {
  std::string name;
  CsrMatrix matrix;
};

// Mixed generated matrices: every generator kind, shapes from 1x1 up to
// max_dim x max_dim, some rectangular.
inline std::vector<NamedCase> generated_cases(std::size_t count, std::uint64_t seed, std::size_t max_dim = 2000) {
  using spmvopt::GeneratorKind;
  using spmvopt::GeneratorSpec;
  std::mt19937_64 rng(seed);
  auto pick = [&](std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(rng); };
  std::vector<NamedCase> out;
  for (std::size_t k = 0; k < count; ++k) {
    GeneratorSpec s;
    s.kind = static_cast<GeneratorKind>(k % 4);
    s.seed = rng();
    // Log-uniform sizes so small edge cases are as common as large ones.
    const double t = count > 1 ? static_cast<double>(k) / static_cast<double>(count - 1) : 1.0;
    std::size_t dim = static_cast<std::size_t>(std::lround(std::pow(static_cast<double>(max_dim), t)));
    if (k + 4 >= count) dim = max_dim;
    dim = std::clamp<std::size_t>(dim, 1, max_dim);
    s.nrows = dim;
    s.ncols = (k % 5 == 3) ? std::max<std::size_t>(1, dim / 2 + pick(0, dim)) : dim;
    const std::size_t cells = s.nrows * s.ncols;
    switch (s.kind) {
      case GeneratorKind::Banded: {
        s.bandwidth = 2 * pick(0, 6) + 1;
        std::size_t half = s.bandwidth / 2, cap = 0;
        for (std::size_t i = 0; i < s.nrows; ++i) {
          std::size_t lo = i > half ? i - half : 0, hi = std::min(s.ncols, i + half + 1);
          if (hi > lo) cap += hi - lo;
        }
        s.target_nnz = cap == 0 ? 0 : pick(cap / 2, cap);
        break;
      }
      case GeneratorKind::UniformRandom:
        s.target_nnz = std::min(cells, pick(0, 12) * s.nrows + pick(0, 3));
        break;
      case GeneratorKind::PowerLawRows:
        s.exponent = 0.5 + 0.5 * static_cast<double>(pick(0, 4));
        s.target_nnz = std::min(cells, pick(1, 12) * s.nrows);
        break;
      case GeneratorKind::BlockDense:
        s.block_size = pick(1, 8);
        s.target_nnz = std::min(cells, pick(1, 20) * s.nrows);
        break;
    }
    out.push_back({"gen:" + spmvopt::format_generator_spec(s), spmvopt::generate(s)});
  }
  return out;
}

// Every valid KernelId.
inline std::vector<spmvopt::KernelId> all_kernel_ids() {
  using namespace spmvopt;
  std::vector<KernelId> ids;
  for (int rep = 0; rep < 3; ++rep)
    for (bool pf : {false, true})
      for (Schedule sch : {Schedule::Static, Schedule::Dynamic})
        for (InnerLoop in : {InnerLoop::Plain, InnerLoop::Unrolled}) {
          KernelId id;
          id.delta_indices = rep == 1;
          id.decompose_long_rows = rep == 2;
          id.prefetch = pf;
          id.schedule = sch;
          id.inner = in;
          ids.push_back(id);
        }
  return ids;
}

// Straightforward per-row re-implementation of the structural features.
inline spmvopt::FeatureVector naive_features(const CsrMatrix& m, std::size_t llc_bytes, std::size_t line_bytes) {
  using spmvopt::Feature;
  std::vector<double> nnz, bw, scatter, clustering, misses;
  const std::size_t line_elems = line_bytes / 8;
  for (std::size_t i = 0; i < m.nrows; ++i) {
    std::vector<std::uint32_t> cols(m.colind.begin() + m.rowptr[i], m.colind.begin() + m.rowptr[i + 1]);
    if (cols.empty()) continue;
    const double len = static_cast<double>(cols.size());
    const double span = static_cast<double>(cols.back()) - static_cast<double>(cols.front()) + 1.0;
    double groups = 0, miss = 0;
    for (std::size_t k = 0; k < cols.size(); ++k) {
      if (k == 0 || cols[k] != cols[k - 1] + 1) groups += 1;
      if (k > 0 && cols[k] - cols[k - 1] > line_elems) miss += 1;
    }
    nnz.push_back(len);
    bw.push_back(span);
    scatter.push_back(len / span);
    clustering.push_back(groups / len);
    misses.push_back(miss);
  }
  auto mean = [](const std::vector<double>& v) {
    double s = 0;
    for (double a : v) s += a;
    return s / static_cast<double>(v.size());
  };
  auto sd = [&](const std::vector<double>& v) {
    const double mu = mean(v);
    double s = 0;
    for (double a : v) s += (a - mu) * (a - mu);
    return std::sqrt(s / static_cast<double>(v.size()));
  };
  spmvopt::FeatureVector f;
  const double bytes = 12.0 * static_cast<double>(m.nnz()) + 4.0 * static_cast<double>(m.nrows + 1) +
                       8.0 * static_cast<double>(m.nrows) + 8.0 * static_cast<double>(m.ncols);
  f[Feature::Size] = bytes <= static_cast<double>(llc_bytes) ? 1.0 : 0.0;
  f[Feature::Density] = static_cast<double>(m.nnz()) / (static_cast<double>(m.nrows) * static_cast<double>(m.ncols));
  f[Feature::NnzMin] = *std::min_element(nnz.begin(), nnz.end());
  f[Feature::NnzMax] = *std::max_element(nnz.begin(), nnz.end());
  f[Feature::NnzAvg] = mean(nnz);
  f[Feature::NnzSd] = sd(nnz);
  f[Feature::BwMin] = *std::min_element(bw.begin(), bw.end());
  f[Feature::BwMax] = *std::max_element(bw.begin(), bw.end());
  f[Feature::BwAvg] = mean(bw);
  f[Feature::BwSd] = sd(bw);
  f[Feature::ScatterAvg] = mean(scatter);
  f[Feature::ScatterSd] = sd(scatter);
  f[Feature::ClusteringAvg] = mean(clustering);
  f[Feature::MissesAvg] = mean(misses);
  return f;
}

// Exact for the integer-valued features, 1e-12 relative (absolute near 0)
// for the rest.
inline bool features_match(const spmvopt::FeatureVector& a, const spmvopt::FeatureVector& b, std::string* why) {
  using spmvopt::Feature;
  for (std::size_t i = 0; i < spmvopt::kFeatureCount; ++i) {
    const auto f = static_cast<Feature>(i);
    const bool exact = f == Feature::Size || f == Feature::NnzMin || f == Feature::NnzMax || f == Feature::BwMin ||
                       f == Feature::BwMax;
    const double x = a.values[i], y = b.values[i];
    const bool ok = exact ? x == y : std::abs(x - y) <= 1e-12 * std::max(1.0, std::max(std::abs(x), std::abs(y)));
    if (!ok) {
      if (why) *why = std::string(spmvopt::feature_name(f)) + ": " + std::to_string(x) + " vs " + std::to_string(y);
      return false;
    }
  }
  return true;
}

}  // namespace testsupport
