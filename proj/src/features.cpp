#include "spmvopt/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "spmvopt/bounds.hpp"

namespace spmvopt {
namespace {

constexpr std::array<std::string_view, kFeatureCount> kNames = {
    "size",   "density", "nnz_min",     "nnz_max",    "nnz_avg",        "nnz_sd",     "bw_min",
    "bw_max", "bw_avg",  "bw_sd",       "scatter_avg", "scatter_sd", "clustering_avg", "misses_avg",
};

struct Moments {
  double min = std::numeric_limits<double>::infinity();
  double max = -std::numeric_limits<double>::infinity();
  double sum = 0.0;

  void add(double v) {
    min = std::min(min, v);
    max = std::max(max, v);
    sum += v;
  }
  double mean(double n) const { return sum / n; }
};

}  // namespace

std::string_view feature_name(Feature f) { return kNames[static_cast<std::size_t>(f)]; }

std::optional<Feature> feature_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kFeatureCount; ++i)
    if (kNames[i] == name) return static_cast<Feature>(i);
  return std::nullopt;
}

FeatureVector extract_features(const CsrMatrix& m, std::size_t llc_bytes, std::size_t cache_line_bytes) {
  if (m.nnz() == 0) throw EmptyMatrix("feature extraction needs at least one nonzero");
  const index_t line_elements = static_cast<index_t>(cache_line_bytes / kValueBytes);

  Moments nnz, bw, scatter;
  double clustering_sum = 0.0;
  double misses_sum = 0.0;
  std::size_t nonempty = 0;
  for (std::size_t i = 0; i < m.nrows; ++i) {
    const index_t begin = m.rowptr[i], end = m.rowptr[i + 1];
    if (begin == end) continue;
    ++nonempty;
    const double len = end - begin;
    const double span = static_cast<double>(m.colind[end - 1] - m.colind[begin]) + 1.0;
    std::size_t groups = 1, misses = 0;
    for (index_t j = begin + 1; j < end; ++j) {
      const index_t gap = m.colind[j] - m.colind[j - 1];
      if (gap != 1) ++groups;
      if (gap > line_elements) ++misses;
    }
    nnz.add(len);
    bw.add(span);
    scatter.add(len / span);
    clustering_sum += static_cast<double>(groups) / len;
    misses_sum += static_cast<double>(misses);
  }

  // Second pass for the deviations; touches only the row endpoints.
  const double n = static_cast<double>(nonempty);
  const double nnz_avg = nnz.mean(n), bw_avg = bw.mean(n), scatter_avg = scatter.mean(n);
  double nnz_var = 0.0, bw_var = 0.0, scatter_var = 0.0;
  for (std::size_t i = 0; i < m.nrows; ++i) {
    const index_t begin = m.rowptr[i], end = m.rowptr[i + 1];
    if (begin == end) continue;
    const double len = end - begin;
    const double span = static_cast<double>(m.colind[end - 1] - m.colind[begin]) + 1.0;
    nnz_var += (len - nnz_avg) * (len - nnz_avg);
    bw_var += (span - bw_avg) * (span - bw_avg);
    scatter_var += (len / span - scatter_avg) * (len / span - scatter_avg);
  }

  FeatureVector f;
  const TrafficModel traffic = traffic_model(m.nrows, m.ncols, m.nnz());
  f[Feature::Size] = traffic.working_set() <= static_cast<double>(llc_bytes) ? 1.0 : 0.0;
  f[Feature::Density] = static_cast<double>(m.nnz()) / (static_cast<double>(m.nrows) * static_cast<double>(m.ncols));
  f[Feature::NnzMin] = nnz.min;
  f[Feature::NnzMax] = nnz.max;
  f[Feature::NnzAvg] = nnz_avg;
  f[Feature::NnzSd] = std::sqrt(nnz_var / n);
  f[Feature::BwMin] = bw.min;
  f[Feature::BwMax] = bw.max;
  f[Feature::BwAvg] = bw_avg;
  f[Feature::BwSd] = std::sqrt(bw_var / n);
  f[Feature::ScatterAvg] = scatter_avg;
  f[Feature::ScatterSd] = std::sqrt(scatter_var / n);
  f[Feature::ClusteringAvg] = clustering_sum / n;
  f[Feature::MissesAvg] = misses_sum / n;
  return f;
}

FeatureVector extract_features(const CsrMatrix& m, const MachineProfile& prof) {
  return extract_features(m, prof.llc_bytes, prof.cache_line_bytes);
}

std::string feature_csv_header() {
  std::string out;
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    if (i) out += ',';
    out += kNames[i];
  }
  return out;
}

std::string feature_csv_row(const FeatureVector& f) {
  std::string out;
  char buf[64];
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    if (i) out += ',';
    std::snprintf(buf, sizeof buf, "%.17g", f.values[i]);
    out += buf;
  }
  return out;
}

}  // namespace spmvopt
