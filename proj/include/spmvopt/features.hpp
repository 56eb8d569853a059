#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

#include "spmvopt/csr_matrix.hpp"
#include "spmvopt/machine_profile.hpp"

namespace spmvopt {

/// Structural features, in their canonical (CSV) order.
enum class Feature : std::size_t {
  Size,
  Density,
  NnzMin,
  NnzMax,
  NnzAvg,
  NnzSd,
  BwMin,
  BwMax,
  BwAvg,
  BwSd,
  ScatterAvg,
  ScatterSd,
  ClusteringAvg,
  MissesAvg,
};

inline constexpr std::size_t kFeatureCount = 14;

/// "size", "density", "nnz_min", ... in canonical order.
std::string_view feature_name(Feature f);
std::optional<Feature> feature_from_name(std::string_view name);

/// Per-row statistics are taken over nonempty rows only:
///   bw_i         = last column - first column + 1
///   scatter_i    = nnz_i / bw_i
///   clustering_i = (runs of consecutive columns) / nnz_i
///   misses_i     = elements whose gap to the previous column exceeds one cache
///                  line of doubles
/// Standard deviations are population deviations.
struct FeatureVector {
  std::array<double, kFeatureCount> values{};

  double operator[](Feature f) const { return values[static_cast<std::size_t>(f)]; }
  double& operator[](Feature f) { return values[static_cast<std::size_t>(f)]; }

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

class EmptyMatrix : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Single pass over rowptr and colind. Throws EmptyMatrix when NNZ == 0.
FeatureVector extract_features(const CsrMatrix& m, std::size_t llc_bytes, std::size_t cache_line_bytes);
FeatureVector extract_features(const CsrMatrix& m, const MachineProfile& prof);

std::string feature_csv_header();
std::string feature_csv_row(const FeatureVector& f);

}  // namespace spmvopt
