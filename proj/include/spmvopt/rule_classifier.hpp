#pragma once

#include <array>
#include <vector>

#include "spmvopt/bounds.hpp"
#include "spmvopt/class_set.hpp"
#include "spmvopt/machine_profile.hpp"

namespace spmvopt {

/// Thresholds of the profile-guided rules.
struct RuleParams {
  double t_ml = 1.25;
  double t_imb = 1.24;
  /// p_csr counts as "approximately" p_mb when p_csr >= (1 - approx_tol) * p_mb.
  double approx_tol = 0.10;

  bool valid() const { return t_ml >= 1.0 && t_imb >= 1.0 && approx_tol > 0.0 && approx_tol < 1.0; }
  friend bool operator==(const RuleParams&, const RuleParams&) = default;
};

/// Multilabel rules, evaluated independently:
///   IMB  p_imb / p_csr > t_imb
///   ML   p_ml / p_csr > t_ml
///   MB   p_csr ~ p_mb and p_mb < p_cmp < p_peak
///   CMP  p_mb > p_cmp or p_cmp > p_peak
ClassSet classify(const BoundsReport& r, const RuleParams& params);

/// Measurements of one corpus matrix for tuning the rules offline: its bounds
/// and the speedup over baseline of the plan chosen for every class subset,
/// indexed by ClassSet::bits().
struct GridSample {
  BoundsReport bounds;
  std::array<double, 16> speedup{};
};

struct RuleGrid {
  std::vector<double> t_ml;
  std::vector<double> t_imb;
  std::vector<double> approx_tol;

  /// t_ml, t_imb in {1.00, 1.05, ..., 1.50}; approx_tol in {0.05, 0.10, 0.15}.
  static RuleGrid defaults();
  std::size_t size() const { return t_ml.size() * t_imb.size() * approx_tol.size(); }
};

struct GridSearchResult {
  RuleParams params;
  double mean_speedup = 0.0;
};

/// Mean speedup over the corpus when each matrix runs the plan selected by
/// classify(.., params).
double mean_speedup(const std::vector<GridSample>& corpus, const RuleParams& params);

/// Exhaustive search for the grid point with the highest mean speedup. Ties
/// go to the smaller t_ml, then t_imb, then approx_tol. Throws
/// std::invalid_argument for an empty corpus or grid.
GridSearchResult grid_search(const std::vector<GridSample>& corpus, const RuleGrid& grid);

void store_rule_params(ProfileStore& store, const RuleParams& params);
/// Defaults for keys that are absent.
RuleParams load_rule_params(const ProfileStore& store);

}  // namespace spmvopt
