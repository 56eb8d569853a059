#include "spmvopt/rule_classifier.hpp"

#include <algorithm>
#include <stdexcept>
#include <tuple>

namespace spmvopt {

ClassSet classify(const BoundsReport& r, const RuleParams& params) {
  ClassSet s;
  if (r.p_imb / r.p_csr > params.t_imb) s.insert(Bottleneck::IMB);
  if (r.p_ml / r.p_csr > params.t_ml) s.insert(Bottleneck::ML);
  const bool near_bandwidth = r.p_csr >= (1.0 - params.approx_tol) * r.p_mb;
  if (near_bandwidth && r.p_mb < r.p_cmp && r.p_cmp < r.p_peak) s.insert(Bottleneck::MB);
  if (r.p_mb > r.p_cmp || r.p_cmp > r.p_peak) s.insert(Bottleneck::CMP);
  return s;
}

RuleGrid RuleGrid::defaults() {
  RuleGrid g;
  for (int k = 0; k <= 10; ++k) {
    g.t_ml.push_back(1.0 + 0.05 * k);
    g.t_imb.push_back(1.0 + 0.05 * k);
  }
  g.approx_tol = {0.05, 0.10, 0.15};
  return g;
}

double mean_speedup(const std::vector<GridSample>& corpus, const RuleParams& params) {
  if (corpus.empty()) throw std::invalid_argument("mean_speedup: empty corpus");
  double sum = 0.0;
  for (const GridSample& s : corpus) sum += s.speedup[classify(s.bounds, params).bits()];
  return sum / static_cast<double>(corpus.size());
}

GridSearchResult grid_search(const std::vector<GridSample>& corpus, const RuleGrid& grid) {
  if (corpus.empty()) throw std::invalid_argument("grid_search: empty corpus");
  if (grid.size() == 0) throw std::invalid_argument("grid_search: empty grid");

  std::vector<double> t_ml = grid.t_ml, t_imb = grid.t_imb, tol = grid.approx_tol;
  std::sort(t_ml.begin(), t_ml.end());
  std::sort(t_imb.begin(), t_imb.end());
  std::sort(tol.begin(), tol.end());

  // Points are visited in ascending (t_ml, t_imb, approx_tol) order and only a
  // strictly better score replaces the incumbent, which implements the
  // tie-breaking rule.
  GridSearchResult best;
  bool have = false;
  for (double a : t_ml) {
    for (double b : t_imb) {
      for (double c : tol) {
        RuleParams p{a, b, c};
        double score = mean_speedup(corpus, p);
        if (!have || score > best.mean_speedup) {
          best = {p, score};
          have = true;
        }
      }
    }
  }
  return best;
}

void store_rule_params(ProfileStore& store, const RuleParams& params) {
  store.set("rules.t_ml", params.t_ml);
  store.set("rules.t_imb", params.t_imb);
  store.set("rules.approx_tol", params.approx_tol);
}

RuleParams load_rule_params(const ProfileStore& store) {
  RuleParams p;
  p.t_ml = store.get_double("rules.t_ml").value_or(p.t_ml);
  p.t_imb = store.get_double("rules.t_imb").value_or(p.t_imb);
  p.approx_tol = store.get_double("rules.approx_tol").value_or(p.approx_tol);
  if (!p.valid()) throw std::runtime_error("stored rule parameters are out of range");
  return p;
}

}  // namespace spmvopt
