#pragma once

#include <string>
#include <vector>

#include "spmvopt/bounds.hpp"
#include "spmvopt/class_set.hpp"

namespace testsupport {

struct RuleCase {
  std::string name;
  spmvopt::BoundsReport bounds;
  spmvopt::ClassSet expected;
};

// Bounds tables with classes derived by hand for T_ML = 1.25, T_IMB = 1.24
// and a 10% "approximately equal" band.
inline std::vector<RuleCase> rule_cases() {
  using spmvopt::Bottleneck;
  auto r = [](double csr, double mb, double ml, double imb, double cmp, double peak) {
    spmvopt::BoundsReport b;
    b.p_csr = csr;
    b.p_mb = mb;
    b.p_ml = ml;
    b.p_imb = imb;
    b.p_cmp = cmp;
    b.p_peak = peak;
    return b;
  };
  const Bottleneck MB = Bottleneck::MB, ML = Bottleneck::ML, IMB = Bottleneck::IMB, CMP = Bottleneck::CMP;
  return {
      {"neutral", r(100, 200, 100, 100, 300, 400), {}},
      {"ml ratio 1.30", r(100, 200, 130, 100, 300, 400), {ML}},
      {"ml ratio exactly 1.25", r(100, 200, 125, 100, 300, 400), {}},
      {"ml ratio just above 1.25", r(100, 200, 125.0001, 100, 300, 400), {ML}},
      {"imb ratio exactly 1.24", r(100, 200, 100, 124, 300, 400), {}},
      {"imb ratio 1.245", r(100, 200, 100, 124.5, 300, 400), {IMB}},
      {"csr at edge of bandwidth band", r(180, 200, 180, 180, 300, 400), {MB}},
      {"csr just below bandwidth band", r(179.9, 200, 179.9, 179.9, 300, 400), {}},
      {"near bandwidth but cmp below mb", r(190, 200, 190, 190, 150, 400), {CMP}},
      {"cmp above peak", r(100, 200, 100, 100, 500, 400), {CMP}},
      {"cmp equals peak", r(190, 200, 190, 190, 400, 400), {}},
      {"cmp equals mb", r(190, 200, 190, 190, 200, 400), {}},
      {"latency and imbalance", r(100, 200, 150, 150, 300, 400), {ML, IMB}},
      {"latency, imbalance and compute", r(100, 200, 150, 150, 500, 400), {ML, IMB, CMP}},
      {"bandwidth and latency", r(190, 200, 300, 190, 300, 400), {MB, ML}},
      {"bandwidth and imbalance", r(190, 200, 190, 240, 300, 400), {MB, IMB}},
  };
}

}  // namespace testsupport
