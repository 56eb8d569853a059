#include "spmvopt/labeling.hpp"

namespace spmvopt {

LabeledSample label_matrix(const NamedMatrix& m, const MachineProfile& prof, const RuleParams& params,
                           const BenchmarkConfig& cfg) {
  LabeledSample s;
  s.id = m.id;
  s.labels = classify(profile(m.matrix, prof, cfg), params);
  s.features = extract_features(m.matrix, prof);
  return s;
}

std::vector<LabeledSample> bootstrap_labels(const std::vector<std::string>& sources, const MachineProfile& prof,
                                            const RuleParams& params, const BenchmarkConfig& cfg) {
  std::vector<LabeledSample> out;
  out.reserve(sources.size());
  for (const std::string& source : sources) out.push_back(label_matrix(load_matrix(source), prof, params, cfg));
  return out;
}

}  // namespace spmvopt
