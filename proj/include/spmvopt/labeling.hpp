#pragma once

#include <string>
#include <vector>

#include "spmvopt/bounds.hpp"
#include "spmvopt/decision_tree.hpp"
#include "spmvopt/matrix_source.hpp"
#include "spmvopt/rule_classifier.hpp"

namespace spmvopt {

/// Training sample of one matrix: features paired with the classes the
/// profile-guided classifier assigns on this machine.
LabeledSample label_matrix(const NamedMatrix& m, const MachineProfile& prof, const RuleParams& params,
                           const BenchmarkConfig& cfg);

/// label_matrix over every source of a corpus, loaded one at a time.
std::vector<LabeledSample> bootstrap_labels(const std::vector<std::string>& sources, const MachineProfile& prof,
                                            const RuleParams& params, const BenchmarkConfig& cfg);

}  // namespace spmvopt
