#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "spmvopt/bounds.hpp"
#include "spmvopt/class_set.hpp"
#include "spmvopt/decision_tree.hpp"
#include "spmvopt/features.hpp"
#include "spmvopt/kernels.hpp"
#include "spmvopt/rule_classifier.hpp"

namespace spmvopt {

struct PlanOptions {
  /// IMB with nnz_max > dense_row_factor * nnz_avg is treated as a few
  /// pathologically long rows and gets decomposition.
  double dense_row_factor = 100.0;
};

struct OptimizationPlan {
  KernelId kernel_id;
  bool needs_delta = false;
  bool needs_decompose = false;
  /// Long-row cutoff when needs_decompose.
  index_t threshold = 0;
  /// One entry per triggering class.
  std::map<Bottleneck, std::string> rationale;
};

/// Class-to-optimization mapping:
///   MB   delta-compressed indices + unrolled inner loop
///   ML   software prefetching of x
///   CMP  unrolled inner loop
///   IMB  decomposition (threshold 8*nnz_avg) when nnz_max > K*nnz_avg,
///        dynamic scheduling otherwise
/// Decomposition wins over delta when both are asked for.
OptimizationPlan plan_from_classes(ClassSet classes, const FeatureVector& f, const PlanOptions& opts = {});

KernelOptions kernel_options(const OptimizationPlan& plan, std::size_t nthreads, std::size_t cache_line_bytes);

/// ceil(t_pre / (t_base - t_opt)) with per-iteration times; nullopt
/// ("not beneficial") when the optimized kernel is not faster.
std::optional<std::uint64_t> n_iters_min(double t_pre, double t_base, double t_opt);

enum class TuneMode { Profile, Feature };
std::string to_string(TuneMode mode);
TuneMode parse_tune_mode(const std::string& text);

struct TuneOptions {
  TuneMode mode = TuneMode::Profile;
  /// Required in feature mode.
  const TreeModel* model = nullptr;
  RuleParams rules;
  BenchmarkConfig bench;
  PlanOptions plan;
  /// Check the optimized kernel's output against the baseline kernel.
  bool verify = false;
};

struct TuneResult {
  ClassSet classes;
  OptimizationPlan plan;
  /// The kernel actually run; differs from plan.kernel_id when delta
  /// compression was impossible.
  KernelId effective;
  TimingResult baseline;
  TimingResult optimized;
  /// Classification plus representation conversion, in seconds.
  double t_pre = 0.0;
  std::optional<std::uint64_t> n_iters_min;
  /// Timed SpMV micro-benchmarks spent on classification.
  std::size_t micro_benchmarks = 0;

  double speedup() const { return baseline.rate > 0.0 ? optimized.rate / baseline.rate : 0.0; }
};

class VerificationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Detect, plan, convert, and benchmark baseline against the plan.
/// Throws std::invalid_argument in feature mode without a model.
TuneResult tune(const CsrMatrix& m, const MachineProfile& prof, const TuneOptions& opts);

/// Bounds of m plus the speedup of the plan of every class subset, for
/// offline grid search of the rule thresholds.
GridSample measure_grid_sample(const CsrMatrix& m, const MachineProfile& prof, const BenchmarkConfig& cfg,
                               const PlanOptions& plan = {});

struct CorpusRow {
  std::string id;
  TuneMode mode = TuneMode::Profile;
  ClassSet classes;
  std::string kernel;
  double baseline_gflops = 0.0;
  double optimized_gflops = 0.0;
  double speedup = 0.0;
  double t_pre = 0.0;
  std::optional<std::uint64_t> n_iters_min;
  /// Nonempty when the matrix could not be processed.
  std::string error;

  bool ok() const { return error.empty(); }
};

/// tune over every source, one matrix at a time. Failures are recorded in
/// the row and the run continues.
std::vector<CorpusRow> run_corpus(const std::vector<std::string>& sources, const MachineProfile& prof,
                                  const TuneOptions& opts);

void write_corpus_csv(const std::vector<CorpusRow>& rows, const MachineProfile& prof, std::size_t nthreads,
                      std::ostream& out);

}  // namespace spmvopt
