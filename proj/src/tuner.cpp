#include "spmvopt/tuner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "spmvopt/matrix_source.hpp"
#include "spmvopt/parallel.hpp"

namespace spmvopt {

OptimizationPlan plan_from_classes(ClassSet classes, const FeatureVector& f, const PlanOptions& opts) {
  OptimizationPlan plan;
  KernelId& id = plan.kernel_id;

  if (classes.contains(Bottleneck::IMB)) {
    const double avg = f[Feature::NnzAvg];
    if (f[Feature::NnzMax] > opts.dense_row_factor * avg) {
      plan.needs_decompose = true;
      plan.threshold = static_cast<index_t>(std::max(1.0, std::floor(8.0 * avg)));
      id.decompose_long_rows = true;
      plan.rationale[Bottleneck::IMB] = "decomposition (nnz_max > K*nnz_avg, threshold " +
                                        std::to_string(plan.threshold) + ")";
    } else if (f[Feature::BwSd] > f[Feature::BwAvg]) {
      id.schedule = Schedule::Dynamic;
      plan.rationale[Bottleneck::IMB] = "dynamic scheduling (bw_sd > bw_avg)";
    } else {
      id.schedule = Schedule::Dynamic;
      plan.rationale[Bottleneck::IMB] = "dynamic scheduling (fallback)";
    }
  }
  if (classes.contains(Bottleneck::MB)) {
    id.inner = InnerLoop::Unrolled;
    if (plan.needs_decompose) {
      plan.rationale[Bottleneck::MB] = "unrolled inner loop; delta skipped, decomposition takes precedence";
    } else {
      plan.needs_delta = true;
      id.delta_indices = true;
      plan.rationale[Bottleneck::MB] = "delta-compressed indices + unrolled inner loop";
    }
  }
  if (classes.contains(Bottleneck::ML)) {
    id.prefetch = true;
    plan.rationale[Bottleneck::ML] = "software prefetching on x";
  }
  if (classes.contains(Bottleneck::CMP)) {
    id.inner = InnerLoop::Unrolled;
    plan.rationale[Bottleneck::CMP] = "unrolled inner loop";
  }
  return plan;
}

KernelOptions kernel_options(const OptimizationPlan& plan, std::size_t nthreads, std::size_t cache_line_bytes) {
  KernelOptions o;
  o.nthreads = nthreads;
  o.cache_line_bytes = cache_line_bytes;
  o.decompose_threshold = plan.needs_decompose ? plan.threshold : 0;
  return o;
}

std::optional<std::uint64_t> n_iters_min(double t_pre, double t_base, double t_opt) {
  const double saved = t_base - t_opt;
  if (!(saved > 0.0) || !std::isfinite(t_pre) || t_pre < 0.0) return std::nullopt;
  double q = t_pre / saved;
  if (q >= static_cast<double>(std::numeric_limits<std::uint64_t>::max())) return std::nullopt;
  // Quotients that should be integral (1 s / 5 ms) can land one ulp above.
  const double r = std::round(q);
  if (std::abs(q - r) <= 1e-9 * std::max(1.0, r)) q = r;
  return static_cast<std::uint64_t>(std::ceil(q));
}

std::string to_string(TuneMode mode) { return mode == TuneMode::Profile ? "profile" : "feature"; }

TuneMode parse_tune_mode(const std::string& text) {
  if (text == "profile") return TuneMode::Profile;
  if (text == "feature") return TuneMode::Feature;
  throw std::invalid_argument("unknown mode '" + text + "', expected profile or feature");
}

namespace {

void verify_output(const CsrMatrix& m, const Kernel& baseline, const Kernel& optimized) {
  const std::vector<double> x = benchmark_vector(m.ncols);
  std::vector<double> y0(m.nrows), y1(m.nrows);
  baseline(x, y0);
  optimized(x, y1);
  for (std::size_t i = 0; i < m.nrows; ++i) {
    double scale = 0.0;
    for (index_t j = m.rowptr[i]; j < m.rowptr[i + 1]; ++j) scale += std::abs(m.values[j] * x[m.colind[j]]);
    if (std::abs(y1[i] - y0[i]) > 1e-12 * scale)
      throw VerificationError("optimized kernel disagrees with baseline at row " + std::to_string(i));
  }
}

}  // namespace

TuneResult tune(const CsrMatrix& m, const MachineProfile& prof, const TuneOptions& opts) {
  if (opts.mode == TuneMode::Feature && opts.model == nullptr)
    throw std::invalid_argument("feature mode needs a trained model");
  const BenchmarkConfig& cfg = opts.bench;
  TuneResult result;

  const auto start = Clock::now();
  FeatureVector features;
  if (opts.mode == TuneMode::Profile) {
    BoundsReport bounds = profile(m, prof, cfg);
    result.classes = classify(bounds, opts.rules);
    result.micro_benchmarks = bounds.micro_benchmarks;
    if (result.classes.contains(Bottleneck::IMB)) features = extract_features(m, prof);
  } else {
    features = extract_features(m, prof);
    result.classes = predict(*opts.model, features);
  }
  result.plan = plan_from_classes(result.classes, features, opts.plan);
  auto optimized = compose(result.plan.kernel_id, m, kernel_options(result.plan, cfg.nthreads, prof.cache_line_bytes));
  result.t_pre = seconds_since(start);
  result.effective = optimized->effective();

  auto baseline = compose(KernelId{}, m, kernel_options({}, cfg.nthreads, prof.cache_line_bytes));
  if (opts.verify) verify_output(m, *baseline, *optimized);
  result.baseline = benchmark(*baseline, cfg.runs, cfg.iterations);
  // A plan that changes nothing runs the baseline kernel itself; timing it a
  // second time would only report noise as a speedup.
  result.optimized = result.effective == KernelId{} ? result.baseline
                                                    : benchmark(*optimized, cfg.runs, cfg.iterations);
  result.n_iters_min = n_iters_min(result.t_pre, result.baseline.seconds_per_iteration(),
                                   result.optimized.seconds_per_iteration());
  return result;
}

GridSample measure_grid_sample(const CsrMatrix& m, const MachineProfile& prof, const BenchmarkConfig& cfg,
                               const PlanOptions& plan_opts) {
  GridSample sample;
  sample.bounds = profile(m, prof, cfg);
  const FeatureVector features = extract_features(m, prof);
  const double base = sample.bounds.p_csr;

  std::map<std::string, double> rates;
  for (std::uint8_t bits = 0; bits < 16; ++bits) {
    OptimizationPlan plan = plan_from_classes(ClassSet::from_bits(bits), features, plan_opts);
    const std::string key = to_string(plan.kernel_id) + "#" + std::to_string(plan.threshold);
    auto it = rates.find(key);
    if (it == rates.end()) {
      double rate = base;
      if (plan.kernel_id != KernelId{}) {
        auto k = compose(plan.kernel_id, m, kernel_options(plan, cfg.nthreads, prof.cache_line_bytes));
        rate = benchmark(*k, cfg.runs, cfg.iterations).rate;
      }
      it = rates.emplace(key, rate).first;
    }
    sample.speedup[bits] = base > 0.0 ? it->second / base : 0.0;
  }
  return sample;
}

std::vector<CorpusRow> run_corpus(const std::vector<std::string>& sources, const MachineProfile& prof,
                                  const TuneOptions& opts) {
  std::vector<CorpusRow> rows;
  rows.reserve(sources.size());
  for (const std::string& source : sources) {
    CorpusRow row;
    row.id = source;
    row.mode = opts.mode;
    try {
      NamedMatrix nm = load_matrix(source);
      row.id = nm.id;
      TuneResult r = tune(nm.matrix, prof, opts);
      row.classes = r.classes;
      row.kernel = to_string(r.effective);
      row.baseline_gflops = r.baseline.gflops();
      row.optimized_gflops = r.optimized.gflops();
      row.speedup = r.speedup();
      row.t_pre = r.t_pre;
      row.n_iters_min = r.n_iters_min;
    } catch (const std::exception& e) {
      row.error = e.what();
      if (row.error.empty()) row.error = "unknown error";
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

void write_corpus_csv(const std::vector<CorpusRow>& rows, const MachineProfile& prof, std::size_t nthreads,
                      std::ostream& out) {
  out << "matrix_id,mode,classes,kernel,baseline_gflops,optimized_gflops,speedup,t_pre_s,n_iters_min,"
         "nthreads,fingerprint,error\n";
  const std::string fp = csv_field(prof.fingerprint);
  for (const CorpusRow& r : rows) {
    out << csv_field(r.id) << ',' << to_string(r.mode) << ',';
    if (r.ok()) {
      out << to_string(r.classes) << ',' << r.kernel << ',' << fixed(r.baseline_gflops, 6) << ','
          << fixed(r.optimized_gflops, 6) << ',' << fixed(r.speedup, 3) << ',' << fixed(r.t_pre, 6) << ','
          << (r.n_iters_min ? std::to_string(*r.n_iters_min) : std::string("not-beneficial"));
    } else {
      out << ",,,,,,";
    }
    out << ',' << nthreads << ',' << fp << ',' << csv_field(r.error) << '\n';
  }
}

}  // namespace spmvopt
