// spmvopt: bottleneck detection and kernel selection for CSR SpMV.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "spmvopt/bounds.hpp"
#include "spmvopt/decision_tree.hpp"
#include "spmvopt/features.hpp"
#include "spmvopt/labeling.hpp"
#include "spmvopt/machine_profile.hpp"
#include "spmvopt/matrix_source.hpp"
#include "spmvopt/rule_classifier.hpp"
#include "spmvopt/tuner.hpp"

using json = nlohmann::ordered_json;
using namespace spmvopt;

namespace {

struct Common {
  std::size_t threads = 0;
  std::string profile_path;
  std::size_t runs = kDefaultRuns;
  std::size_t iterations = kDefaultIterations;

  std::size_t nthreads() const { return threads ? threads : default_thread_count(); }
  std::filesystem::path path() const { return profile_path.empty() ? default_profile_path() : std::filesystem::path(profile_path); }
  BenchmarkConfig bench() const { return {nthreads(), runs, iterations}; }
};

void add_common(CLI::App* cmd, Common& c, bool timing) {
  cmd->add_option("--threads", c.threads, "Worker threads (default: SPMV_THREADS or all cores)");
  cmd->add_option("--profile-file", c.profile_path, "Machine profile file (default: SPMV_PROFILE or ./spmv-machine-profile.txt)");
  if (timing) {
    cmd->add_option("--runs", c.runs, "Timed runs per benchmark")->check(CLI::PositiveNumber);
    cmd->add_option("--iterations", c.iterations, "SpMVs per timed run")->check(CLI::PositiveNumber);
  }
}

ProfileStore load_store(const std::filesystem::path& path) {
  return std::filesystem::exists(path) ? ProfileStore::load(path) : ProfileStore{};
}

// Uses the stored machine profile, measuring and storing one when absent.
MachineProfile machine(const Common& c) {
  ProfileStore store = load_store(c.path());
  if (store.get("machine.bmax_main")) return load_machine_profile(store);
  std::cerr << "no machine profile at " << c.path() << ", measuring bandwidth\n";
  BandwidthOptions opts;
  opts.nthreads = c.nthreads();
  MachineProfile prof = measure_bandwidth(opts);
  store_machine_profile(store, prof);
  store.save(c.path());
  return prof;
}

json timing_json(const TimingResult& t) {
  return {{"gflops", t.gflops()},
          {"seconds_per_iteration", t.seconds_per_iteration()},
          {"run_rates", t.run_rates},
          {"per_thread_times", t.per_thread_times},
          {"runs", t.runs},
          {"iterations", t.iterations}};
}

json bounds_json(const BoundsReport& r) {
  return {{"p_csr", r.p_csr},
          {"p_mb", r.p_mb},
          {"p_ml", r.p_ml},
          {"p_imb", r.p_imb},
          {"p_cmp", r.p_cmp},
          {"p_peak", r.p_peak},
          {"working_set_bytes", r.working_set},
          {"fits_in_llc", r.fits_in_llc},
          {"bandwidth_used", r.bandwidth_used},
          {"micro_benchmarks", r.micro_benchmarks}};
}

json plan_json(const OptimizationPlan& p) {
  json rationale = json::object();
  for (const auto& [cls, why] : p.rationale) rationale[std::string(to_string(cls))] = why;
  return {{"kernel", to_string(p.kernel_id)},
          {"needs_delta", p.needs_delta},
          {"needs_decompose", p.needs_decompose},
          {"threshold", p.threshold},
          {"rationale", rationale}};
}

void stamp(json& j, const MachineProfile& prof, std::size_t nthreads) {
  j["fingerprint"] = prof.fingerprint;
  j["nthreads"] = nthreads;
}

json eval_json(const EvalReport& r) {
  json per_class = json::object();
  for (std::size_t l = 0; l < kTreeLabels; ++l)
    per_class[std::string(tree_label_name(l))] = {{"precision", r.per_class[l].precision},
                                                  {"recall", r.per_class[l].recall}};
  return {{"exact_match", r.exact_match}, {"partial_match", r.partial_match}, {"folds", r.folds},
          {"per_class", per_class}};
}

std::string csv_quoted(const std::string& s) {
  if (s.find_first_of(",\"") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

TreeParams tree_params(std::size_t max_depth, std::size_t min_leaf) {
  TreeParams p;
  p.max_depth = max_depth == 0 ? kUnlimitedDepth : max_depth;
  p.min_leaf = min_leaf;
  return p;
}

std::vector<LabeledSample> samples_for(const Common& c, const std::string& corpus, const std::string& samples_in,
                                       const std::string& samples_out) {
  std::vector<LabeledSample> samples;
  if (!samples_in.empty()) {
    samples = load_samples(std::filesystem::path(samples_in));
  } else {
    if (corpus.empty()) throw CLI::ValidationError("--corpus or --samples is required");
    const MachineProfile prof = machine(c);
    samples = bootstrap_labels(expand_corpus(corpus), prof, load_rule_params(load_store(c.path())), c.bench());
  }
  if (!samples_out.empty()) save_samples(samples, std::filesystem::path(samples_out));
  return samples;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bottleneck-driven optimization of CSR sparse matrix-vector multiplication"};
  app.require_subcommand(1);

  // bandwidth
  Common bw;
  std::size_t llc_bytes = 0, line_bytes = 0, trials = 10;
  auto* cmd_bw = app.add_subcommand("bandwidth", "Measure sustainable bandwidth and write the machine profile");
  add_common(cmd_bw, bw, false);
  cmd_bw->add_option("--llc-bytes", llc_bytes, "Override the detected last-level cache size");
  cmd_bw->add_option("--line-bytes", line_bytes, "Override the detected cache line size");
  cmd_bw->add_option("--trials", trials, "Triad trials per working set")->check(CLI::PositiveNumber);

  // features
  Common fe;
  std::string fe_matrix;
  auto* cmd_fe = app.add_subcommand("features", "Print the structural features of a matrix as CSV");
  add_common(cmd_fe, fe, false);
  cmd_fe->add_option("matrix", fe_matrix, "Matrix Market file or gen:SPEC")->required();

  // profile
  Common pr;
  std::string pr_matrix;
  auto* cmd_pr = app.add_subcommand("profile", "Compute the performance bounds of a matrix");
  add_common(cmd_pr, pr, true);
  cmd_pr->add_option("matrix", pr_matrix, "Matrix Market file or gen:SPEC")->required();

  // classify
  Common cl;
  std::string cl_matrix, cl_mode = "profile", cl_model;
  auto* cmd_cl = app.add_subcommand("classify", "Detect the bottleneck classes of a matrix");
  add_common(cmd_cl, cl, true);
  cmd_cl->add_option("matrix", cl_matrix, "Matrix Market file or gen:SPEC")->required();
  cmd_cl->add_option("--mode", cl_mode, "profile or feature")->check(CLI::IsMember({"profile", "feature"}));
  cmd_cl->add_option("--model", cl_model, "Tree model (feature mode)");

  // train
  Common tr;
  std::string tr_corpus, tr_out, tr_features = "preset-n", tr_samples, tr_save;
  std::size_t tr_depth = 8, tr_leaf = 3;
  auto* cmd_tr = app.add_subcommand("train", "Train the feature-guided classifier");
  add_common(cmd_tr, tr, true);
  cmd_tr->add_option("--corpus", tr_corpus, "Directory, list file, suite:N[,seed], or ';'-separated sources");
  cmd_tr->add_option("--samples", tr_samples, "Labeled sample CSV instead of profiling a corpus");
  cmd_tr->add_option("--save-samples", tr_save, "Write the labeled samples to this CSV");
  cmd_tr->add_option("--out", tr_out, "Model file")->required();
  cmd_tr->add_option("--features", tr_features, "preset-n, preset-nnz, all, or a comma-separated list");
  cmd_tr->add_option("--max-depth", tr_depth, "Maximum tree depth (0 = unlimited)");
  cmd_tr->add_option("--min-leaf", tr_leaf, "Minimum samples per leaf")->check(CLI::PositiveNumber);

  // evaluate
  Common ev;
  std::string ev_corpus, ev_features = "preset-n", ev_samples, ev_save;
  std::size_t ev_depth = 8, ev_leaf = 3;
  bool ev_loo = false;
  auto* cmd_ev = app.add_subcommand("evaluate", "Cross-validate the feature-guided classifier");
  add_common(cmd_ev, ev, true);
  cmd_ev->add_option("--corpus", ev_corpus, "Directory, list file, suite:N[,seed], or ';'-separated sources");
  cmd_ev->add_option("--samples", ev_samples, "Labeled sample CSV instead of profiling a corpus");
  cmd_ev->add_option("--save-samples", ev_save, "Write the labeled samples to this CSV");
  cmd_ev->add_option("--features", ev_features, "preset-n, preset-nnz, all, or a comma-separated list");
  cmd_ev->add_option("--max-depth", ev_depth, "Maximum tree depth (0 = unlimited)");
  cmd_ev->add_option("--min-leaf", ev_leaf, "Minimum samples per leaf")->check(CLI::PositiveNumber);
  cmd_ev->add_flag("--loo", ev_loo, "Leave-one-out cross validation (the only scheme)");

  // gridsearch
  Common gs;
  std::string gs_corpus;
  double gs_k = 100.0;
  auto* cmd_gs = app.add_subcommand("gridsearch", "Tune the rule thresholds on a corpus");
  add_common(cmd_gs, gs, true);
  cmd_gs->add_option("--corpus", gs_corpus, "Directory, list file, suite:N[,seed], or ';'-separated sources")
      ->required();
  cmd_gs->add_option("--dense-row-factor", gs_k, "K of the nnz_max > K*nnz_avg decomposition test");

  // tune
  Common tu;
  std::string tu_matrix, tu_mode = "profile", tu_model;
  double tu_k = 100.0;
  auto* cmd_tu = app.add_subcommand("tune", "Select, apply and benchmark optimizations for a matrix");
  add_common(cmd_tu, tu, true);
  cmd_tu->add_option("matrix", tu_matrix, "Matrix Market file or gen:SPEC")->required();
  cmd_tu->add_option("--mode", tu_mode, "profile or feature")->check(CLI::IsMember({"profile", "feature"}));
  cmd_tu->add_option("--model", tu_model, "Tree model (feature mode)");
  cmd_tu->add_option("--dense-row-factor", tu_k, "K of the nnz_max > K*nnz_avg decomposition test");

  // bench
  Common be;
  std::string be_corpus, be_out, be_mode = "profile", be_model;
  double be_k = 100.0;
  auto* cmd_be = app.add_subcommand("bench", "Tune every matrix of a corpus and report speedups as CSV");
  add_common(cmd_be, be, true);
  cmd_be->add_option("--corpus", be_corpus, "Directory, list file, suite:N[,seed], or ';'-separated sources")
      ->required();
  cmd_be->add_option("--out", be_out, "CSV report (default: stdout)");
  cmd_be->add_option("--mode", be_mode, "profile or feature")->check(CLI::IsMember({"profile", "feature"}));
  cmd_be->add_option("--model", be_model, "Tree model (feature mode)");
  cmd_be->add_option("--dense-row-factor", be_k, "K of the nnz_max > K*nnz_avg decomposition test");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*cmd_bw) {
      BandwidthOptions opts;
      opts.nthreads = bw.nthreads();
      opts.trials = trials;
      if (llc_bytes) opts.llc_bytes = llc_bytes;
      if (line_bytes) opts.cache_line_bytes = line_bytes;
      MachineProfile prof = measure_bandwidth(opts);
      ProfileStore store = load_store(bw.path());
      store_machine_profile(store, prof);
      store.save(bw.path());
      json j = {{"bmax_main", prof.bmax_main},
                {"bmax_llc", prof.bmax_llc},
                {"llc_bytes", prof.llc_bytes},
                {"cache_line_bytes", prof.cache_line_bytes},
                {"profile_file", bw.path().string()}};
      stamp(j, prof, prof.nthreads);
      std::cout << j.dump(2) << '\n';
    } else if (*cmd_fe) {
      NamedMatrix m = load_matrix(fe_matrix);
      ProfileStore store = load_store(fe.path());
      FeatureVector f;
      if (store.get("machine.bmax_main")) {
        f = extract_features(m.matrix, load_machine_profile(store));
      } else {
        CacheGeometry g = detect_cache_geometry();
        f = extract_features(m.matrix, g.llc_bytes, g.cache_line_bytes);
      }
      std::cout << "matrix_id," << feature_csv_header() << '\n' << csv_quoted(m.id) << ',' << feature_csv_row(f) << '\n';
    } else if (*cmd_pr) {
      NamedMatrix m = load_matrix(pr_matrix);
      const MachineProfile prof = machine(pr);
      json j = bounds_json(profile(m.matrix, prof, pr.bench()));
      j["matrix_id"] = m.id;
      stamp(j, prof, pr.nthreads());
      std::cout << j.dump(2) << '\n';
    } else if (*cmd_cl) {
      NamedMatrix m = load_matrix(cl_matrix);
      const MachineProfile prof = machine(cl);
      ClassSet classes;
      if (cl_mode == "profile") {
        classes = classify(profile(m.matrix, prof, cl.bench()), load_rule_params(load_store(cl.path())));
      } else {
        if (cl_model.empty()) throw CLI::ValidationError("feature mode requires --model");
        classes = predict(load_model(std::filesystem::path(cl_model)), extract_features(m.matrix, prof));
      }
      std::cout << to_string(classes) << '\n';
    } else if (*cmd_tr) {
      auto samples = samples_for(tr, tr_corpus, tr_samples, tr_save);
      std::vector<std::string> warnings;
      const auto features = parse_feature_subset(tr_features);
      TreeModel model = train(samples, features, tree_params(tr_depth, tr_leaf), &warnings);
      for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
      save_model(model, std::filesystem::path(tr_out));
      std::cerr << "trained on " << samples.size() << " samples, model written to " << tr_out << '\n';
    } else if (*cmd_ev) {
      auto samples = samples_for(ev, ev_corpus, ev_samples, ev_save);
      const auto features = parse_feature_subset(ev_features);
      std::cout << eval_json(loo_evaluate(samples, features, tree_params(ev_depth, ev_leaf))).dump(2) << '\n';
    } else if (*cmd_gs) {
      const MachineProfile prof = machine(gs);
      std::vector<GridSample> corpus;
      for (const auto& source : expand_corpus(gs_corpus))
        corpus.push_back(measure_grid_sample(load_matrix(source).matrix, prof, gs.bench(), {gs_k}));
      GridSearchResult best = grid_search(corpus, RuleGrid::defaults());
      ProfileStore store = load_store(gs.path());
      store_rule_params(store, best.params);
      store.save(gs.path());
      json j = {{"t_ml", best.params.t_ml},
                {"t_imb", best.params.t_imb},
                {"approx_tol", best.params.approx_tol},
                {"mean_speedup", best.mean_speedup},
                {"matrices", corpus.size()}};
      stamp(j, prof, gs.nthreads());
      std::cout << j.dump(2) << '\n';
    } else if (*cmd_tu) {
      NamedMatrix m = load_matrix(tu_matrix);
      const MachineProfile prof = machine(tu);
      TreeModel model;
      TuneOptions opts;
      opts.mode = parse_tune_mode(tu_mode);
      if (opts.mode == TuneMode::Feature) {
        if (tu_model.empty()) throw CLI::ValidationError("feature mode requires --model");
        model = load_model(std::filesystem::path(tu_model));
        opts.model = &model;
      }
      opts.rules = load_rule_params(load_store(tu.path()));
      opts.bench = tu.bench();
      opts.plan.dense_row_factor = tu_k;
      TuneResult r = tune(m.matrix, prof, opts);
      json j = {{"matrix_id", m.id},
                {"mode", tu_mode},
                {"classes", to_string(r.classes)},
                {"plan", plan_json(r.plan)},
                {"effective_kernel", to_string(r.effective)},
                {"baseline", timing_json(r.baseline)},
                {"optimized", timing_json(r.optimized)},
                {"speedup", r.speedup()},
                {"t_pre", r.t_pre},
                {"n_iters_min", r.n_iters_min ? json(*r.n_iters_min) : json("not-beneficial")}};
      stamp(j, prof, tu.nthreads());
      std::cout << j.dump(2) << '\n';
    } else if (*cmd_be) {
      const MachineProfile prof = machine(be);
      TreeModel model;
      TuneOptions opts;
      opts.mode = parse_tune_mode(be_mode);
      if (opts.mode == TuneMode::Feature) {
        if (be_model.empty()) throw CLI::ValidationError("feature mode requires --model");
        model = load_model(std::filesystem::path(be_model));
        opts.model = &model;
      }
      opts.rules = load_rule_params(load_store(be.path()));
      opts.bench = be.bench();
      opts.plan.dense_row_factor = be_k;
      auto rows = run_corpus(expand_corpus(be_corpus), prof, opts);
      if (be_out.empty()) {
        write_corpus_csv(rows, prof, be.nthreads(), std::cout);
      } else {
        std::ofstream out(be_out);
        if (!out) throw std::runtime_error("cannot write " + be_out);
        write_corpus_csv(rows, prof, be.nthreads(), out);
      }
      for (const auto& r : rows)
        if (!r.ok()) return 1;
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
