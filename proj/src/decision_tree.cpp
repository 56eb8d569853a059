#include "spmvopt/decision_tree.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

namespace spmvopt {
namespace {

constexpr std::string_view kModelHeader = "spmv-tree-model v1";

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

// Gini impurity times node size: n - (pos^2 + neg^2) / n.
double weighted_gini(double pos, double n) {
  if (n == 0.0) return 0.0;
  const double neg = n - pos;
  return n - (pos * pos + neg * neg) / n;
}

class TreeBuilder {
 public:
  TreeBuilder(const std::vector<LabeledSample>& samples, std::span<const Feature> features,
              const std::vector<std::vector<std::size_t>>& sorted, const TreeParams& params, std::size_t label)
      : samples_(samples), features_(features), sorted_(sorted), params_(params) {
    target_.resize(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) target_[i] = has_label(samples[i].labels, label) ? 1 : 0;
    in_node_.assign(samples.size(), 0);
  }

  BinaryTree build() {
    std::vector<std::size_t> all(samples_.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    grow(all, 0);
    return std::move(tree_);
  }

 private:
  double value(std::size_t sample, Feature f) const { return samples_[sample].features[f]; }

  int grow(const std::vector<std::size_t>& members, std::size_t depth) {
    const int id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    double pos = 0;
    for (std::size_t s : members) pos += target_[s];
    const double n = static_cast<double>(members.size());

    Split split;
    const bool pure = pos == 0 || pos == n;
    if (!pure && depth < params_.max_depth && members.size() >= 2 * params_.min_leaf) split = best_split(members, pos);

    if (split.feature < 0) {
      tree_.nodes[id].probability = pos / n;
      return id;
    }

    std::vector<std::size_t> left, right;
    const Feature f = static_cast<Feature>(split.feature);
    for (std::size_t s : members) (value(s, f) <= split.threshold ? left : right).push_back(s);
    tree_.nodes[id].feature = split.feature;
    tree_.nodes[id].threshold = split.threshold;
    const int l = grow(left, depth + 1);
    const int r = grow(right, depth + 1);
    tree_.nodes[id].left = l;
    tree_.nodes[id].right = r;
    return id;
  }

  Split best_split(const std::vector<std::size_t>& members, double pos) {
    for (std::size_t s : members) in_node_[s] = 1;
    const double n = static_cast<double>(members.size());
    const double parent = weighted_gini(pos, n);
    const double min_gain = 1e-12 * std::max(1.0, parent);
    Split best;

    // Features are scanned in ascending canonical index so that ties keep the
    // lower feature; thresholds ascend within a feature.
    std::vector<Feature> order(features_.begin(), features_.end());
    std::sort(order.begin(), order.end());
    for (Feature f : order) {
      const auto& column = sorted_[static_cast<std::size_t>(f)];
      double left_n = 0, left_pos = 0;
      bool have_prev = false;
      double prev = 0.0;
      for (std::size_t s : column) {
        if (!in_node_[s]) continue;
        const double v = value(s, f);
        if (have_prev && v != prev && left_n >= params_.min_leaf && n - left_n >= params_.min_leaf) {
          const double child = weighted_gini(left_pos, left_n) + weighted_gini(pos - left_pos, n - left_n);
          const double gain = (parent - child) / n;
          if (gain * n > min_gain && gain > best.gain) {
            double thr = prev + (v - prev) / 2.0;
            if (!(thr < v)) thr = prev;
            best = {static_cast<int>(f), thr, gain};
          }
        }
        left_n += 1;
        left_pos += target_[s];
        prev = v;
        have_prev = true;
      }
    }
    for (std::size_t s : members) in_node_[s] = 0;
    return best;
  }

  const std::vector<LabeledSample>& samples_;
  std::span<const Feature> features_;
  const std::vector<std::vector<std::size_t>>& sorted_;
  TreeParams params_;
  std::vector<int> target_;
  std::vector<char> in_node_;
  BinaryTree tree_;
};

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string_view tree_label_name(std::size_t label) {
  return label == kNoneLabel ? "NONE" : to_string(kAllBottlenecks.at(label));
}

bool has_label(ClassSet labels, std::size_t label) {
  return label == kNoneLabel ? labels.empty() : labels.contains(kAllBottlenecks[label]);
}

double BinaryTree::predict_probability(const FeatureVector& f) const {
  std::size_t id = 0;
  while (!nodes[id].is_leaf()) {
    const TreeNode& n = nodes[id];
    id = static_cast<std::size_t>(f[static_cast<Feature>(n.feature)] <= n.threshold ? n.left : n.right);
  }
  return nodes[id].probability;
}

std::size_t BinaryTree::depth() const {
  std::vector<std::size_t> d(nodes.size(), 0);
  std::size_t best = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    best = std::max(best, d[i]);
    if (!nodes[i].is_leaf()) {
      d[static_cast<std::size_t>(nodes[i].left)] = d[i] + 1;
      d[static_cast<std::size_t>(nodes[i].right)] = d[i] + 1;
    }
  }
  return best;
}

std::vector<Feature> feature_preset(std::string_view name) {
  using F = Feature;
  if (name == "preset-n") return {F::NnzMin, F::NnzMax, F::NnzSd, F::BwAvg, F::ScatterAvg, F::ScatterSd};
  if (name == "preset-nnz")
    return {F::Size, F::NnzMin, F::NnzMax, F::NnzAvg, F::NnzSd, F::BwAvg, F::BwSd, F::ScatterSd, F::MissesAvg};
  if (name == "all") {
    std::vector<Feature> all;
    for (std::size_t i = 0; i < kFeatureCount; ++i) all.push_back(static_cast<Feature>(i));
    return all;
  }
  throw std::invalid_argument("unknown feature preset '" + std::string(name) + "'");
}

std::vector<Feature> parse_feature_subset(std::string_view text) {
  if (text.rfind("preset-", 0) == 0 || text == "all") return feature_preset(text);
  std::vector<Feature> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t next = text.find(',', pos);
    if (next == std::string_view::npos) next = text.size();
    std::string_view name = text.substr(pos, next - pos);
    if (!name.empty()) {
      auto f = feature_from_name(name);
      if (!f) throw std::invalid_argument("unknown feature '" + std::string(name) + "'");
      if (std::find(out.begin(), out.end(), *f) == out.end()) out.push_back(*f);
    }
    pos = next + 1;
  }
  if (out.empty()) throw std::invalid_argument("empty feature subset");
  return out;
}

TreeModel train(const std::vector<LabeledSample>& samples, std::span<const Feature> features,
                const TreeParams& params, std::vector<std::string>* warnings) {
  if (samples.size() < 2) throw TrainingError("training needs at least 2 samples");
  if (features.empty()) throw TrainingError("training needs a nonempty feature subset");
  if (params.min_leaf < 1) throw TrainingError("min_leaf must be >= 1");
  for (const LabeledSample& s : samples)
    for (Feature f : features)
      if (!std::isfinite(s.features[f]))
        throw TrainingError("sample '" + s.id + "' has a non-finite " + std::string(feature_name(f)));

  // Presorted columns: sample indices ordered by (value, index) per feature.
  std::vector<std::vector<std::size_t>> sorted(kFeatureCount);
  for (Feature f : features) {
    auto& col = sorted[static_cast<std::size_t>(f)];
    col.resize(samples.size());
    std::iota(col.begin(), col.end(), std::size_t{0});
    std::stable_sort(col.begin(), col.end(),
                     [&](std::size_t a, std::size_t b) { return samples[a].features[f] < samples[b].features[f]; });
  }

  if (warnings) {
    bool identical = std::all_of(samples.begin(), samples.end(), [&](const LabeledSample& s) {
      return std::all_of(features.begin(), features.end(),
                         [&](Feature f) { return s.features[f] == samples.front().features[f]; });
    });
    bool conflicting = std::any_of(samples.begin(), samples.end(),
                                   [&](const LabeledSample& s) { return s.labels != samples.front().labels; });
    if (identical && conflicting)
      warnings->push_back("all feature vectors are identical but labels differ; trees reduce to majority leaves");
  }

  TreeModel model;
  model.features.assign(features.begin(), features.end());
  for (std::size_t label = 0; label < kTreeLabels; ++label)
    model.trees[label] = TreeBuilder(samples, features, sorted, params, label).build();
  return model;
}

ClassSet predict(const TreeModel& model, const FeatureVector& f) {
  for (Feature feat : model.features)
    if (!std::isfinite(f[feat]))
      throw std::invalid_argument("feature " + std::string(feature_name(feat)) + " is missing or not finite");
  ClassSet out;
  for (std::size_t label = 0; label < kNoneLabel; ++label)
    if (model.trees[label].predict_probability(f) > 0.5) out.insert(kAllBottlenecks[label]);
  return out;
}

bool exact_match(ClassSet predicted, ClassSet truth) { return predicted == truth; }

bool partial_match(ClassSet predicted, ClassSet truth) {
  if (predicted.empty() && truth.empty()) return true;
  return !(predicted & truth).empty();
}

EvalReport loo_evaluate(const std::vector<LabeledSample>& samples, std::span<const Feature> features,
                        const TreeParams& params) {
  if (samples.size() < 3) throw std::invalid_argument("leave-one-out evaluation needs at least 3 samples");
  EvalReport report;
  report.folds = samples.size();
  std::array<double, kTreeLabels> tp{}, fp{}, fn{};
  double exact = 0, partial = 0;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    std::vector<LabeledSample> train_set;
    train_set.reserve(samples.size() - 1);
    for (std::size_t i = 0; i < samples.size(); ++i)
      if (i != k) train_set.push_back(samples[i]);
    TreeModel model = train(train_set, features, params);
    ClassSet predicted = predict(model, samples[k].features);
    ClassSet truth = samples[k].labels;
    exact += exact_match(predicted, truth);
    partial += partial_match(predicted, truth);
    for (std::size_t label = 0; label < kTreeLabels; ++label) {
      bool p = has_label(predicted, label), t = has_label(truth, label);
      tp[label] += p && t;
      fp[label] += p && !t;
      fn[label] += !p && t;
    }
  }
  const double folds = static_cast<double>(samples.size());
  report.exact_match = exact / folds;
  report.partial_match = partial / folds;
  for (std::size_t label = 0; label < kTreeLabels; ++label) {
    report.per_class[label].precision = tp[label] + fp[label] > 0 ? tp[label] / (tp[label] + fp[label]) : 0.0;
    report.per_class[label].recall = tp[label] + fn[label] > 0 ? tp[label] / (tp[label] + fn[label]) : 0.0;
  }
  return report;
}

void save_model(const TreeModel& model, std::ostream& out) {
  out << kModelHeader << '\n';
  out << "features";
  for (std::size_t i = 0; i < model.features.size(); ++i)
    out << (i ? ',' : ' ') << feature_name(model.features[i]);
  out << '\n';
  for (std::size_t label = 0; label < kTreeLabels; ++label) {
    const BinaryTree& tree = model.trees[label];
    out << "tree " << tree_label_name(label) << " nodes=" << tree.nodes.size() << '\n';
    for (std::size_t id = 0; id < tree.nodes.size(); ++id) {
      const TreeNode& n = tree.nodes[id];
      if (n.is_leaf()) {
        out << "leaf " << id << " p=" << format_double(n.probability) << '\n';
      } else {
        out << "node " << id << " feat=" << feature_name(static_cast<Feature>(n.feature))
            << " thr=" << format_double(n.threshold) << " left=" << n.left << " right=" << n.right << '\n';
      }
    }
  }
  out << "end\n";
}

void save_model(const TreeModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write model file " + path.string());
  save_model(model, out);
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

namespace {

// "key=value" token; throws when the key does not match.
std::string field(const std::string& token, std::string_view key) {
  if (token.size() <= key.size() || token.compare(0, key.size(), key) != 0 || token[key.size()] != '=')
    throw ModelFormatError("expected '" + std::string(key) + "=' in '" + token + "'");
  return token.substr(key.size() + 1);
}

double parse_number(const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw ModelFormatError("malformed number '" + text + "'");
  }
  if (used != text.size()) throw ModelFormatError("malformed number '" + text + "'");
  return v;
}

int parse_id(const std::string& text) {
  double v = parse_number(text);
  if (v != std::floor(v) || v < 0 || v > 1e9) throw ModelFormatError("malformed node id '" + text + "'");
  return static_cast<int>(v);
}

}  // namespace

TreeModel load_model(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ModelFormatError("empty model file");
  if (line.rfind("spmv-tree-model ", 0) != 0) throw ModelFormatError("not a tree model file");
  if (line != kModelHeader) throw ModelFormatError("unsupported model version '" + line.substr(16) + "'");

  TreeModel model;
  if (!std::getline(in, line) || line.rfind("features ", 0) != 0) throw ModelFormatError("missing features line");
  model.features = parse_feature_subset(line.substr(9));

  for (std::size_t label = 0; label < kTreeLabels; ++label) {
    if (!std::getline(in, line)) throw ModelFormatError("truncated model: missing tree");
    std::istringstream head(line);
    std::string kw, name, count;
    head >> kw >> name >> count;
    if (kw != "tree" || name != tree_label_name(label)) throw ModelFormatError("expected tree " +
                                                                                std::string(tree_label_name(label)));
    const int nodes = parse_id(field(count, "nodes"));
    if (nodes < 1) throw ModelFormatError("tree without nodes");
    BinaryTree& tree = model.trees[label];
    tree.nodes.resize(static_cast<std::size_t>(nodes));
    for (int id = 0; id < nodes; ++id) {
      if (!std::getline(in, line)) throw ModelFormatError("truncated model: missing node");
      std::istringstream ls(line);
      std::string kind, id_s;
      ls >> kind >> id_s;
      if (parse_id(id_s) != id) throw ModelFormatError("node ids out of order");
      TreeNode& n = tree.nodes[static_cast<std::size_t>(id)];
      if (kind == "leaf") {
        std::string p;
        ls >> p;
        n.probability = parse_number(field(p, "p"));
        if (n.probability < 0.0 || n.probability > 1.0) throw ModelFormatError("leaf probability out of [0,1]");
      } else if (kind == "node") {
        std::string feat, thr, left, right;
        ls >> feat >> thr >> left >> right;
        auto f = feature_from_name(field(feat, "feat"));
        if (!f) throw ModelFormatError("unknown feature in '" + line + "'");
        if (std::find(model.features.begin(), model.features.end(), *f) == model.features.end())
          throw ModelFormatError("node uses a feature outside the model's subset");
        n.feature = static_cast<int>(*f);
        n.threshold = parse_number(field(thr, "thr"));
        n.left = parse_id(field(left, "left"));
        n.right = parse_id(field(right, "right"));
        if (n.left <= id || n.right <= id || n.left >= nodes || n.right >= nodes)
          throw ModelFormatError("child ids must follow their parent in preorder");
      } else {
        throw ModelFormatError("unexpected line '" + line + "'");
      }
    }
  }
  if (!std::getline(in, line) || line != "end") throw ModelFormatError("truncated model: missing end marker");
  return model;
}

TreeModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file " + path.string());
  return load_model(in);
}

namespace {

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cells.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cells.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.emplace_back();
    } else if (c != '\r') {
      cells.back() += c;
    }
  }
  return cells;
}

}  // namespace

void save_samples(const std::vector<LabeledSample>& samples, std::ostream& out) {
  out << "matrix_id," << feature_csv_header() << ",labels\n";
  for (const LabeledSample& s : samples)
    out << csv_quote(s.id) << ',' << feature_csv_row(s.features) << ',' << to_string(s.labels) << '\n';
}

void save_samples(const std::vector<LabeledSample>& samples, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  save_samples(samples, out);
}

std::vector<LabeledSample> load_samples(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty sample file");
  const std::string header = "matrix_id," + feature_csv_header() + ",labels";
  if (line != header) throw std::runtime_error("sample CSV header does not match the feature layout");
  std::vector<LabeledSample> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != kFeatureCount + 2)
      throw std::runtime_error("sample CSV line " + std::to_string(lineno) + ": wrong column count");
    LabeledSample s;
    s.id = cells[0];
    for (std::size_t i = 0; i < kFeatureCount; ++i) s.features.values[i] = std::stod(cells[i + 1]);
    s.labels = parse_class_set(cells.back());
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<LabeledSample> load_samples(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return load_samples(in);
}

}  // namespace spmvopt
