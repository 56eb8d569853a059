#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "spmvopt/class_set.hpp"
#include "spmvopt/features.hpp"

namespace spmvopt {

/// Binary-relevance targets: the four bottlenecks plus NONE, the class of
/// matrices not worth optimizing.
inline constexpr std::size_t kTreeLabels = 5;
inline constexpr std::size_t kNoneLabel = 4;
std::string_view tree_label_name(std::size_t label);

struct LabeledSample {
  std::string id;
  FeatureVector features;
  ClassSet labels;  ///< empty = NONE
};

/// True when `labels` holds the given tree label (NONE holds for the empty set).
bool has_label(ClassSet labels, std::size_t label);

struct TreeNode {
  /// Leaf when feature < 0.
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  /// Fraction of positive training samples (leaves only).
  double probability = 0.0;

  bool is_leaf() const { return feature < 0; }
};

/// Nodes in preorder; node 0 is the root. Samples with value <= threshold go left.
struct BinaryTree {
  std::vector<TreeNode> nodes;

  double predict_probability(const FeatureVector& f) const;
  std::size_t depth() const;
};

struct TreeModel {
  std::vector<Feature> features;
  std::array<BinaryTree, kTreeLabels> trees;
};

inline constexpr std::size_t kUnlimitedDepth = std::numeric_limits<std::size_t>::max();

struct TreeParams {
  std::size_t max_depth = 8;
  std::size_t min_leaf = 3;
};

/// Named feature subsets. "preset-n" needs one pass over the rows,
/// "preset-nnz" one pass over the nonzeros.
std::vector<Feature> feature_preset(std::string_view name);
/// A preset name or a comma-separated list of feature names.
std::vector<Feature> parse_feature_subset(std::string_view text);

class TrainingError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// One Gini CART tree per label. Splits maximize the impurity decrease over
/// every midpoint between adjacent distinct values of every feature in the
/// subset; ties go to the lower feature index, then the lower threshold. A
/// node becomes a leaf at max_depth, when pure, or when no split with
/// positive gain leaves min_leaf samples on both sides.
TreeModel train(const std::vector<LabeledSample>& samples, std::span<const Feature> features,
                const TreeParams& params, std::vector<std::string>* warnings = nullptr);

/// A class is predicted when its tree's leaf probability exceeds 0.5. NONE is
/// never reported; it only matters through the other trees staying silent.
/// Throws std::invalid_argument when a used feature is not finite.
ClassSet predict(const TreeModel& model, const FeatureVector& f);

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
};

struct EvalReport {
  double exact_match = 0.0;
  double partial_match = 0.0;
  std::array<ClassMetrics, kTreeLabels> per_class{};
  std::size_t folds = 0;
};

/// Predicted set equals the truth.
bool exact_match(ClassSet predicted, ClassSet truth);
/// Predicted set shares at least one class with the truth (NONE included).
bool partial_match(ClassSet predicted, ClassSet truth);

/// Leave-one-out cross validation; needs at least 3 samples.
EvalReport loo_evaluate(const std::vector<LabeledSample>& samples, std::span<const Feature> features,
                        const TreeParams& params);

class ModelFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void save_model(const TreeModel& model, std::ostream& out);
void save_model(const TreeModel& model, const std::filesystem::path& path);
/// Throws ModelFormatError on a version mismatch or a corrupt/truncated file.
TreeModel load_model(std::istream& in);
TreeModel load_model(const std::filesystem::path& path);

/// CSV with columns matrix_id, the features in canonical order, labels.
void save_samples(const std::vector<LabeledSample>& samples, std::ostream& out);
void save_samples(const std::vector<LabeledSample>& samples, const std::filesystem::path& path);
std::vector<LabeledSample> load_samples(std::istream& in);
std::vector<LabeledSample> load_samples(const std::filesystem::path& path);

}  // namespace spmvopt
