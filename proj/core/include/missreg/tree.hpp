#pragma once

#include "missreg/masked_matrix.hpp"
#include "missreg/rng.hpp"

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace missreg {

enum class SplitCriterion { variance, gini };
enum class MissingGoes { left, right };

struct TreeSpec {
  int max_depth = 6;
  int min_samples_leaf = 5;
  SplitCriterion criterion = SplitCriterion::variance;
  /// Missingness incorporated in attributes: masked cells take part in split
  /// selection instead of being rejected.
  bool mia = false;
  /// Features tried per split; 0 means all.
  int mtry = 0;

  void validate() const;
};

struct TreeNode {
  int feature = -1;
  /// Observed values <= threshold go left; +inf separates observed (left)
  /// from missing (right).
  double threshold = 0.0;
  MissingGoes missing = MissingGoes::left;
  int left = -1;
  int right = -1;
  /// Leaf prediction: mean target (class-1 frequency for binary targets).
  double value = 0.0;
  Index n_samples = 0;
  int depth = 0;
  double impurity_decrease = 0.0;

  [[nodiscard]] bool is_leaf() const { return feature < 0; }
};

class Tree {
 public:
  std::vector<TreeNode> nodes;
  bool mia = false;

  /// Index of the node reached by row i, stopping at depth max_depth when
  /// it is non-negative.
  [[nodiscard]] int leaf_of(const Eigen::MatrixXd& x, const Mask* mask, Index i, int max_depth = -1) const;
  /// Plain trees reject masked cells on their path; MIA trees follow the
  /// stored missing side. A non-negative max_depth evaluates the tree
  /// truncated at that depth.
  [[nodiscard]] Eigen::VectorXd predict(const Eigen::MatrixXd& x, const Mask* mask = nullptr, int max_depth = -1) const;
  [[nodiscard]] double predict_row(const Eigen::MatrixXd& x, const Mask* mask, Index i) const {
    return nodes[static_cast<std::size_t>(leaf_of(x, mask, i))].value;
  }
  [[nodiscard]] int depth() const;
  [[nodiscard]] int n_leaves() const;
};

struct SplitCandidate {
  int feature = -1;
  double threshold = 0.0;
  MissingGoes missing = MissingGoes::left;
  /// Reduction of the summed squared error (times 2 for gini).
  double decrease = 0.0;
  Index n_left = 0;
  Index n_right = 0;
};

/// Every admissible split of the node holding `rows`, in evaluation order
/// (feature, threshold, missing left before right).
std::vector<SplitCandidate> enumerate_splits(const Eigen::MatrixXd& x, const Mask* mask, const Eigen::VectorXd& y,
                                             const std::vector<Index>& rows, const TreeSpec& spec,
                                             const std::vector<Index>* features = nullptr);

Tree fit_tree(const Eigen::MatrixXd& x, const Mask* mask, const Eigen::VectorXd& y, const TreeSpec& spec,
              std::uint64_t seed = 0);
/// Grows a tree on the given (possibly repeated) rows. When spec.mtry is
/// set, the features tried at a node are drawn from a stream derived from
/// `seed` and the node's position, so a tree truncated at depth k equals the
/// tree grown with max_depth = k.
Tree fit_tree_on_rows(const Eigen::MatrixXd& x, const Mask* mask, const Eigen::VectorXd& y, const TreeSpec& spec,
                      std::vector<Index> rows, std::uint64_t seed);

struct ForestSpec {
  int n_trees = 100;
  TreeSpec tree;
  double feature_fraction = 1.0 / 3.0;
  bool bootstrap = true;
  std::uint64_t seed = 1;

  void validate() const;
};

class Forest {
 public:
  std::vector<Tree> trees;

  /// Mean of the first `n_first` trees (all when 0), each optionally
  /// truncated at max_depth.
  [[nodiscard]] Eigen::VectorXd predict(const Eigen::MatrixXd& x, const Mask* mask = nullptr, int n_first = 0,
                                        int max_depth = -1) const;
};

/// Tree t uses seed derive_seed({spec.seed, t}) for its bootstrap sample and
/// feature draws; mtry = max(1, round(d * feature_fraction)).
Forest fit_forest(const Eigen::MatrixXd& x, const Mask* mask, const Eigen::VectorXd& y, const ForestSpec& spec);

}  // namespace missreg
