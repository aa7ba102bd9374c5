#pragma once

#include "missreg/dense_fit.hpp"
#include "missreg/glm.hpp"
#include "missreg/masked_matrix.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace missreg {

enum class ClassKind { static_linear, affine_intercept, affine, polynomial, finite };

struct FunctionClass {
  ClassKind kind = ClassKind::static_linear;
  /// Degree of the mask monomials (polynomial only).
  int t = 1;
  /// Stopping rules of the pattern partition (finite only).
  int max_depth = 4;
  Index min_leaf = 20;
  double min_gain = 1e-3;

  static FunctionClass static_linear() { return {ClassKind::static_linear}; }
  static FunctionClass affine_intercept() { return {ClassKind::affine_intercept}; }
  static FunctionClass affine() { return {ClassKind::affine}; }
  static FunctionClass polynomial(int t) { return {ClassKind::polynomial, t}; }
  static FunctionClass finite(int max_depth = 4, Index min_leaf = 20, double min_gain = 1e-3) {
    return {ClassKind::finite, 1, max_depth, min_leaf, min_gain};
  }

  [[nodiscard]] std::string name() const;
  /// "static", "affine_intercept", "affine", "polynomial:T", "finite".
  static FunctionClass parse(const std::string& s);
};

/// Column value x_base (1 - m_base) * prod_{k in monomial} m_k, or
/// prod_{k in monomial} m_k when base = -1.
struct ExpandedColumn {
  Index base = -1;
  std::vector<Index> monomial;

  friend bool operator==(const ExpandedColumn&, const ExpandedColumn&) = default;
};

struct ExpandedDesign {
  std::vector<ExpandedColumn> columns;
  Eigen::MatrixXd matrix;

  [[nodiscard]] Index size() const { return static_cast<Index>(columns.size()); }
};

/// Column list of a class on d features. `affine_intercepts` adds the d
/// intercept terms m_k to the affine class.
std::vector<ExpandedColumn> expansion_columns(Index d, const FunctionClass& cls, bool affine_intercepts = false);
Eigen::MatrixXd expand_matrix(const Eigen::MatrixXd& values, const Mask& mask,
                              const std::vector<ExpandedColumn>& columns);
Eigen::RowVectorXd expand_row(const Eigen::MatrixXd& values, const Mask& mask, Index row,
                              const std::vector<ExpandedColumn>& columns);
ExpandedDesign expand(const MaskedMatrix& x, const FunctionClass& cls, bool affine_intercepts = false);

struct AdaptiveSpec {
  Task task = Task::regression;
  GlmGrid grid;
  int folds = 5;
  std::uint64_t seed = 1;
  /// phi_k = sqrt(n / n_k) on columns with a mask monomial.
  bool scale_penalties = true;
  /// Extra multiplier on the penalty of mask-derived columns, chosen by CV.
  std::vector<double> gamma_grid{1.0};
  bool affine_intercepts = false;
  /// Finite class: depths tried by CV (empty: the class max_depth only) and
  /// whether leaf models are refit with CV (else by least squares).
  std::vector<int> finite_depths;
  bool final_leaf_cv = true;
};

struct PartitionNode {
  /// Mask bit the node splits on; -1 at a leaf.
  Index feature = -1;
  int child_observed = -1;
  int child_missing = -1;
  /// Index into leaf_fits at a leaf.
  int leaf = -1;
  Index n_samples = 0;
  int depth = 0;
};

struct AdaptiveLinearModel {
  FunctionClass cls;
  Index d = 0;
  Task task = Task::regression;
  /// Non-finite classes: the expansion and one fit over it.
  std::vector<ExpandedColumn> columns;
  GlmFit fit;
  /// Finite class: pattern partition with a static model per leaf.
  std::vector<PartitionNode> partition;
  std::vector<GlmFit> leaf_fits;
  double gamma = 1.0;
  /// Fold-mean validation squared error of the selected configuration.
  double cv_mse = 0.0;

  /// Mean response for every row; masked cells are never read.
  [[nodiscard]] Eigen::VectorXd predict(const Eigen::MatrixXd& values, const Mask& mask) const;
  [[nodiscard]] Eigen::VectorXd predict(const MaskedMatrix& x) const { return predict(x.raw_values(), x.mask()); }
  /// Linear score b(m) + <w(m), x>_m for one row.
  [[nodiscard]] double score_row(const Eigen::MatrixXd& values, const Mask& mask, Index row) const;
  [[nodiscard]] int leaf_of(const Mask& mask, Index row) const;
};

/// The pattern-specific linear rule f(x, m) = b(m) + <w(m), x>_m.
struct PatternWeights {
  Eigen::VectorXd w;
  double b = 0.0;
};
PatternWeights weights_for(const AdaptiveLinearModel& model, const Pattern& m);

/// Expands, scales penalties, and fits by cross-validated elastic net.
/// Finite classes are delegated to fit_finite.
AdaptiveLinearModel fit_adaptive(const MaskedMatrix& x, const TargetVector& y, const FunctionClass& cls,
                                 const AdaptiveSpec& spec);

/// Recursive partitioning of pattern space with one static model per cell.
AdaptiveLinearModel fit_finite(const MaskedMatrix& x, const TargetVector& y, const FunctionClass& cls,
                               const AdaptiveSpec& spec);

/// CV selection among affine_intercept, affine (with adaptive intercepts)
/// and finite on shared folds.
AdaptiveLinearModel fit_adaptive_best(const MaskedMatrix& x, const TargetVector& y, const AdaptiveSpec& spec);

struct DerivedImputation {
  Eigen::VectorXd mu;
  /// Coordinates where |w_j| < 1e-12 and mu is undefined.
  std::vector<bool> undefined;
};

/// mu_j = b_j / w_j of an affine_intercept model.
DerivedImputation to_imputation(const AdaptiveLinearModel& model);

}  // namespace missreg
