#pragma once

#include "missreg/glm.hpp"
#include "missreg/masked_matrix.hpp"
#include "missreg/tree.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace missreg {

enum class Family { linear, tree, forest };
/// A fixed family, or `best`: CV selection among the three families.
enum class DownstreamKind { linear, tree, forest, best };

std::string to_string(Family f);
std::string to_string(DownstreamKind k);
Family parse_family(const std::string& s);
DownstreamKind parse_downstream_kind(const std::string& s);

struct DownstreamOptions {
  Task task = Task::regression;
  int folds = 5;
  std::uint64_t seed = 1;
  GlmGrid glm_grid;
  std::vector<int> tree_depths{2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::vector<int> forest_trees{50, 100};
  std::vector<int> forest_depths{4, 5, 6, 7, 8, 9, 10};
  int min_samples_leaf = 5;
  /// Trees and forests split on masked cells (MIA) instead of rejecting them.
  bool mia = false;
};

/// A family with its cross-validated hyper-parameters.
struct DownstreamChoice {
  Family family = Family::linear;
  GlmSpec glm;
  TreeSpec tree;
  ForestSpec forest;
  /// Fold-mean validation squared error (Brier score for binary targets).
  double cv_mse = 0.0;
};

/// Cross-validates the hyper-parameters of each candidate family on shared
/// folds and keeps the family with the lowest CV squared error (ties go to
/// linear, then tree, then forest).
DownstreamChoice select_downstream(const Eigen::MatrixXd& x, const Mask* mask, const Eigen::VectorXd& y,
                                   DownstreamKind kind, const DownstreamOptions& options);

class Downstream {
 public:
  Family family = Family::linear;
  Task task = Task::regression;
  GlmFit glm;
  Tree tree;
  Forest forest;

  /// Mean response: regression value or class-1 probability.
  [[nodiscard]] Eigen::VectorXd predict(const Eigen::MatrixXd& x, const Mask* mask = nullptr) const;
};

Downstream fit_downstream(const Eigen::MatrixXd& x, const Mask* mask, const Eigen::VectorXd& y,
                          const DownstreamChoice& choice, Task task);

/// select_downstream followed by fit_downstream.
Downstream fit_downstream_cv(const Eigen::MatrixXd& x, const Mask* mask, const Eigen::VectorXd& y,
                             DownstreamKind kind, const DownstreamOptions& options, DownstreamChoice* chosen = nullptr);

}  // namespace missreg
