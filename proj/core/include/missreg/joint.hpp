#pragma once

#include "missreg/downstream.hpp"
#include "missreg/masked_matrix.hpp"

#include <vector>

namespace missreg {

struct JointConfig {
  DownstreamKind downstream = DownstreamKind::linear;
  DownstreamOptions options;
  int max_outer = 20;
  int max_inner_passes = 10;
  double min_rel_improve = 1e-4;

  void validate() const;
};

/// Constant imputation vector mu trained jointly with a downstream predictor.
struct JointModel {
  Eigen::VectorXd mu;
  Eigen::VectorXd step;
  Downstream predictor;
  DownstreamChoice choice;
  /// Training error after each refit and each accepted coordinate move.
  std::vector<double> error_trace;
  /// Index into error_trace where each outer iteration starts.
  std::vector<std::size_t> outer_starts;
  double train_error = 0.0;

  [[nodiscard]] Eigen::MatrixXd impute(const Eigen::MatrixXd& values, const Mask& mask) const;
  [[nodiscard]] Eigen::VectorXd predict(const Eigen::MatrixXd& values, const Mask& mask) const;
  [[nodiscard]] Eigen::VectorXd predict(const MaskedMatrix& x) const { return predict(x.raw_values(), x.mask()); }
};

/// Training error: mean squared error, or 1 - AUC for binary targets.
double joint_error(Task task, const Eigen::VectorXd& y, const Eigen::VectorXd& pred);

/// Alternates between refitting the predictor on X^mu and a cyclic +/- step
/// search on each coordinate of mu with the predictor held fixed. Returns the
/// best (mu, predictor) pair visited. With DownstreamKind::best each family is
/// tuned on the mean-imputed matrix and the family whose joint fit has the
/// lowest K-fold validation squared error is kept.
JointModel fit_joint(const MaskedMatrix& x, const TargetVector& y, const JointConfig& config);

}  // namespace missreg
