#pragma once

#include <Eigen/Dense>

namespace missreg {

/// Affine model b0 + x·beta from a closed-form or Newton fit.
struct DenseFit {
  double intercept = 0.0;
  Eigen::VectorXd beta;

  [[nodiscard]] Eigen::VectorXd predict(const Eigen::MatrixXd& x) const {
    return (x * beta).array() + intercept;
  }
};

/// argmin (1/2n)||y - b0 - X beta||^2 + (ridge/2)||beta||^2, intercept
/// unpenalized. ridge = 0 gives the minimum-norm least-squares solution.
DenseFit ridge_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double ridge);

/// Penalized logistic regression by Newton iterations; y in {0,1}.
DenseFit logistic_ridge_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double ridge, int max_iter = 50);

/// Sum of squared residuals of `fit` on (x, y).
double sse(const DenseFit& fit, const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

}  // namespace missreg
