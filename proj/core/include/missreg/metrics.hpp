#pragma once

#include <Eigen/Dense>

namespace missreg {

/// 1 - SSE / SST around the mean of y_true. Throws on constant y_true.
double r2(const Eigen::VectorXd& y_true, const Eigen::VectorXd& y_pred);
double mse(const Eigen::VectorXd& y_true, const Eigen::VectorXd& y_pred);
/// Mann-Whitney AUC, ties counted one half. Throws unless both classes occur.
double auc(const Eigen::VectorXd& y_true, const Eigen::VectorXd& scores);
/// 2 AUC - 1.
double auc_norm(const Eigen::VectorXd& y_true, const Eigen::VectorXd& scores);
/// Fraction of rows where (score >= threshold) matches the 0/1 label.
double accuracy(const Eigen::VectorXd& y_true, const Eigen::VectorXd& scores, double threshold = 0.5);

}  // namespace missreg
