#pragma once

#include "missreg/masked_matrix.hpp"
#include "missreg/rng.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace missreg {

enum class Loss { squared, logistic };

std::string to_string(Loss l);

/// Elastic-net problem settings. With standardize = true the penalty acts on
/// coefficients of unit-variance columns (glmnet convention) and reported
/// coefficients are mapped back to original units.
struct GlmSpec {
  Loss loss = Loss::squared;
  double lambda = 0.0;
  /// Mixing: 1 is the lasso, 0 is ridge.
  double alpha = 1.0;
  /// Per-column multipliers; empty means all ones, +inf pins a coefficient at 0.
  Eigen::VectorXd penalty_factors;
  bool standardize = true;
  int max_iter = 100000;
  double tol = 1e-7;
  bool intercept = true;

  void validate(Index p) const;
};

struct GlmFit {
  Loss loss = Loss::squared;
  Eigen::VectorXd beta;
  double intercept = 0.0;
  /// Objective (standardized coordinates) after every coordinate sweep for
  /// squared loss, after every reweighting step for logistic loss.
  std::vector<double> objective_trace;
  bool converged = false;
  int iterations = 0;

  [[nodiscard]] Eigen::VectorXd linear_predictor(const Eigen::MatrixXd& x) const;
  /// Mean response: identity for squared loss, probability for logistic.
  [[nodiscard]] Eigen::VectorXd predict(const Eigen::MatrixXd& x) const;
};

/// Fits the elastic-net GLM by cyclic coordinate descent with active-set
/// cycling. Returns converged = false if max_iter sweeps were exhausted.
GlmFit fit_glm(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const GlmSpec& spec);

/// Objective of spec at fit, evaluated in the solver's (standardized)
/// coordinates.
double glm_objective(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const GlmSpec& spec, const GlmFit& fit);

/// Largest violation of the optimality conditions in standardized coordinates:
/// |g_j| - lambda alpha phi_j for zero coefficients, and the subgradient
/// residual for non-zero ones.
double kkt_violation(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const GlmSpec& spec, const GlmFit& fit);

/// Smallest lambda at which every penalized coefficient is zero (alpha is
/// floored at 1e-3).
double lambda_max(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const GlmSpec& spec);

/// phi_k = sqrt(n / n_k) where n_k counts the rows on which the product of
/// the mask bits in monomials[k] equals 1 (an empty monomial is always
/// active). n_k = 0 gives +inf.
Eigen::VectorXd scaled_penalty_factors(const Mask& mask, const std::vector<std::vector<Index>>& monomials);

struct GlmGrid {
  std::vector<double> alphas{0.0, 0.5, 1.0};
  int n_lambda = 30;
  double lambda_min_ratio = 1e-4;
  /// Explicit lambda values (descending); overrides the generated sequence.
  std::vector<double> lambdas;
  /// When a fold has at least as many columns as rows, stop its path once the
  /// training deviance ratio exceeds 0.999 or improves by less than 1e-5
  /// (relative); later lambdas are then skipped.
  bool early_stop = true;
  /// Stopping rule for fold fits and warm-start steps of the refit: a sweep
  /// is final once max_j h_jj d_j^2 < path_tol * var(y) (h_jj the coordinate
  /// curvature, d_j the update). 0 keeps the coefficient-change rule. The
  /// refit at the chosen lambda always uses the coefficient-change rule.
  double path_tol = 1e-7;
};

struct CvResult {
  GlmSpec best;
  GlmFit fit;
  /// Fold-mean validation loss (MSE or mean deviance) of the winner.
  double cv_loss = 0.0;
  /// Fold-mean validation squared error of the winner's mean response.
  double cv_mse = 0.0;
  /// loss_table(a, k): fold-mean loss at alphas[a], lambdas[a][k].
  Eigen::MatrixXd loss_table;
  std::vector<std::vector<double>> lambdas;
};

/// Grid search over (lambda, alpha) by K-fold CV; ties go to the larger
/// lambda, then the earlier alpha. The winner is refit on all rows.
CvResult cv_path(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const GlmSpec& base, const GlmGrid& grid,
                 const std::vector<FoldSplit>& folds);
CvResult cv_path(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const GlmSpec& base, const GlmGrid& grid,
                 int n_folds, std::uint64_t seed);

}  // namespace missreg
