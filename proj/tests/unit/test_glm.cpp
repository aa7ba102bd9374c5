#include "missreg/glm.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

using namespace missreg;

namespace {

const double kInfinity = std::numeric_limits<double>::infinity();

struct Data {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
};

Data gaussian(Index n, Index p, std::uint64_t seed, double noise = 0.5) {
  Rng rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  Data d{Eigen::MatrixXd(n, p), Eigen::VectorXd(n)};
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < p; ++j) d.x(i, j) = z(rng) * (1.0 + j);
  Eigen::VectorXd w(p);
  for (Index j = 0; j < p; ++j) w(j) = (j % 2 ? -1.0 : 1.0) / (1.0 + j);
  for (Index i = 0; i < n; ++i) d.y(i) = 0.7 + d.x.row(i).dot(w) + noise * z(rng);
  return d;
}

double soft(double z, double g) { return z > g ? z - g : (z < -g ? z + g : 0.0); }

// Four rows with mean 0 and mean square 1.
Eigen::MatrixXd unit_column() {
  Eigen::MatrixXd x(4, 1);
  x << -1, 1, -1, 1;
  return x;
}

}  // namespace

TEST(Glm, ZeroLambdaIsLeastSquares) {
  const Data d = gaussian(80, 5, 1);
  GlmSpec spec;
  spec.lambda = 0.0;
  spec.tol = 1e-12;
  const GlmFit fit = fit_glm(d.x, d.y, spec);
  Eigen::MatrixXd a(80, 6);
  a << Eigen::VectorXd::Ones(80), d.x;
  const Eigen::VectorXd ols = a.colPivHouseholderQr().solve(d.y);
  EXPECT_NEAR(fit.intercept, ols(0), 1e-8);
  for (Index j = 0; j < 5; ++j) EXPECT_NEAR(fit.beta(j), ols(j + 1), 1e-8);
  EXPECT_TRUE(fit.converged);
}

TEST(Glm, HugeLambdaGivesMeanOnly) {
  const Data d = gaussian(50, 4, 2);
  for (double alpha : {0.0, 0.5, 1.0}) {
    GlmSpec spec;
    spec.alpha = alpha;
    spec.lambda = 1e12;
    const GlmFit fit = fit_glm(d.x, d.y, spec);
    EXPECT_LT(fit.beta.cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_NEAR(fit.intercept, d.y.mean(), 1e-9);
  }
}

TEST(Glm, LambdaMaxIsTheZeroThreshold) {
  const Data d = gaussian(60, 6, 3);
  GlmSpec spec;
  spec.lambda = lambda_max(d.x, d.y, spec);
  EXPECT_EQ(fit_glm(d.x, d.y, spec).beta.cwiseAbs().maxCoeff(), 0.0);
  spec.lambda *= 0.99;
  EXPECT_GT(fit_glm(d.x, d.y, spec).beta.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Glm, OneDimensionalSoftThreshold) {
  const Eigen::MatrixXd x = unit_column();
  Eigen::VectorXd y(4);
  y << 0.3, 2.1, -0.4, 1.0;
  const double c = x.col(0).dot(y) / 4.0;
  for (double lam : {0.0, 0.1, 0.5, 2.0}) {
    GlmSpec spec;
    spec.standardize = false;
    spec.lambda = lam;
    spec.alpha = 1.0;
    EXPECT_NEAR(fit_glm(x, y, spec).beta(0), soft(c, lam), 1e-12);
    spec.alpha = 0.0;
    EXPECT_NEAR(fit_glm(x, y, spec).beta(0), c / (1.0 + lam), 1e-12);
    spec.alpha = 0.5;
    EXPECT_NEAR(fit_glm(x, y, spec).beta(0), soft(c, 0.5 * lam) / (1.0 + 0.5 * lam), 1e-12);
  }
}

TEST(Glm, PenaltyFactorScalesThreshold) {
  const Eigen::MatrixXd x = unit_column();
  Eigen::VectorXd y(4);
  y << 0.3, 2.1, -0.4, 1.0;
  const double c = x.col(0).dot(y) / 4.0;
  GlmSpec spec;
  spec.standardize = false;
  spec.lambda = 0.2;
  spec.penalty_factors = Eigen::VectorXd::Constant(1, 1.0);
  EXPECT_NEAR(fit_glm(x, y, spec).beta(0), soft(c, 0.2), 1e-12);
  spec.penalty_factors(0) = 2.0;
  EXPECT_NEAR(fit_glm(x, y, spec).beta(0), soft(c, 0.4), 1e-12);
  spec.penalty_factors(0) = kInfinity;
  EXPECT_EQ(fit_glm(x, y, spec).beta(0), 0.0);
}

TEST(Glm, ZeroPenaltyFactorLeavesColumnUnpenalized) {
  const Data d = gaussian(100, 3, 4);
  GlmSpec spec;
  spec.lambda = 1e6;
  spec.penalty_factors = Eigen::VectorXd::Constant(3, 1.0);
  spec.penalty_factors(2) = 0.0;
  const GlmFit fit = fit_glm(d.x, d.y, spec);
  EXPECT_EQ(fit.beta(0), 0.0);
  EXPECT_NE(fit.beta(2), 0.0);
}

TEST(Glm, KktHoldsAcrossRandomProblems) {
  for (std::uint64_t seed = 10; seed < 30; ++seed) {
    const Data d = gaussian(60, 8, seed);
    GlmSpec spec;
    spec.alpha = double(seed % 3) / 2.0;
    spec.lambda = lambda_max(d.x, d.y, spec) * std::pow(10.0, -double(seed % 4));
    spec.tol = 1e-10;
    const GlmFit fit = fit_glm(d.x, d.y, spec);
    EXPECT_TRUE(fit.converged);
    EXPECT_LT(kkt_violation(d.x, d.y, spec, fit), 1e-6) << "seed " << seed;
  }
}

TEST(Glm, ObjectiveTraceIsMonotone) {
  const Data d = gaussian(40, 30, 5);
  GlmSpec spec;
  spec.alpha = 0.5;
  spec.lambda = 0.01;
  const GlmFit fit = fit_glm(d.x, d.y, spec);
  ASSERT_FALSE(fit.objective_trace.empty());
  for (std::size_t k = 1; k < fit.objective_trace.size(); ++k)
    EXPECT_LE(fit.objective_trace[k], fit.objective_trace[k - 1] + 1e-12);
  EXPECT_NEAR(fit.objective_trace.back(), glm_objective(d.x, d.y, spec, fit), 1e-9);
}

TEST(Glm, StandardizationMakesFitScaleInvariant) {
  const Data d = gaussian(70, 4, 6);
  Eigen::MatrixXd scaled = d.x;
  scaled.col(1) *= 1000.0;
  GlmSpec spec;
  spec.lambda = 0.05;
  spec.tol = 1e-12;
  const GlmFit a = fit_glm(d.x, d.y, spec), b = fit_glm(scaled, d.y, spec);
  EXPECT_NEAR(a.beta(1), b.beta(1) * 1000.0, 1e-8);
  EXPECT_LT((a.predict(d.x) - b.predict(scaled)).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Glm, ConstantColumnGetsZeroCoefficient) {
  Data d = gaussian(30, 3, 7);
  d.x.col(1).setConstant(4.0);
  const GlmFit fit = fit_glm(d.x, d.y, GlmSpec{});
  EXPECT_EQ(fit.beta(1), 0.0);
}

TEST(Glm, LogisticMatchesKktAndStaysInRange) {
  Rng rng(8);
  std::normal_distribution<double> z(0.0, 1.0);
  Eigen::MatrixXd x(200, 3);
  Eigen::VectorXd y(200);
  for (Index i = 0; i < 200; ++i) {
    for (Index j = 0; j < 3; ++j) x(i, j) = z(rng);
    y(i) = x(i, 0) - 0.5 * x(i, 2) + 0.8 * z(rng) > 0 ? 1.0 : 0.0;
  }
  GlmSpec spec;
  spec.loss = Loss::logistic;
  spec.lambda = 0.01;
  spec.tol = 1e-10;
  const GlmFit fit = fit_glm(x, y, spec);
  EXPECT_TRUE(fit.converged);
  EXPECT_LT(kkt_violation(x, y, spec, fit), 1e-6);
  const Eigen::VectorXd p = fit.predict(x);
  EXPECT_GT(p.minCoeff(), 0.0);
  EXPECT_LT(p.maxCoeff(), 1.0);
  EXPECT_GT(fit.beta(0), 0.0);
  EXPECT_LT(fit.beta(2), 0.0);
}

TEST(Glm, InvalidSpecsRejected) {
  const Data d = gaussian(10, 2, 9);
  GlmSpec spec;
  spec.alpha = 1.5;
  EXPECT_ANY_THROW(fit_glm(d.x, d.y, spec));
  spec = GlmSpec{};
  spec.lambda = -1;
  EXPECT_ANY_THROW(fit_glm(d.x, d.y, spec));
  spec = GlmSpec{};
  spec.penalty_factors = Eigen::VectorXd::Ones(3);
  EXPECT_THROW(fit_glm(d.x, d.y, spec), DimensionError);
}

TEST(ScaledPenalty, SqrtOfInverseActiveFraction) {
  Mask m(4, 2);
  m << true, false, true, true, false, false, false, true;
  const Eigen::VectorXd phi = scaled_penalty_factors(m, {{}, {0}, {1}, {0, 1}});
  EXPECT_DOUBLE_EQ(phi(0), 1.0);
  EXPECT_DOUBLE_EQ(phi(1), std::sqrt(2.0));
  EXPECT_DOUBLE_EQ(phi(2), std::sqrt(2.0));
  EXPECT_DOUBLE_EQ(phi(3), 2.0);
  const Eigen::VectorXd none = scaled_penalty_factors(Mask::Constant(3, 1, false), {{0}});
  EXPECT_TRUE(std::isinf(none(0)));
}

TEST(CvPath, RefitMatchesDirectFitAtChosenSpec) {
  const Data d = gaussian(120, 6, 11);
  const CvResult cv = cv_path(d.x, d.y, GlmSpec{}, GlmGrid{}, 5, 3);
  ASSERT_TRUE(std::isfinite(cv.cv_loss));
  GlmSpec spec = cv.best;
  spec.tol = 1e-12;
  const GlmFit direct = fit_glm(d.x, d.y, spec);
  EXPECT_LT((direct.predict(d.x) - cv.fit.predict(d.x)).cwiseAbs().maxCoeff(), 1e-5);
  EXPECT_TRUE(cv.fit.converged);
}

TEST(CvPath, Deterministic) {
  const Data d = gaussian(60, 4, 12);
  const CvResult a = cv_path(d.x, d.y, GlmSpec{}, GlmGrid{}, 5, 7);
  const CvResult b = cv_path(d.x, d.y, GlmSpec{}, GlmGrid{}, 5, 7);
  EXPECT_EQ(a.best.lambda, b.best.lambda);
  EXPECT_EQ(a.best.alpha, b.best.alpha);
  EXPECT_EQ(a.fit.beta, b.fit.beta);
}

TEST(CvPath, TiesGoToLargestLambdaAndFirstAlpha) {
  // Every column is constant, so every grid point predicts the fold mean.
  const Eigen::MatrixXd x = Eigen::MatrixXd::Ones(40, 2);
  Eigen::VectorXd y = Eigen::VectorXd::LinSpaced(40, 0.0, 1.0);
  const CvResult cv = cv_path(x, y, GlmSpec{}, GlmGrid{}, 5, 1);
  EXPECT_EQ(cv.best.alpha, 0.0);
  EXPECT_EQ(cv.best.lambda, cv.lambdas[0][0]);
}

TEST(CvPath, PureNoiseKeepsModelSmall) {
  Rng rng(13);
  std::normal_distribution<double> z(0.0, 1.0);
  Eigen::MatrixXd x(200, 5);
  Eigen::VectorXd y(200);
  for (Index i = 0; i < 200; ++i) {
    for (Index j = 0; j < 5; ++j) x(i, j) = z(rng);
    y(i) = z(rng);
  }
  GlmGrid grid;
  grid.alphas = {1.0};
  const CvResult cv = cv_path(x, y, GlmSpec{}, grid, 5, 2);
  EXPECT_GT(cv.best.lambda, 0.05 * cv.lambdas[0][0]);
  EXPECT_LT(cv.fit.beta.cwiseAbs().maxCoeff(), 0.1);
}

TEST(CvPath, ExplicitLambdasOverrideSequence) {
  const Data d = gaussian(50, 3, 14);
  GlmGrid grid;
  grid.lambdas = {0.5, 0.05};
  const CvResult cv = cv_path(d.x, d.y, GlmSpec{}, grid, 5, 1);
  for (const auto& seq : cv.lambdas) EXPECT_EQ(seq, grid.lambdas);
  EXPECT_EQ(cv.loss_table.cols(), 2);
}
