#include "missreg/metrics.hpp"
#include "missreg/stats.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

using namespace missreg;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(Eigen::Index(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

double upper_normal(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

}  // namespace

TEST(Metrics, R2Examples) {
  EXPECT_DOUBLE_EQ(r2(vec({1, 2, 3}), vec({1, 2, 3})), 1.0);
  EXPECT_DOUBLE_EQ(r2(vec({1, 2, 3}), vec({1, 2, 4})), 0.5);
  EXPECT_DOUBLE_EQ(r2(vec({1, 2, 3}), vec({2, 2, 2})), 0.0);
  EXPECT_ANY_THROW(r2(vec({1, 1}), vec({1, 2})));
  EXPECT_DOUBLE_EQ(mse(vec({0, 0}), vec({1, 3})), 5.0);
}

TEST(Metrics, AucExamples) {
  const Eigen::VectorXd y = vec({0, 0, 1, 1});
  EXPECT_DOUBLE_EQ(auc(y, vec({0.1, 0.2, 0.3, 0.4})), 1.0);
  EXPECT_DOUBLE_EQ(auc(y, vec({0.4, 0.3, 0.2, 0.1})), 0.0);
  EXPECT_DOUBLE_EQ(auc(y, vec({0.5, 0.5, 0.5, 0.5})), 0.5);
  EXPECT_DOUBLE_EQ(auc_norm(y, vec({0.5, 0.5, 0.5, 0.5})), 0.0);
  EXPECT_DOUBLE_EQ(auc(y, vec({0.1, 0.3, 0.3, 0.4})), 0.875);
  EXPECT_ANY_THROW(auc(vec({1, 1}), vec({0.1, 0.2})));
  EXPECT_ANY_THROW(auc(vec({0, 2}), vec({0.1, 0.2})));
}

TEST(Metrics, AucMatchesPairCount) {
  const Eigen::VectorXd y = vec({1, 0, 1, 0, 0, 1, 1, 0});
  const Eigen::VectorXd s = vec({0.9, 0.8, 0.8, 0.1, 0.4, 0.3, 0.7, 0.7});
  double wins = 0, pairs = 0;
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j)
      if (y(i) == 1 && y(j) == 0) {
        pairs += 1;
        wins += s(i) > s(j) ? 1.0 : (s(i) == s(j) ? 0.5 : 0.0);
      }
  EXPECT_DOUBLE_EQ(auc(y, s), wins / pairs);
}

TEST(Metrics, Accuracy) {
  EXPECT_DOUBLE_EQ(accuracy(vec({0, 1, 1, 0}), vec({0.2, 0.5, 0.4, 0.9})), 0.5);
  EXPECT_DOUBLE_EQ(accuracy(vec({0, 1}), vec({0.2, 0.3}), 0.25), 1.0);
}

TEST(Stats, MeanAndStandardError) {
  const std::vector<double> v{1, 2, 3, 4};
  const MeanSe m = mean_se(v);
  EXPECT_DOUBLE_EQ(m.mean, 2.5);
  EXPECT_NEAR(m.se, std::sqrt(5.0 / 3.0 / 4.0), 1e-15);
  EXPECT_EQ(m.n, 4);
}

TEST(Stats, PairedTAtCriticalValue) {
  // Differences with mean / se equal to the 95% one-sided critical value of
  // t with 9 degrees of freedom.
  std::vector<double> base(10, 0.0), shifted(10);
  std::vector<double> d{-1, 1, -1, 1, -1, 1, -1, 1, -1, 1};
  const double se = std::sqrt(10.0 / 9.0 / 10.0);
  for (int i = 0; i < 10; ++i) shifted[std::size_t(i)] = d[std::size_t(i)] + 1.833113 * se;
  const PairedTests t = paired_tests(shifted, base);
  EXPECT_NEAR(t.t_stat, 1.833113, 1e-9);
  EXPECT_NEAR(t.t_p, 0.05, 1e-6);
}

TEST(Stats, ShiftMovesTestsTheRightWay) {
  std::vector<double> a{0.3, 0.5, 0.1, 0.8, 0.4, 0.6, 0.2, 0.7}, b = a;
  for (double& v : b) v -= 0.1;
  const PairedTests up = paired_tests(a, b);
  EXPECT_NEAR(up.mean_diff, 0.1, 1e-12);
  EXPECT_LT(up.t_p, 1e-6);
  const PairedTests down = paired_tests(b, a);
  EXPECT_GT(down.t_p, 1.0 - 1e-6);
  EXPECT_GT(up.wilcoxon_stat, down.wilcoxon_stat);
}

TEST(Stats, WilcoxonNormalApproximation) {
  const std::vector<double> a{1, 2, 3, 4, 5, 6}, zero(6, 0.0);
  const PairedTests t = paired_tests(a, zero);
  EXPECT_DOUBLE_EQ(t.wilcoxon_stat, 21.0);
  const double z = (21.0 - 10.5 - 0.5) / std::sqrt(6.0 * 7.0 * 13.0 / 24.0);
  EXPECT_NEAR(t.wilcoxon_p, upper_normal(z), 1e-12);
}

TEST(Stats, WilcoxonSymmetricDifferencesSitAtNullMean) {
  const std::vector<double> a{1, -1, 2, -2, 3, -3}, zero(6, 0.0);
  const PairedTests t = paired_tests(a, zero);
  EXPECT_DOUBLE_EQ(t.wilcoxon_stat, 6.0 * 7.0 / 4.0);
  EXPECT_DOUBLE_EQ(t.wilcoxon_p, 0.5);
}

TEST(Stats, ZerosDroppedAndAllZeroUndefined) {
  const std::vector<double> a{0, 0, 1, 2, 3}, zero(5, 0.0);
  EXPECT_EQ(paired_tests(a, zero).n_nonzero, 3);
  const PairedTests none = paired_tests(zero, zero);
  EXPECT_FALSE(none.wilcoxon_defined);
  EXPECT_EQ(none.t_p, 0.5);
  EXPECT_ANY_THROW(paired_tests(std::vector<double>{1, 2}, std::vector<double>{1, 2}));
}
