#include "missreg/adaptive.hpp"
#include "missreg/datagen.hpp"
#include "missreg/metrics.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace missreg;

namespace {

struct Instance {
  MaskedMatrix x;
  TargetVector y;
};

// y = f(x, m) with MCAR masks; f sees the full x.
template <class F>
Instance make(Index n, Index d, double p, std::uint64_t seed, F f, double noise = 0.0) {
  Rng rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  std::bernoulli_distribution coin(p);
  Eigen::MatrixXd v(n, d);
  Mask m(n, d);
  Eigen::VectorXd y(n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < d; ++j) {
      v(i, j) = z(rng);
      m(i, j) = coin(rng);
    }
    y(i) = f(v.row(i), m.row(i)) + noise * z(rng);
  }
  return {MaskedMatrix(v, m), TargetVector(y, Task::regression)};
}

AdaptiveSpec quick_spec() {
  AdaptiveSpec s;
  s.grid.n_lambda = 15;
  return s;
}

MaskedMatrix fuzz(const MaskedMatrix& x, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> wild(0.0, 1e5);
  Eigen::MatrixXd v = x.raw_values();
  for (Index i = 0; i < x.rows(); ++i)
    for (Index j = 0; j < x.cols(); ++j)
      if (x.missing(i, j)) v(i, j) = wild(rng);
  return MaskedMatrix(v, x.mask(), x.columns());
}

bool contains(const std::vector<ExpandedColumn>& big, const std::vector<ExpandedColumn>& small) {
  return std::all_of(small.begin(), small.end(),
                     [&](const ExpandedColumn& c) { return std::find(big.begin(), big.end(), c) != big.end(); });
}

}  // namespace

TEST(Expansion, ColumnCountsForThreeFeatures) {
  EXPECT_EQ(expansion_columns(3, FunctionClass::static_linear()).size(), 3u);
  EXPECT_EQ(expansion_columns(3, FunctionClass::affine_intercept()).size(), 7u);
  EXPECT_EQ(expansion_columns(3, FunctionClass::affine()).size(), 12u);
  EXPECT_EQ(expansion_columns(3, FunctionClass::affine(), true).size(), 15u);
  // |J| = 0: 3 + 1; |J| = 1: 3 * 2 + 3; |J| = 2: 3 * 1 + 3.
  EXPECT_EQ(expansion_columns(3, FunctionClass::polynomial(2)).size(), 19u);
}

TEST(Expansion, HierarchyIsNested) {
  const auto st = expansion_columns(4, FunctionClass::static_linear());
  const auto ai = expansion_columns(4, FunctionClass::affine_intercept());
  const auto af = expansion_columns(4, FunctionClass::affine(), true);
  const auto p1 = expansion_columns(4, FunctionClass::polynomial(1));
  const auto p2 = expansion_columns(4, FunctionClass::polynomial(2));
  EXPECT_TRUE(contains(ai, st));
  std::vector<ExpandedColumn> ai_no_const;
  for (const auto& c : ai)
    if (c.base >= 0 || !c.monomial.empty()) ai_no_const.push_back(c);
  EXPECT_TRUE(contains(af, ai_no_const));
  EXPECT_TRUE(contains(p1, ai));
  EXPECT_TRUE(contains(p2, p1));
}

TEST(Expansion, ColumnValues) {
  Eigen::MatrixXd v(1, 2);
  v << 3.0, 5.0;
  Mask m(1, 2);
  m << false, true;
  const std::vector<ExpandedColumn> cols{{0, {}}, {1, {}}, {0, {1}}, {-1, {1}}, {-1, {0}}, {-1, {}}};
  const Eigen::RowVectorXd r = expand_row(v, m, 0, cols);
  EXPECT_EQ(r, (Eigen::RowVectorXd(6) << 3.0, 0.0, 3.0, 1.0, 0.0, 1.0).finished());
}

TEST(Expansion, MaskedCellsNeverRead) {
  const Instance in = make(30, 4, 0.4, 1, [](auto, auto) { return 0.0; });
  const auto cols = expansion_columns(4, FunctionClass::polynomial(2));
  EXPECT_EQ(expand_matrix(in.x.raw_values(), in.x.mask(), cols),
            expand_matrix(fuzz(in.x, 2).raw_values(), in.x.mask(), cols));
}

TEST(FunctionClass, NamesRoundTrip) {
  for (const char* s : {"static", "affine_intercept", "affine", "polynomial:3", "finite"})
    EXPECT_EQ(FunctionClass::parse(s).name(), s);
  EXPECT_ANY_THROW(FunctionClass::parse("cubic"));
}

TEST(Adaptive, StaticRecoversPlantedLinearModel) {
  const Instance in = make(400, 4, 0.0, 3, [](auto x, auto) { return 1.0 + 2.0 * x(0) - x(3); });
  const AdaptiveLinearModel m = fit_adaptive(in.x, in.y, FunctionClass::static_linear(), quick_spec());
  EXPECT_GT(r2(in.y.y, m.predict(in.x)), 0.999);
  EXPECT_NEAR(m.fit.beta(0), 2.0, 0.02);
  EXPECT_NEAR(m.fit.intercept, 1.0, 0.02);
}

TEST(Adaptive, MaskIndicatorTargetIsLearnedExactly) {
  const Instance in = make(400, 3, 0.3, 4, [](auto, auto m) { return m(0) ? 1.0 : 0.0; });
  AdaptiveSpec spec = quick_spec();
  spec.affine_intercepts = true;
  for (const auto& cls : {FunctionClass::affine_intercept(), FunctionClass::affine(), FunctionClass::polynomial(1)}) {
    const AdaptiveLinearModel m = fit_adaptive(in.x, in.y, cls, spec);
    EXPECT_GE(r2(in.y.y, m.predict(in.x)), 0.999) << cls.name();
  }
}

TEST(Adaptive, StaticUnderfitsPatternDependentSlope) {
  const Instance in = make(600, 3, 0.4, 5, [](auto x, auto m) { return x(1) * (m(0) ? 3.0 : 1.0); }, 0.1);
  const AdaptiveLinearModel st = fit_adaptive(in.x, in.y, FunctionClass::static_linear(), quick_spec());
  const AdaptiveLinearModel af = fit_adaptive(in.x, in.y, FunctionClass::affine(), quick_spec());
  EXPECT_LT(af.cv_mse, 0.8 * st.cv_mse);
}

TEST(Adaptive, PatternWeightsReconstructPredictions) {
  const Instance in = make(300, 3, 0.3, 6, [](auto x, auto m) { return x(0) + (m(1) ? 2.0 * x(2) : -x(2)); }, 0.2);
  for (const auto& cls : {FunctionClass::static_linear(), FunctionClass::affine_intercept(), FunctionClass::affine(),
                          FunctionClass::polynomial(2), FunctionClass::finite(2, 20)}) {
    const AdaptiveLinearModel m = fit_adaptive(in.x, in.y, cls, quick_spec());
    const Eigen::VectorXd pred = m.predict(in.x);
    for (Index i = 0; i < 300; ++i) {
      const Pattern p = Pattern::of_row(in.x.mask(), i);
      const PatternWeights pw = weights_for(m, p);
      double s = pw.b;
      for (Index j = 0; j < 3; ++j)
        if (!in.x.missing(i, j)) s += pw.w(j) * in.x.value(i, j);
      EXPECT_NEAR(pred(i), s, 1e-9) << cls.name();
    }
  }
}

TEST(Adaptive, PredictionsIgnoreMaskedValues) {
  const Instance in = make(200, 3, 0.3, 7, [](auto x, auto) { return x(0) - x(1); }, 0.3);
  const MaskedMatrix fx = fuzz(in.x, 8);
  AdaptiveSpec spec = quick_spec();
  spec.gamma_grid = {1.0, 4.0};
  for (const auto& cls : {FunctionClass::static_linear(), FunctionClass::affine(), FunctionClass::polynomial(2),
                          FunctionClass::finite(2, 20)}) {
    const AdaptiveLinearModel a = fit_adaptive(in.x, in.y, cls, spec), b = fit_adaptive(fx, in.y, cls, spec);
    EXPECT_EQ(a.predict(in.x), b.predict(fx)) << cls.name();
  }
}

TEST(Adaptive, FiniteSplitsOnRegimeMask) {
  const Instance in = make(600, 3, 0.3, 9, [](auto x, auto m) { return m(2) ? 2.0 * x(0) : -2.0 * x(0); }, 0.1);
  AdaptiveSpec spec = quick_spec();
  spec.finite_depths = {1, 2};
  const AdaptiveLinearModel m = fit_finite(in.x, in.y, FunctionClass::finite(2, 20), spec);
  EXPECT_EQ(m.partition[0].feature, 2);
  Pattern on(std::vector<bool>{false, false, true}), off(std::vector<bool>{false, false, false});
  EXPECT_NEAR(weights_for(m, on).w(0), 2.0, 0.1);
  EXPECT_NEAR(weights_for(m, off).w(0), -2.0, 0.1);
}

TEST(Adaptive, FiniteWithoutMissingnessIsOneLeaf) {
  const Instance in = make(200, 3, 0.0, 10, [](auto x, auto) { return x(0); }, 0.1);
  const AdaptiveLinearModel m = fit_finite(in.x, in.y, FunctionClass::finite(), quick_spec());
  EXPECT_EQ(m.leaf_fits.size(), 1u);
}

TEST(Adaptive, BinaryTargetGivesProbabilities) {
  Rng flip(21);
  std::bernoulli_distribution noise(0.15);
  const Instance in = make(300, 3, 0.2, 11, [&](auto x, auto) { return (x(0) > 0) != noise(flip) ? 1.0 : 0.0; });
  const TargetVector yb(in.y.y, Task::binary);
  AdaptiveSpec spec = quick_spec();
  spec.task = Task::binary;
  const AdaptiveLinearModel m = fit_adaptive(in.x, yb, FunctionClass::affine_intercept(), spec);
  const Eigen::VectorXd p = m.predict(in.x);
  EXPECT_GT(p.minCoeff(), 0.0);
  EXPECT_LT(p.maxCoeff(), 1.0);
  EXPECT_GT(auc(yb.y, p), 0.75);
}

TEST(Adaptive, BestPicksAnAdmissibleClass) {
  const Instance in = make(300, 3, 0.3, 12, [](auto x, auto m) { return x(0) + (m(1) ? 1.0 : 0.0); }, 0.2);
  const AdaptiveLinearModel m = fit_adaptive_best(in.x, in.y, quick_spec());
  EXPECT_TRUE(m.cls.kind == ClassKind::affine_intercept || m.cls.kind == ClassKind::affine ||
              m.cls.kind == ClassKind::finite);
  EXPECT_GT(r2(in.y.y, m.predict(in.x)), 0.6);
}

TEST(DerivedImputation, RatioOfInterceptToSlope) {
  AdaptiveLinearModel m;
  m.cls = FunctionClass::affine_intercept();
  m.d = 2;
  m.columns = expansion_columns(2, m.cls);
  m.fit.beta = Eigen::VectorXd::Zero(Index(m.columns.size()));
  for (std::size_t k = 0; k < m.columns.size(); ++k) {
    const auto& c = m.columns[k];
    if (c.base == 0 && c.monomial.empty()) m.fit.beta(Index(k)) = 2.0;
    if (c.base == -1 && c.monomial == std::vector<Index>{0}) m.fit.beta(Index(k)) = 6.0;
    if (c.base == -1 && c.monomial == std::vector<Index>{1}) m.fit.beta(Index(k)) = 0.5;
  }
  const DerivedImputation d = to_imputation(m);
  EXPECT_DOUBLE_EQ(d.mu(0), 3.0);
  EXPECT_FALSE(d.undefined[0]);
  EXPECT_TRUE(d.undefined[1]);
}

TEST(DerivedImputation, ImputingMuReproducesModel) {
  const Instance in = make(400, 3, 0.3, 13, [](auto x, auto m) { return x(0) + x(1) + (m(0) ? 0.5 : 0.0); }, 0.1);
  const AdaptiveLinearModel m = fit_adaptive(in.x, in.y, FunctionClass::affine_intercept(), quick_spec());
  const DerivedImputation d = to_imputation(m);
  const Eigen::VectorXd pred = m.predict(in.x);
  for (Index i = 0; i < 400; ++i) {
    bool ok = true;
    double s = m.fit.intercept;
    for (std::size_t k = 0; k < m.columns.size(); ++k) {
      const auto& c = m.columns[k];
      if (c.base >= 0) {
        if (in.x.missing(i, c.base) && d.undefined[std::size_t(c.base)]) ok = false;
        const double v = in.x.missing(i, c.base) ? d.mu(c.base) : in.x.value(i, c.base);
        s += m.fit.beta(Index(k)) * v;
      } else if (c.monomial.empty()) {
        s += m.fit.beta(Index(k));
      }
    }
    // Rows whose masked coordinates all have a defined mu.
    if (ok) EXPECT_NEAR(pred(i), s, 1e-9);
  }
}

TEST(DerivedImputation, NeedsAffineInterceptModel) {
  AdaptiveLinearModel m;
  m.cls = FunctionClass::affine();
  EXPECT_ANY_THROW(to_imputation(m));
}
