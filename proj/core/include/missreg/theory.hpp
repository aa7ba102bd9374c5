#pragma once

#include "missreg/rng.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace missreg {

struct Atom {
  std::vector<double> x;
  std::vector<bool> m;
  double y = 0.0;
  double p = 0.0;
};

/// Finite joint law of (X, M, Y). Probabilities are normalized on construction.
class DiscreteJoint {
 public:
  DiscreteJoint() = default;
  explicit DiscreteJoint(std::vector<Atom> atoms);

  [[nodiscard]] const std::vector<Atom>& atoms() const { return atoms_; }
  [[nodiscard]] std::size_t dim() const { return d_; }
  /// P(M_j = 1).
  [[nodiscard]] double p_missing(std::size_t j = 0) const;

 private:
  std::vector<Atom> atoms_;
  std::size_t d_ = 0;
};

/// What a predictor sees: the mask and the observed coordinates (masked
/// coordinates are stored as 0).
using ObsKey = std::pair<std::vector<bool>, std::vector<double>>;
ObsKey observable(const Atom& a);

/// eta / (eta + p_mu). Throws when both are zero.
double alpha(double eta, double p_mu);

/// E[Y | o(X, M), M] for every observable configuration of positive mass.
std::map<ObsKey, double> bayes_rule(const DiscreteJoint& joint);
double bayes_risk(const DiscreteJoint& joint);
/// E[(Y - rule(o(X, M), M))^2]; configurations missing from the table throw.
double table_risk(const DiscreteJoint& joint, const std::map<ObsKey, double>& rule);

/// Imputed value of X_1 as a function of x_{2:d}.
using ImputeFn = std::function<double(std::span<const double>)>;

struct RuleCell {
  /// (x_1^mu, x_{2:d}).
  std::vector<double> x;
  /// E[Y | X^mu = x] by direct enumeration.
  double value = 0.0;
  /// The mixture formula; equals `value`.
  double formula = 0.0;
  /// True when x_1 = mu(x_{2:d}) and eta > 0.
  bool imputed = false;
  double eta = 0.0;
  double p_mu = 0.0;
  double alpha = 0.0;
};

/// Limit rule of mu-impute-then-regress when only X_1 can be missing.
std::vector<RuleCell> asymptotic_impute_rule(const DiscreteJoint& joint, const ImputeFn& mu);

struct RuleComparison {
  bool all_imputed_alpha_one = true;
  double max_abs_diff = 0.0;
  int n_cells = 0;
  int n_imputed = 0;
};
/// Compares the limit rule with the Bayes rule on every observable
/// configuration of positive mass.
RuleComparison compare_with_bayes(const DiscreteJoint& joint, const ImputeFn& mu);

struct NmarReport {
  double p = 0.0;
  double psi0_x_x = 0.0;
  double psi1_r_r = 0.0;
  double psi0_r_x = 0.0;
  double psi1_x_r = 0.0;
  double lhs = 0.0;
  /// lhs >= 0: the first mechanism has the lower Bayes risk.
  bool nmar_better = false;
  double risk = 0.0;
  double risk_mar = 0.0;
};

/// Compares the Bayes risk under `joint` (missingness on X_1 only, with Y
/// independent of M_1 given X) with that under `joint_mar`.
NmarReport nmar_condition(const DiscreteJoint& joint, const DiscreteJoint& joint_mar);

/// Same (X, Y) law, M_1 ~ Bern(p) independent of everything.
DiscreteJoint mar_counterpart(const DiscreteJoint& joint, double p);

DiscreteJoint example1_joint(bool nmar);
DiscreteJoint example2_joint(bool nmar);

/// d = 2 binary X, two y levels, M_1 only: P(x) P(m_1 | x) P(y | x) with
/// Dirichlet(1) factors. 16 atoms.
DiscreteJoint random_nmar_joint(Rng& rng);
/// X_1 in {0,1,2}, binary X_2, M_1 and two y levels with Dirichlet(1) mass.
DiscreteJoint random_discrete_joint(Rng& rng);

struct NormalLaw {
  double mean = 0.0;
  double sd = 1.0;
};
struct DiscreteLaw {
  std::vector<double> values;
  std::vector<double> probs;
};

struct CensoredRisks {
  double quantile = 0.0;
  double tail_mean = 0.0;
  double tail_var = 0.0;
  double var = 0.0;
  double risk_censored = 0.0;
  double risk_mcar = 0.0;
};

/// Bayes risks of Y = w X_1 + noise when the top-p tail of X_1 is censored
/// versus masked completely at random with rate p.
CensoredRisks censored_linear_risks(double w_star, double sigma2, double p, const NormalLaw& law);
CensoredRisks censored_linear_risks(double w_star, double sigma2, double p, const DiscreteLaw& law);

struct TheoryCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};
std::vector<TheoryCheck> run_theory_suite(std::uint64_t seed, int n_random = 200);

}  // namespace missreg
