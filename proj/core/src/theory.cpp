#include "missreg/theory.hpp"

#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/sinh_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace missreg {

namespace {

struct Moments {
  double mass = 0.0;
  double sum = 0.0;
  void add(double p, double y) {
    mass += p;
    sum += p * y;
  }
  [[nodiscard]] double mean() const { return sum / mass; }
};

std::vector<double> rest_of(const Atom& a) { return {a.x.begin() + 1, a.x.end()}; }

void require_first_only(const DiscreteJoint& joint) {
  for (const auto& a : joint.atoms())
    for (std::size_t j = 1; j < a.m.size(); ++j)
      if (a.m[j]) throw std::invalid_argument("theory: only X_1 may be missing here");
}

std::vector<double> dirichlet(std::size_t k, Rng& rng) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> w(k);
  for (auto& v : w) v = e(rng);
  const double s = std::accumulate(w.begin(), w.end(), 0.0);
  for (auto& v : w) v /= s;
  return w;
}

}  // namespace

DiscreteJoint::DiscreteJoint(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
  if (atoms_.empty()) throw std::invalid_argument("joint: no atoms");
  d_ = atoms_.front().x.size();
  double total = 0.0;
  for (const auto& a : atoms_) {
    if (a.x.size() != d_ || a.m.size() != d_) throw DimensionError("joint: atoms disagree in dimension");
    if (!(a.p >= 0.0) || !std::isfinite(a.p)) throw std::invalid_argument("joint: negative or non-finite mass");
    total += a.p;
  }
  if (!(total > 0.0)) throw std::invalid_argument("joint: zero total mass");
  for (auto& a : atoms_) a.p /= total;
}

double DiscreteJoint::p_missing(std::size_t j) const {
  double s = 0.0;
  for (const auto& a : atoms_)
    if (a.m.at(j)) s += a.p;
  return s;
}

ObsKey observable(const Atom& a) {
  std::vector<double> x = a.x;
  for (std::size_t j = 0; j < x.size(); ++j)
    if (a.m[j]) x[j] = 0.0;
  return {a.m, std::move(x)};
}

double alpha(double eta, double p_mu) {
  if (eta < 0.0 || p_mu < 0.0) throw std::invalid_argument("alpha: negative input");
  if (eta + p_mu <= 0.0) throw std::invalid_argument("alpha: eta and p_mu are both zero");
  return eta / (eta + p_mu);
}

std::map<ObsKey, double> bayes_rule(const DiscreteJoint& joint) {
  std::map<ObsKey, Moments> acc;
  for (const auto& a : joint.atoms())
    if (a.p > 0.0) acc[observable(a)].add(a.p, a.y);
  std::map<ObsKey, double> out;
  for (const auto& [k, m] : acc) out[k] = m.mean();
  return out;
}

double table_risk(const DiscreteJoint& joint, const std::map<ObsKey, double>& rule) {
  double r = 0.0;
  for (const auto& a : joint.atoms()) {
    if (a.p <= 0.0) continue;
    const auto it = rule.find(observable(a));
    if (it == rule.end()) throw std::invalid_argument("table_risk: rule misses a configuration");
    r += a.p * (a.y - it->second) * (a.y - it->second);
  }
  return r;
}

double bayes_risk(const DiscreteJoint& joint) { return table_risk(joint, bayes_rule(joint)); }

std::vector<RuleCell> asymptotic_impute_rule(const DiscreteJoint& joint, const ImputeFn& mu) {
  require_first_only(joint);
  std::map<std::vector<double>, Moments> by_ximp, x_obs;
  std::map<std::vector<double>, Moments> rest_miss;
  std::map<std::vector<double>, double> rest_mass, rest_eta;
  for (const auto& a : joint.atoms()) {
    if (a.p <= 0.0) continue;
    const auto r = rest_of(a);
    std::vector<double> xi = a.x;
    if (a.m[0]) xi[0] = mu(r);
    by_ximp[xi].add(a.p, a.y);
    rest_mass[r] += a.p;
    if (a.m[0]) {
      rest_eta[r] += a.p;
      rest_miss[r].add(a.p, a.y);
    } else {
      x_obs[a.x].add(a.p, a.y);
    }
  }
  std::vector<RuleCell> out;
  for (const auto& [xi, mom] : by_ximp) {
    RuleCell c;
    c.x = xi;
    c.value = mom.mean();
    const std::vector<double> r(xi.begin() + 1, xi.end());
    const bool at_mu = xi[0] == mu(r);
    const auto obs = x_obs.find(xi);
    if (at_mu) {
      c.eta = rest_eta[r] / rest_mass[r];
      c.p_mu = obs == x_obs.end() ? 0.0 : obs->second.mass / rest_mass[r];
      c.imputed = c.eta > 0.0;
    }
    if (c.imputed) {
      c.alpha = alpha(c.eta, c.p_mu);
      c.formula = c.alpha * rest_miss[r].mean();
      if (c.alpha < 1.0) c.formula += (1.0 - c.alpha) * obs->second.mean();
    } else {
      c.formula = obs->second.mean();
    }
    out.push_back(std::move(c));
  }
  return out;
}

RuleComparison compare_with_bayes(const DiscreteJoint& joint, const ImputeFn& mu) {
  const auto cells = asymptotic_impute_rule(joint, mu);
  std::map<std::vector<double>, double> rule;
  RuleComparison out;
  for (const auto& c : cells) {
    rule[c.x] = c.value;
    if (c.imputed) {
      ++out.n_imputed;
      if (c.alpha != 1.0) out.all_imputed_alpha_one = false;
    }
  }
  const auto bayes = bayes_rule(joint);
  out.n_cells = static_cast<int>(bayes.size());
  for (const auto& a : joint.atoms()) {
    if (a.p <= 0.0) continue;
    std::vector<double> xi = a.x;
    if (a.m[0]) xi[0] = mu(rest_of(a));
    out.max_abs_diff = std::max(out.max_abs_diff, std::abs(bayes.at(observable(a)) - rule.at(xi)));
  }
  return out;
}

NmarReport nmar_condition(const DiscreteJoint& joint, const DiscreteJoint& joint_mar) {
  require_first_only(joint);
  require_first_only(joint_mar);
  NmarReport out;
  out.p = joint.p_missing(0);
  if (std::abs(out.p - joint_mar.p_missing(0)) > 1e-12)
    throw std::invalid_argument("nmar_condition: the two mechanisms differ in missing rate");
  if (out.p <= 0.0 || out.p >= 1.0) throw std::invalid_argument("nmar_condition: missing rate must lie in (0, 1)");

  std::map<std::vector<double>, Moments> e_x, e_r;
  std::map<std::pair<std::vector<double>, bool>, Moments> e_xm, e_rm;
  for (const auto& a : joint.atoms()) {
    if (a.p <= 0.0) continue;
    e_x[a.x].add(a.p, a.y);
    e_r[rest_of(a)].add(a.p, a.y);
    e_xm[{a.x, a.m[0]}].add(a.p, a.y);
    e_rm[{rest_of(a), a.m[0]}].add(a.p, a.y);
  }
  double w0 = 0.0, w1 = 0.0;
  for (const auto& a : joint.atoms()) {
    if (a.p <= 0.0) continue;
    const double ex = e_x[a.x].mean();
    const double er = e_r[rest_of(a)].mean();
    if (!a.m[0]) {
      const double exm = e_xm[{a.x, false}].mean();
      out.psi0_x_x += a.p * (ex - exm) * (ex - exm);
      out.psi0_r_x += a.p * (er - exm) * (er - exm);
      w0 += a.p;
    } else {
      const double erm = e_rm[{rest_of(a), true}].mean();
      out.psi1_r_r += a.p * (er - erm) * (er - erm);
      out.psi1_x_r += a.p * (ex - erm) * (ex - erm);
      w1 += a.p;
    }
  }
  out.psi0_x_x /= w0;
  out.psi0_r_x /= w0;
  out.psi1_r_r /= w1;
  out.psi1_x_r /= w1;
  const double p = out.p;
  out.lhs = (1 - p) * (1 - p) * out.psi0_x_x + p * p * out.psi1_r_r + p * (1 - p) * out.psi0_r_x -
            p * (1 - p) * out.psi1_x_r;
  out.nmar_better = out.lhs >= 0.0;
  out.risk = bayes_risk(joint);
  out.risk_mar = bayes_risk(joint_mar);
  return out;
}

DiscreteJoint mar_counterpart(const DiscreteJoint& joint, double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("mar_counterpart: p must lie in (0, 1)");
  std::map<std::pair<std::vector<double>, double>, double> xy;
  for (const auto& a : joint.atoms()) xy[{a.x, a.y}] += a.p;
  std::vector<Atom> atoms;
  for (const auto& [k, q] : xy) {
    std::vector<bool> m0(k.first.size(), false), m1 = m0;
    m1[0] = true;
    atoms.push_back({k.first, m0, k.second, q * (1 - p)});
    atoms.push_back({k.first, m1, k.second, q * p});
  }
  return DiscreteJoint(std::move(atoms));
}

DiscreteJoint example1_joint(bool nmar) {
  std::vector<Atom> atoms;
  for (int x = 0; x <= 1; ++x) {
    if (nmar) {
      atoms.push_back({{double(x)}, {x == 1}, double(x), 0.5});
    } else {
      for (int m = 0; m <= 1; ++m) atoms.push_back({{double(x)}, {m == 1}, double(x), 0.25});
    }
  }
  return DiscreteJoint(std::move(atoms));
}

DiscreteJoint example2_joint(bool nmar) {
  std::vector<Atom> atoms;
  for (int x2 = 0; x2 <= 1; ++x2)
    for (int u = 0; u <= 1; ++u)
      for (int v = 0; v <= 1; ++v) {
        const double x1 = u == 0 ? x2 : v;
        if (nmar) {
          atoms.push_back({{x1, double(x2)}, {u == 1, false}, x1, 0.125});
        } else {
          for (int w = 0; w <= 1; ++w) atoms.push_back({{x1, double(x2)}, {w == 1, false}, x1, 0.0625});
        }
      }
  return DiscreteJoint(std::move(atoms));
}

DiscreteJoint random_nmar_joint(Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double ya = gauss(rng), yb = gauss(rng);
  const auto px = dirichlet(4, rng);
  std::vector<Atom> atoms;
  for (int c = 0; c < 4; ++c) {
    const std::vector<double> x{double(c & 1), double(c >> 1)};
    const double pm = unif(rng);
    const auto py = dirichlet(2, rng);
    for (int m = 0; m <= 1; ++m)
      for (int k = 0; k < 2; ++k)
        atoms.push_back({x, {m == 1, false}, k == 0 ? ya : yb, px[c] * (m == 1 ? pm : 1 - pm) * py[k]});
  }
  return DiscreteJoint(std::move(atoms));
}

DiscreteJoint random_discrete_joint(Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double ya = gauss(rng), yb = gauss(rng);
  const auto w = dirichlet(24, rng);
  std::vector<Atom> atoms;
  std::size_t k = 0;
  for (int x1 = 0; x1 <= 2; ++x1)
    for (int x2 = 0; x2 <= 1; ++x2)
      for (int m = 0; m <= 1; ++m)
        for (int yi = 0; yi < 2; ++yi) atoms.push_back({{double(x1), double(x2)}, {m == 1, false}, yi == 0 ? ya : yb, w[k++]});
  return DiscreteJoint(std::move(atoms));
}

CensoredRisks censored_linear_risks(double w_star, double sigma2, double p, const NormalLaw& law) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("censored_linear_risks: p must lie in (0, 1)");
  if (!(law.sd > 0.0)) throw std::invalid_argument("censored_linear_risks: sd must be positive");
  const boost::math::normal dist(law.mean, law.sd);
  CensoredRisks out;
  out.quantile = boost::math::quantile(dist, 1.0 - p);
  const auto pdf = [&](double x) { return boost::math::pdf(dist, x); };
  boost::math::quadrature::exp_sinh<double> tail;
  boost::math::quadrature::sinh_sinh<double> line;
  const double tol = 1e-13;
  const double mass = tail.integrate([&](double t) { return pdf(out.quantile + t); }, 0.0,
                                     std::numeric_limits<double>::infinity(), tol);
  out.tail_mean =
      tail.integrate([&](double t) { return (out.quantile + t) * pdf(out.quantile + t); }, 0.0,
                     std::numeric_limits<double>::infinity(), tol) /
      mass;
  out.tail_var = tail.integrate(
                     [&](double t) {
                       const double c = out.quantile + t - out.tail_mean;
                       return c * c * pdf(out.quantile + t);
                     },
                     0.0, std::numeric_limits<double>::infinity(), tol) /
                 mass;
  const double mean = line.integrate([&](double x) { return x * pdf(x); }, tol);
  out.var = line.integrate([&](double x) { return (x - mean) * (x - mean) * pdf(x); }, tol);
  out.risk_censored = sigma2 + p * w_star * w_star * out.tail_var;
  out.risk_mcar = sigma2 + p * w_star * w_star * out.var;
  return out;
}

CensoredRisks censored_linear_risks(double w_star, double sigma2, double p, const DiscreteLaw& law) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("censored_linear_risks: p must lie in (0, 1)");
  if (law.values.size() != law.probs.size() || law.values.empty())
    throw std::invalid_argument("censored_linear_risks: malformed discrete law");
  std::vector<std::size_t> order(law.values.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return law.values[a] > law.values[b]; });
  const double total = std::accumulate(law.probs.begin(), law.probs.end(), 0.0);
  CensoredRisks out;
  double mass = 0.0, s = 0.0;
  std::size_t k = 0;
  while (k < order.size() && mass < p - 1e-12) {
    mass += law.probs[order[k]] / total;
    s += law.probs[order[k]] / total * law.values[order[k]];
    out.quantile = law.values[order[k]];
    ++k;
  }
  if (std::abs(mass - p) > 1e-12) throw std::invalid_argument("censored_linear_risks: p is not a tail mass of the law");
  out.tail_mean = s / mass;
  double mean = 0.0;
  for (std::size_t i = 0; i < law.values.size(); ++i) mean += law.probs[i] / total * law.values[i];
  for (std::size_t i = 0; i < k; ++i) {
    const double c = law.values[order[i]] - out.tail_mean;
    out.tail_var += law.probs[order[i]] / total * c * c / mass;
  }
  for (std::size_t i = 0; i < law.values.size(); ++i)
    out.var += law.probs[i] / total * (law.values[i] - mean) * (law.values[i] - mean);
  out.risk_censored = sigma2 + p * w_star * w_star * out.tail_var;
  out.risk_mcar = sigma2 + p * w_star * w_star * out.var;
  return out;
}

std::vector<TheoryCheck> run_theory_suite(std::uint64_t seed, int n_random) {
  std::vector<TheoryCheck> out;
  const auto add = [&](std::string name, bool ok, std::string detail) {
    out.push_back({std::move(name), ok, std::move(detail)});
  };
  const auto fmt = [](double v) {
    std::ostringstream s;
    s.precision(17);
    s << v;
    return s.str();
  };

  const double e1 = bayes_risk(example1_joint(true)), e1m = bayes_risk(example1_joint(false));
  add("example1_risks", std::abs(e1) <= 1e-12 && std::abs(e1m - 0.125) <= 1e-12, "R=" + fmt(e1) + " R'=" + fmt(e1m));
  const double e2 = bayes_risk(example2_joint(true)), e2m = bayes_risk(example2_joint(false));
  add("example2_risks", std::abs(e2 - 0.125) <= 1e-12 && std::abs(e2m - 0.09375) <= 1e-12,
      "R=" + fmt(e2) + " R'=" + fmt(e2m));
  const auto n1 = nmar_condition(example1_joint(true), example1_joint(false));
  add("example1_condition", n1.nmar_better && n1.risk <= n1.risk_mar, "lhs=" + fmt(n1.lhs));
  const auto n2 = nmar_condition(example2_joint(true), example2_joint(false));
  add("example2_condition", !n2.nmar_better && n2.risk > n2.risk_mar, "lhs=" + fmt(n2.lhs));

  Rng rng(derive_seed({seed, hash_string("nmar")}));
  int sign_fail = 0;
  double max_gap = 0.0;
  for (int t = 0; t < n_random; ++t) {
    const auto joint = random_nmar_joint(rng);
    const auto rep = nmar_condition(joint, mar_counterpart(joint, joint.p_missing(0)));
    const double diff = rep.risk_mar - rep.risk;
    max_gap = std::max(max_gap, std::abs(diff - rep.lhs));
    if (std::abs(diff) > 1e-12 && (diff > 0) != (rep.lhs > 0)) ++sign_fail;
  }
  add("nmar_sign_random", sign_fail == 0 && max_gap <= 1e-12,
      std::to_string(sign_fail) + " sign failures, max |lhs-(R'-R)|=" + fmt(max_gap));

  Rng crng(derive_seed({seed, hash_string("corollary")}));
  std::uniform_int_distribution<int> mu_draw(0, 3);
  int cor_fail = 0;
  for (int t = 0; t < 100; ++t) {
    const auto joint = random_discrete_joint(crng);
    double mu0 = mu_draw(crng), mu1 = mu_draw(crng);
    if (t % 2 == 0) mu0 = mu1 = 3.0;
    const ImputeFn mu = [=](std::span<const double> r) { return r[0] == 0.0 ? mu0 : mu1; };
    const auto cmp = compare_with_bayes(joint, mu);
    const bool equal = cmp.max_abs_diff <= 1e-10;
    if (equal != cmp.all_imputed_alpha_one) ++cor_fail;
  }
  add("corollary_alpha", cor_fail == 0, std::to_string(cor_fail) + " mismatches over 100 joints");

  Rng trng(derive_seed({seed, hash_string("tables")}));
  std::normal_distribution<double> g(0.0, 1.0);
  int table_fail = 0;
  for (int t = 0; t < 100; ++t) {
    const auto joint = random_nmar_joint(trng);
    auto rule = bayes_rule(joint);
    const double best = table_risk(joint, rule);
    for (auto& [k, v] : rule) v += g(trng);
    if (table_risk(joint, rule) < best - 1e-12) ++table_fail;
  }
  add("bayes_minimal", table_fail == 0, std::to_string(table_fail) + " tables beat the Bayes rule");

  const auto cr = censored_linear_risks(1.0, 0.25, 0.2, NormalLaw{});
  add("censored_ordering", cr.risk_censored < cr.risk_mcar,
      "censored=" + fmt(cr.risk_censored) + " mcar=" + fmt(cr.risk_mcar));
  return out;
}

}  // namespace missreg
