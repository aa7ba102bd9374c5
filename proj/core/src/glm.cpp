#include "missreg/glm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace missreg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double soft_threshold(double z, double g) {
  if (z > g) return z - g;
  if (z < -g) return z + g;
  return 0.0;
}

double softplus(double e) { return e > 0 ? e + std::log1p(std::exp(-e)) : std::log1p(std::exp(e)); }

double sigmoid(double e) {
  if (e >= 0) return 1.0 / (1.0 + std::exp(-e));
  const double z = std::exp(e);
  return z / (1.0 + z);
}

/// The elastic-net problem in standardized coordinates.
class Problem {
 public:
  Problem(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const GlmSpec& spec)
      : loss_(spec.loss), intercept_(spec.intercept), n_(x.rows()), p_(x.cols()), y_(y) {
    if (y.size() != n_) throw DimensionError("fit_glm: x and y row counts differ");
    if (n_ < 2) throw std::invalid_argument("fit_glm: need at least 2 rows");
    if (!x.allFinite() || !y.allFinite()) throw std::invalid_argument("fit_glm: non-finite input");
    if (loss_ == Loss::logistic)
      for (Index i = 0; i < n_; ++i)
        if (y(i) != 0.0 && y(i) != 1.0) throw std::invalid_argument("fit_glm: logistic targets must be 0 or 1");
    spec.validate(p_);
    const double nd = static_cast<double>(n_);
    pf_ = spec.penalty_factors.size() == 0 ? Eigen::VectorXd::Ones(p_) : spec.penalty_factors;
    center_ = intercept_ ? Eigen::VectorXd(x.colwise().mean().transpose()) : Eigen::VectorXd::Zero(p_);
    scale_ = Eigen::VectorXd::Ones(p_);
    pinned_.assign(static_cast<std::size_t>(p_), 0);
    xs_.resize(n_, p_);
    for (Index j = 0; j < p_; ++j) {
      xs_.col(j) = x.col(j).array() - center_(j);
      const double ss = xs_.col(j).squaredNorm() / nd;
      const double mag = 1.0 + std::abs(center_(j));
      if (!(ss > 1e-24 * mag * mag) || std::isinf(pf_(j))) {
        pinned_[static_cast<std::size_t>(j)] = 1;
        xs_.col(j).setZero();
        continue;
      }
      if (spec.standardize) {
        scale_(j) = std::sqrt(ss);
        xs_.col(j) /= scale_(j);
      }
    }
    ybar_ = y.mean();
    if (loss_ == Loss::squared) {
      const Eigen::VectorXd yc = intercept_ ? Eigen::VectorXd(y.array() - ybar_) : y;
      gram_ = xs_.transpose() * xs_ / nd;
      corr_ = xs_.transpose() * yc / nd;
      yy_ = yc.squaredNorm() / nd;
      spread_ = yy_;
    } else {
      spread_ = ybar_ * (1 - ybar_);
    }
  }

  [[nodiscard]] Index p() const { return p_; }
  [[nodiscard]] bool pinned(Index j) const { return pinned_[static_cast<std::size_t>(j)] != 0; }

  [[nodiscard]] double initial_b0() const {
    if (loss_ == Loss::squared || !intercept_) return 0.0;
    const double m = std::clamp(ybar_, 1e-6, 1 - 1e-6);
    return std::log(m / (1 - m));
  }

  [[nodiscard]] double lambda_max(double alpha) const {
    const double a = std::max(alpha, 1e-3);
    Eigen::VectorXd c;
    if (loss_ == Loss::squared) {
      c = corr_;
    } else {
      const double centre = intercept_ ? ybar_ : 0.5;
      c = xs_.transpose() * (y_.array() - centre).matrix() / static_cast<double>(n_);
    }
    double lmax = 0.0;
    for (Index j = 0; j < p_; ++j) {
      if (pinned(j) || pf_(j) <= 0) continue;
      lmax = std::max(lmax, std::abs(c(j)) / (a * pf_(j)));
    }
    return lmax > 0 ? lmax : 1.0;
  }

  [[nodiscard]] double penalty(const Eigen::VectorXd& b, double lambda, double alpha) const {
    double pen = 0.0;
    for (Index j = 0; j < p_; ++j) {
      if (pinned(j) || pf_(j) == 0) continue;
      pen += pf_(j) * (alpha * std::abs(b(j)) + 0.5 * (1 - alpha) * b(j) * b(j));
    }
    return lambda * pen;
  }

  [[nodiscard]] double objective(const Eigen::VectorXd& b, double b0, double lambda, double alpha) const {
    return smooth(b, b0) + penalty(b, lambda, alpha);
  }

  [[nodiscard]] double smooth(const Eigen::VectorXd& b, double b0) const {
    if (loss_ == Loss::squared) return 0.5 * (yy_ - 2 * b.dot(corr_) + b.dot(gram_ * b));
    const Eigen::VectorXd eta = (xs_ * b).array() + b0;
    double f = 0.0;
    for (Index i = 0; i < n_; ++i) f += softplus(eta(i)) - y_(i) * eta(i);
    return f / static_cast<double>(n_);
  }

  /// Gradient of the smooth part with respect to b.
  [[nodiscard]] Eigen::VectorXd gradient(const Eigen::VectorXd& b, double b0) const {
    if (loss_ == Loss::squared) return gram_ * b - corr_;
    Eigen::VectorXd resid(n_);
    for (Index i = 0; i < n_; ++i) resid(i) = sigmoid(b0 + xs_.row(i).dot(b)) - y_(i);
    return xs_.transpose() * resid / static_cast<double>(n_);
  }

  struct Outcome {
    bool converged = false;
    int iterations = 0;
  };

  /// dev_tol > 0 swaps the coefficient-change test for max_j h_jj d_j^2 <
  /// dev_tol * var(y), h_jj being the coordinate curvature.
  Outcome solve(double lambda, double alpha, int max_iter, double tol, Eigen::VectorXd& b, double& b0,
                std::vector<double>* trace, double dev_tol = 0.0) const {
    return loss_ == Loss::squared ? solve_squared(lambda, alpha, max_iter, tol, dev_tol, b, trace)
                                  : solve_logistic(lambda, alpha, max_iter, tol, dev_tol, b, b0, trace);
  }

  [[nodiscard]] GlmFit finish(const Eigen::VectorXd& b, double b0) const {
    GlmFit fit;
    fit.loss = loss_;
    fit.beta.resize(p_);
    for (Index j = 0; j < p_; ++j) fit.beta(j) = pinned(j) ? 0.0 : b(j) / scale_(j);
    const double shift = center_.dot(fit.beta);
    if (loss_ == Loss::squared)
      fit.intercept = intercept_ ? ybar_ - shift : 0.0;
    else
      fit.intercept = intercept_ ? b0 - shift : 0.0;
    return fit;
  }

  /// Standardized coordinates of a reported fit.
  void to_standardized(const GlmFit& fit, Eigen::VectorXd& b, double& b0) const {
    b.resize(p_);
    for (Index j = 0; j < p_; ++j) b(j) = pinned(j) ? 0.0 : fit.beta(j) * scale_(j);
    b0 = fit.intercept + center_.dot(fit.beta);
  }

  [[nodiscard]] double kkt(const Eigen::VectorXd& b, double b0, double lambda, double alpha) const {
    const Eigen::VectorXd g = gradient(b, b0);
    double worst = 0.0;
    for (Index j = 0; j < p_; ++j) {
      if (pinned(j)) continue;
      const double l1 = lambda * alpha * pf_(j), l2 = lambda * (1 - alpha) * pf_(j);
      if (b(j) == 0.0)
        worst = std::max(worst, std::abs(g(j)) - l1);
      else
        worst = std::max(worst, std::abs(g(j) + l2 * b(j) + l1 * (b(j) > 0 ? 1.0 : -1.0)));
    }
    return worst;
  }

 private:
  static double threshold(double tol, const Eigen::VectorXd& b) {
    return tol * std::max(1.0, b.size() ? b.cwiseAbs().maxCoeff() : 0.0);
  }

  struct Step {
    double abs = 0.0;
    double weighted = 0.0;
    void add(double delta, double h) {
      abs = std::max(abs, std::abs(delta));
      weighted = std::max(weighted, h * delta * delta);
    }
  };

  [[nodiscard]] bool small(const Step& s, double tol, double dev_tol, const Eigen::VectorXd& b) const {
    if (dev_tol > 0) return s.weighted < dev_tol * std::max(spread_, 1e-300);
    return s.abs < threshold(tol, b);
  }

  Outcome solve_squared(double lambda, double alpha, int max_iter, double tol, double dev_tol, Eigen::VectorXd& b,
                        std::vector<double>* trace) const {
    Eigen::VectorXd r = corr_ - gram_ * b;
    std::vector<Index> all;
    for (Index j = 0; j < p_; ++j)
      if (!pinned(j)) all.push_back(j);
    auto sweep = [&](const std::vector<Index>& idx) {
      Step st;
      for (Index j : idx) {
        const double gjj = gram_(j, j);
        const double u = r(j) + gjj * b(j);
        const double nb = soft_threshold(u, lambda * alpha * pf_(j)) / (gjj + lambda * (1 - alpha) * pf_(j));
        const double delta = nb - b(j);
        if (delta == 0.0) continue;
        r.noalias() -= gram_.col(j) * delta;
        b(j) = nb;
        st.add(delta, gjj);
      }
      return st;
    };
    auto record = [&] {
      if (trace) trace->push_back(0.5 * yy_ - 0.5 * b.dot(corr_ + r) + penalty(b, lambda, alpha));
    };
    Outcome out;
    while (out.iterations < max_iter) {
      const Step full = sweep(all);
      ++out.iterations;
      record();
      if (small(full, tol, dev_tol, b)) {
        out.converged = true;
        break;
      }
      std::vector<Index> active;
      for (Index j : all)
        if (b(j) != 0.0) active.push_back(j);
      while (out.iterations < max_iter) {
        const Step d = sweep(active);
        ++out.iterations;
        record();
        if (small(d, tol, dev_tol, b)) break;
      }
    }
    return out;
  }

  Outcome solve_logistic(double lambda, double alpha, int max_iter, double tol, double dev_tol, Eigen::VectorXd& b,
                         double& b0, std::vector<double>* trace) const {
    const double nd = static_cast<double>(n_);
    std::vector<Index> all;
    for (Index j = 0; j < p_; ++j)
      if (!pinned(j)) all.push_back(j);
    Outcome out;
    double f_old = objective(b, b0, lambda, alpha);
    Eigen::VectorXd w(n_), r(n_), xw(p_);
    for (int irls = 0; irls < 500 && out.iterations < max_iter; ++irls) {
      const Eigen::VectorXd eta = (xs_ * b).array() + b0;
      for (Index i = 0; i < n_; ++i) {
        const double pr = sigmoid(eta(i));
        w(i) = std::max(pr * (1 - pr), 1e-5);
        r(i) = (y_(i) - pr) / w(i);
      }
      for (Index j : all) xw(j) = xs_.col(j).cwiseAbs2().dot(w) / nd;
      const double wsum = w.sum();
      const Eigen::VectorXd b_old = b;
      const double b0_old = b0;
      auto sweep = [&](const std::vector<Index>& idx) {
        Step st;
        if (intercept_) {
          const double d0 = w.dot(r) / wsum;
          if (d0 != 0.0) {
            b0 += d0;
            r.array() -= d0;
            st.add(d0, wsum / nd);
          }
        }
        for (Index j : idx) {
          const double u = xs_.col(j).cwiseProduct(w).dot(r) / nd + xw(j) * b(j);
          const double nb = soft_threshold(u, lambda * alpha * pf_(j)) / (xw(j) + lambda * (1 - alpha) * pf_(j));
          const double delta = nb - b(j);
          if (delta == 0.0) continue;
          r.noalias() -= xs_.col(j) * delta;
          b(j) = nb;
          st.add(delta, xw(j));
        }
        return st;
      };
      while (out.iterations < max_iter) {
        const Step full = sweep(all);
        ++out.iterations;
        if (small(full, tol, dev_tol, b)) break;
        std::vector<Index> active;
        for (Index j : all)
          if (b(j) != 0.0) active.push_back(j);
        while (out.iterations < max_iter) {
          ++out.iterations;
          if (small(sweep(active), tol, dev_tol, b)) break;
        }
      }
      double f_new = objective(b, b0, lambda, alpha);
      if (f_new > f_old) {
        const Eigen::VectorXd b_new = b;
        const double b0_new = b0;
        double t = 0.5;
        bool ok = false;
        for (int h = 0; h < 40; ++h, t *= 0.5) {
          b = b_old + t * (b_new - b_old);
          b0 = b0_old + t * (b0_new - b0_old);
          f_new = objective(b, b0, lambda, alpha);
          if (f_new <= f_old) {
            ok = true;
            break;
          }
        }
        if (!ok) {
          b = b_old;
          b0 = b0_old;
          if (trace) trace->push_back(f_old);
          out.converged = true;
          break;
        }
      }
      if (trace) trace->push_back(f_new);
      f_old = f_new;
      Step change;
      change.add(b0 - b0_old, wsum / nd);
      for (Index j : all) change.add(b(j) - b_old(j), xw(j));
      if (small(change, tol, dev_tol, b)) {
        out.converged = true;
        break;
      }
    }
    return out;
  }

  Loss loss_;
  bool intercept_;
  Index n_, p_;
  Eigen::VectorXd y_;
  Eigen::MatrixXd xs_;
  Eigen::VectorXd center_, scale_, pf_;
  std::vector<char> pinned_;
  double ybar_ = 0.0;
  Eigen::MatrixXd gram_;
  Eigen::VectorXd corr_;
  double yy_ = 0.0;
  double spread_ = 0.0;
};

std::vector<double> lambda_sequence(double lmax, const GlmGrid& grid) {
  if (!grid.lambdas.empty()) return grid.lambdas;
  if (grid.n_lambda < 1) throw std::invalid_argument("GlmGrid: n_lambda must be positive");
  std::vector<double> seq(static_cast<std::size_t>(grid.n_lambda));
  for (int k = 0; k < grid.n_lambda; ++k) {
    const double frac = grid.n_lambda == 1 ? 0.0 : static_cast<double>(k) / (grid.n_lambda - 1);
    seq[static_cast<std::size_t>(k)] = lmax * std::pow(grid.lambda_min_ratio, frac);
  }
  return seq;
}

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& m, const std::vector<Index>& rows) {
  Eigen::MatrixXd out(static_cast<Index>(rows.size()), m.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) out.row(static_cast<Index>(r)) = m.row(rows[r]);
  return out;
}

Eigen::VectorXd take(const Eigen::VectorXd& v, const std::vector<Index>& rows) {
  Eigen::VectorXd out(static_cast<Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) out(static_cast<Index>(r)) = v(rows[r]);
  return out;
}

double deviance(const Eigen::VectorXd& y, const Eigen::VectorXd& prob) {
  double s = 0.0;
  for (Index i = 0; i < y.size(); ++i) {
    const double p = std::clamp(prob(i), 1e-12, 1 - 1e-12);
    s -= y(i) * std::log(p) + (1 - y(i)) * std::log(1 - p);
  }
  return s / static_cast<double>(y.size());
}

double train_loss(Loss loss, const Eigen::VectorXd& y, const Eigen::VectorXd& pred) {
  return loss == Loss::squared ? (y - pred).squaredNorm() / static_cast<double>(y.size()) : deviance(y, pred);
}

}  // namespace

std::string to_string(Loss l) { return l == Loss::squared ? "squared" : "logistic"; }

void GlmSpec::validate(Index p) const {
  if (!(lambda >= 0) || std::isinf(lambda)) throw std::invalid_argument("GlmSpec: lambda must be finite and >= 0");
  if (!(alpha >= 0 && alpha <= 1)) throw std::invalid_argument("GlmSpec: alpha must lie in [0, 1]");
  if (!(tol > 0)) throw std::invalid_argument("GlmSpec: tol must be positive");
  if (max_iter < 1) throw std::invalid_argument("GlmSpec: max_iter must be positive");
  if (penalty_factors.size() != 0) {
    if (penalty_factors.size() != p) throw DimensionError("GlmSpec: penalty_factors length mismatch");
    for (Index j = 0; j < p; ++j)
      if (!(penalty_factors(j) >= 0)) throw std::invalid_argument("GlmSpec: penalty factors must be >= 0");
  }
}

Eigen::VectorXd GlmFit::linear_predictor(const Eigen::MatrixXd& x) const {
  if (x.cols() != beta.size()) throw DimensionError("GlmFit: column count mismatch");
  return (x * beta).array() + intercept;
}

Eigen::VectorXd GlmFit::predict(const Eigen::MatrixXd& x) const {
  Eigen::VectorXd eta = linear_predictor(x);
  if (loss == Loss::logistic)
    for (Index i = 0; i < eta.size(); ++i) eta(i) = sigmoid(eta(i));
  return eta;
}

GlmFit fit_glm(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const GlmSpec& spec) {
  const Problem prob(x, y, spec);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(prob.p());
  double b0 = prob.initial_b0();
  std::vector<double> trace;
  const auto out = prob.solve(spec.lambda, spec.alpha, spec.max_iter, spec.tol, b, b0, &trace);
  GlmFit fit = prob.finish(b, b0);
  fit.objective_trace = std::move(trace);
  fit.converged = out.converged;
  fit.iterations = out.iterations;
  return fit;
}

double glm_objective(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const GlmSpec& spec, const GlmFit& fit) {
  const Problem prob(x, y, spec);
  Eigen::VectorXd b;
  double b0 = 0.0;
  prob.to_standardized(fit, b, b0);
  return prob.objective(b, b0, spec.lambda, spec.alpha);
}

double kkt_violation(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const GlmSpec& spec, const GlmFit& fit) {
  const Problem prob(x, y, spec);
  Eigen::VectorXd b;
  double b0 = 0.0;
  prob.to_standardized(fit, b, b0);
  return prob.kkt(b, b0, spec.lambda, spec.alpha);
}

double lambda_max(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const GlmSpec& spec) {
  return Problem(x, y, spec).lambda_max(spec.alpha);
}

Eigen::VectorXd scaled_penalty_factors(const Mask& mask, const std::vector<std::vector<Index>>& monomials) {
  const Index n = mask.rows();
  Eigen::VectorXd phi(static_cast<Index>(monomials.size()));
  for (std::size_t k = 0; k < monomials.size(); ++k) {
    Index active = 0;
    for (Index i = 0; i < n; ++i) {
      bool on = true;
      for (Index j : monomials[k]) on = on && mask(i, j);
      active += on ? 1 : 0;
    }
    phi(static_cast<Index>(k)) =
        active == 0 ? kInf : std::sqrt(static_cast<double>(n) / static_cast<double>(active));
  }
  return phi;
}

CvResult cv_path(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const GlmSpec& base, const GlmGrid& grid,
                 const std::vector<FoldSplit>& folds) {
  if (grid.alphas.empty()) throw std::invalid_argument("cv_path: empty alpha grid");
  if (folds.empty()) throw std::invalid_argument("cv_path: no folds");
  const Problem full(x, y, base);
  CvResult res;
  const auto n_alpha = static_cast<Index>(grid.alphas.size());
  for (double a : grid.alphas) res.lambdas.push_back(lambda_sequence(full.lambda_max(a), grid));
  const auto n_lambda = static_cast<Index>(res.lambdas.front().size());
  res.loss_table = Eigen::MatrixXd::Zero(n_alpha, n_lambda);
  Eigen::MatrixXd mse_table = Eigen::MatrixXd::Zero(n_alpha, n_lambda);

  for (const auto& fold : folds) {
    const Eigen::MatrixXd xt = take_rows(x, fold.train), xv = take_rows(x, fold.valid);
    const Eigen::VectorXd yt = take(y, fold.train), yv = take(y, fold.valid);
    const Problem prob(xt, yt, base);
    const double null_loss = train_loss(base.loss, yt, Eigen::VectorXd::Constant(yt.size(), yt.mean()));
    for (Index a = 0; a < n_alpha; ++a) {
      Eigen::VectorXd b = Eigen::VectorXd::Zero(prob.p());
      double b0 = prob.initial_b0();
      double prev_ratio = 0.0;
      bool saturated = false;
      for (Index k = 0; k < n_lambda; ++k) {
        if (saturated) {
          // Path stopped early on this fold; these lambdas cannot win.
          res.loss_table(a, k) = kInf;
          mse_table(a, k) = kInf;
          continue;
        }
        const double lam = res.lambdas[static_cast<std::size_t>(a)][static_cast<std::size_t>(k)];
        prob.solve(lam, grid.alphas[static_cast<std::size_t>(a)], base.max_iter, base.tol, b, b0, nullptr,
                   grid.path_tol);
        const GlmFit f = prob.finish(b, b0);
        const Eigen::VectorXd pred = f.predict(xv);
        const double mse = (yv - pred).squaredNorm() / static_cast<double>(yv.size());
        res.loss_table(a, k) += (base.loss == Loss::squared ? mse : deviance(yv, pred)) / folds.size();
        mse_table(a, k) += mse / folds.size();

        if (grid.early_stop && prob.p() >= xt.rows() && null_loss > 0) {
          const double ratio = 1.0 - train_loss(base.loss, yt, f.predict(xt)) / null_loss;
          saturated = ratio > 0.999 || (k > 0 && ratio - prev_ratio < 1e-5 * ratio);
          prev_ratio = ratio;
        }
      }
    }
  }

  Index best_a = 0, best_k = 0;
  double best = kInf;
  for (Index a = 0; a < n_alpha; ++a)
    for (Index k = 0; k < n_lambda; ++k) {
      const double v = res.loss_table(a, k);
      if (std::isfinite(best) ? v < best - 1e-12 * std::abs(best) : v < best) {
        best = v;
        best_a = a;
        best_k = k;
      }
    }
  res.cv_loss = best;
  res.cv_mse = mse_table(best_a, best_k);
  res.best = base;
  res.best.alpha = grid.alphas[static_cast<std::size_t>(best_a)];
  res.best.lambda = res.lambdas[static_cast<std::size_t>(best_a)][static_cast<std::size_t>(best_k)];

  Eigen::VectorXd b = Eigen::VectorXd::Zero(full.p());
  double b0 = full.initial_b0();
  Problem::Outcome out;
  std::vector<double> trace;
  for (Index k = 0; k <= best_k; ++k) {
    trace.clear();
    out = full.solve(res.lambdas[static_cast<std::size_t>(best_a)][static_cast<std::size_t>(k)], res.best.alpha,
                     base.max_iter, base.tol, b, b0, &trace, k < best_k ? grid.path_tol : 0.0);
  }
  res.fit = full.finish(b, b0);
  res.fit.objective_trace = std::move(trace);
  res.fit.converged = out.converged;
  res.fit.iterations = out.iterations;
  return res;
}

CvResult cv_path(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const GlmSpec& base, const GlmGrid& grid,
                 int n_folds, std::uint64_t seed) {
  if (x.rows() < n_folds) throw std::invalid_argument("cv_path: fewer rows than folds");
  return cv_path(x, y, base, grid, make_folds(x.rows(), n_folds, seed));
}

}  // namespace missreg
