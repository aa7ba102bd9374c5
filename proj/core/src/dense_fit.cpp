#include "missreg/dense_fit.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace missreg {

DenseFit ridge_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double ridge) {
  const Eigen::Index n = x.rows(), p = x.cols();
  if (y.size() != n) throw std::invalid_argument("ridge_fit: row mismatch");
  if (n == 0) throw std::invalid_argument("ridge_fit: no rows");
  DenseFit out;
  const Eigen::RowVectorXd xbar = x.colwise().mean();
  const double ybar = y.mean();
  if (p == 0) {
    out.intercept = ybar;
    out.beta.resize(0);
    return out;
  }
  const Eigen::MatrixXd xc = x.rowwise() - xbar;
  const Eigen::VectorXd yc = y.array() - ybar;
  Eigen::MatrixXd gram = xc.transpose() * xc;
  const Eigen::VectorXd rhs = xc.transpose() * yc;
  if (ridge > 0) {
    gram.diagonal().array() += ridge * static_cast<double>(n);
    out.beta = gram.llt().solve(rhs);
  } else {
    out.beta = gram.completeOrthogonalDecomposition().solve(rhs);
  }
  out.intercept = ybar - xbar.dot(out.beta);
  return out;
}

DenseFit logistic_ridge_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double ridge, int max_iter) {
  const Eigen::Index n = x.rows(), p = x.cols();
  if (y.size() != n) throw std::invalid_argument("logistic_ridge_fit: row mismatch");
  Eigen::MatrixXd z(n, p + 1);
  z.col(0).setOnes();
  z.rightCols(p) = x;
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(p + 1);
  const double ybar = std::clamp(y.mean(), 1e-6, 1 - 1e-6);
  theta(0) = std::log(ybar / (1 - ybar));
  const double nd = static_cast<double>(n);
  auto objective = [&](const Eigen::VectorXd& t) {
    const Eigen::VectorXd eta = z * t;
    double f = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double e = eta(i);
      f += (e > 0 ? e + std::log1p(std::exp(-e)) : std::log1p(std::exp(e))) - y(i) * e;
    }
    return f / nd + 0.5 * ridge * t.tail(p).squaredNorm();
  };
  double f = objective(theta);
  for (int it = 0; it < max_iter; ++it) {
    const Eigen::VectorXd eta = z * theta;
    const Eigen::VectorXd prob = (1.0 / (1.0 + (-eta.array()).exp())).matrix();
    const Eigen::VectorXd w = (prob.array() * (1 - prob.array())).max(1e-10).matrix();
    Eigen::VectorXd grad = z.transpose() * (prob - y) / nd;
    grad.tail(p) += ridge * theta.tail(p);
    Eigen::MatrixXd hess = z.transpose() * w.asDiagonal() * z / nd;
    hess.diagonal().tail(p).array() += ridge;
    hess.diagonal().array() += 1e-12;
    const Eigen::VectorXd step = hess.ldlt().solve(grad);
    double t = 1.0, f_new = f;
    Eigen::VectorXd cand;
    for (int h = 0; h < 30; ++h, t *= 0.5) {
      cand = theta - t * step;
      f_new = objective(cand);
      if (f_new <= f) break;
    }
    if (!(f_new <= f)) break;
    theta = cand;
    const double gain = f - f_new;
    f = f_new;
    if (gain < 1e-12 * (1 + std::abs(f))) break;
  }
  return {theta(0), theta.tail(p)};
}

double sse(const DenseFit& fit, const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  return (y - fit.predict(x)).squaredNorm();
}

}  // namespace missreg
