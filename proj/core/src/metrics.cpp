#include "missreg/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace missreg {

namespace {

void check_same(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size()) throw std::invalid_argument("metric: length mismatch");
  if (a.size() == 0) throw std::invalid_argument("metric: empty input");
}

}  // namespace

double mse(const Eigen::VectorXd& y_true, const Eigen::VectorXd& y_pred) {
  check_same(y_true, y_pred);
  return (y_true - y_pred).squaredNorm() / static_cast<double>(y_true.size());
}

double r2(const Eigen::VectorXd& y_true, const Eigen::VectorXd& y_pred) {
  check_same(y_true, y_pred);
  const double sst = (y_true.array() - y_true.mean()).square().sum();
  if (sst <= 0.0) throw std::invalid_argument("r2: constant y_true");
  return 1.0 - (y_true - y_pred).squaredNorm() / sst;
}

double auc(const Eigen::VectorXd& y_true, const Eigen::VectorXd& scores) {
  check_same(y_true, scores);
  const auto n = static_cast<std::size_t>(y_true.size());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores(static_cast<Eigen::Index>(a)) < scores(static_cast<Eigen::Index>(b));
  });
  double pos = 0, neg = 0, rank_sum = 0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && scores(static_cast<Eigen::Index>(order[j + 1])) == scores(static_cast<Eigen::Index>(order[i]))) ++j;
    const double mid_rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) {
      const double label = y_true(static_cast<Eigen::Index>(order[k]));
      if (label != 0.0 && label != 1.0) throw std::invalid_argument("auc: labels must be 0/1");
      if (label == 1.0) {
        pos += 1;
        rank_sum += mid_rank;
      } else {
        neg += 1;
      }
    }
    i = j + 1;
  }
  if (pos == 0 || neg == 0) throw std::invalid_argument("auc: y_true has a single class");
  return (rank_sum - pos * (pos + 1) / 2.0) / (pos * neg);
}

double auc_norm(const Eigen::VectorXd& y_true, const Eigen::VectorXd& scores) { return 2.0 * auc(y_true, scores) - 1.0; }

double accuracy(const Eigen::VectorXd& y_true, const Eigen::VectorXd& scores, double threshold) {
  check_same(y_true, scores);
  Eigen::Index hit = 0;
  for (Eigen::Index i = 0; i < y_true.size(); ++i) hit += ((scores(i) >= threshold) == (y_true(i) == 1.0)) ? 1 : 0;
  return static_cast<double>(hit) / static_cast<double>(y_true.size());
}

}  // namespace missreg
