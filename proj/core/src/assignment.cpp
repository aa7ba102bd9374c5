#include "missreg/assignment.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace missreg {

using Eigen::Index;

std::vector<Index> max_weight_assignment(const Eigen::MatrixXd& score) {
  const Index n = score.rows();
  if (score.cols() != n) throw std::invalid_argument("assignment needs a square score matrix");
  if (n == 0) return {};
  const double inf = std::numeric_limits<double>::infinity();
  // 1-based arrays; cost = -score.
  std::vector<double> u(static_cast<std::size_t>(n + 1), 0.0), v(static_cast<std::size_t>(n + 1), 0.0);
  std::vector<Index> p(static_cast<std::size_t>(n + 1), 0), way(static_cast<std::size_t>(n + 1), 0);
  std::vector<double> minv(static_cast<std::size_t>(n + 1));
  std::vector<char> used(static_cast<std::size_t>(n + 1));
  for (Index i = 1; i <= n; ++i) {
    p[0] = i;
    Index j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[static_cast<std::size_t>(j0)] = 1;
      const Index i0 = p[static_cast<std::size_t>(j0)];
      double delta = inf;
      Index j1 = 0;
      for (Index j = 1; j <= n; ++j) {
        const auto sj = static_cast<std::size_t>(j);
        if (used[sj]) continue;
        const double cur = -score(i0 - 1, j - 1) - u[static_cast<std::size_t>(i0)] - v[sj];
        if (cur < minv[sj]) {
          minv[sj] = cur;
          way[sj] = j0;
        }
        if (minv[sj] < delta) {
          delta = minv[sj];
          j1 = j;
        }
      }
      for (Index j = 0; j <= n; ++j) {
        const auto sj = static_cast<std::size_t>(j);
        if (used[sj]) {
          u[static_cast<std::size_t>(p[sj])] += delta;
          v[sj] -= delta;
        } else {
          minv[sj] -= delta;
        }
      }
      j0 = j1;
    } while (p[static_cast<std::size_t>(j0)] != 0);
    do {
      const Index j1 = way[static_cast<std::size_t>(j0)];
      p[static_cast<std::size_t>(j0)] = p[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<Index> col(static_cast<std::size_t>(n));
  for (Index j = 1; j <= n; ++j) col[static_cast<std::size_t>(p[static_cast<std::size_t>(j)] - 1)] = j - 1;
  return col;
}

std::vector<Index> greedy_assignment(const Eigen::MatrixXd& score) {
  const Index n = score.rows();
  if (score.cols() != n) throw std::invalid_argument("assignment needs a square score matrix");
  std::vector<Index> cells(static_cast<std::size_t>(n * n));
  std::iota(cells.begin(), cells.end(), Index{0});
  std::stable_sort(cells.begin(), cells.end(), [&](Index a, Index b) {
    return score(a / n, a % n) > score(b / n, b % n);
  });
  std::vector<Index> col(static_cast<std::size_t>(n), -1);
  std::vector<char> taken(static_cast<std::size_t>(n), 0);
  Index assigned = 0;
  for (Index c : cells) {
    const Index i = c / n, j = c % n;
    if (col[static_cast<std::size_t>(i)] >= 0 || taken[static_cast<std::size_t>(j)]) continue;
    col[static_cast<std::size_t>(i)] = j;
    taken[static_cast<std::size_t>(j)] = 1;
    if (++assigned == n) break;
  }
  return col;
}

double assignment_value(const Eigen::MatrixXd& score, const std::vector<Index>& col) {
  double total = 0.0;
  for (std::size_t i = 0; i < col.size(); ++i) total += score(static_cast<Index>(i), col[i]);
  return total;
}

}  // namespace missreg
