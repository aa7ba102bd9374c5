#pragma once

#include <Eigen/Dense>

#include <vector>

namespace missreg {

/// Optimal linear assignment (Hungarian algorithm with row potentials,
/// O(n^3)). Returns col[i], the column assigned to row i, maximizing
/// sum_i score(i, col[i]).
std::vector<Eigen::Index> max_weight_assignment(const Eigen::MatrixXd& score);

/// Greedy assignment: repeatedly take the highest remaining score, ties
/// broken by lowest row then lowest column.
std::vector<Eigen::Index> greedy_assignment(const Eigen::MatrixXd& score);

double assignment_value(const Eigen::MatrixXd& score, const std::vector<Eigen::Index>& col);

}  // namespace missreg
