#pragma once

#include <Eigen/Dense>

#include <compare>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace missreg {

using Index = Eigen::Index;
using Mask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// Raised when inputs disagree in shape or schema.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class ColumnKind { continuous, categorical };

struct ColumnInfo {
  std::string name;
  ColumnKind kind = ColumnKind::continuous;
  /// Level labels for categorical columns; code k refers to levels[k].
  std::vector<std::string> levels;

  [[nodiscard]] bool is_categorical() const { return kind == ColumnKind::categorical; }
  [[nodiscard]] int n_levels() const { return static_cast<int>(levels.size()); }

  static ColumnInfo continuous(std::string name) { return {std::move(name), ColumnKind::continuous, {}}; }
  static ColumnInfo categorical(std::string name, std::vector<std::string> levels) {
    return {std::move(name), ColumnKind::categorical, std::move(levels)};
  }
};

/// A numeric design matrix paired with its missingness mask.
///
/// The mask is the single source of truth for missingness: masked cells may
/// hold any value (NaN after ingestion) and no algorithm in this library reads
/// them. Categorical columns store integer level codes in [0, n_levels).
/// Instances are immutable once constructed.
class MaskedMatrix {
 public:
  MaskedMatrix() = default;
  MaskedMatrix(Eigen::MatrixXd values, Mask mask, std::vector<ColumnInfo> columns);
  /// Fully observed continuous matrix with generated column names x1..xd.
  explicit MaskedMatrix(Eigen::MatrixXd values);
  MaskedMatrix(Eigen::MatrixXd values, Mask mask);

  [[nodiscard]] Index rows() const { return values_.rows(); }
  [[nodiscard]] Index cols() const { return values_.cols(); }

  [[nodiscard]] bool missing(Index i, Index j) const { return mask_(i, j); }
  /// Stored value of an observed cell. Throws if the cell is masked.
  [[nodiscard]] double value(Index i, Index j) const;
  [[nodiscard]] double value_or(Index i, Index j, double fallback) const {
    return mask_(i, j) ? fallback : values_(i, j);
  }

  [[nodiscard]] const Mask& mask() const { return mask_; }
  [[nodiscard]] const std::vector<ColumnInfo>& columns() const { return columns_; }
  [[nodiscard]] const ColumnInfo& column(Index j) const { return columns_.at(static_cast<std::size_t>(j)); }

  /// Raw storage including masked cells. Callers must consult mask().
  [[nodiscard]] const Eigen::MatrixXd& raw_values() const { return values_; }

  /// Copy with masked cells replaced by `fill` (zero-imputation when fill = 0).
  [[nodiscard]] Eigen::MatrixXd filled(double fill = 0.0) const;

  [[nodiscard]] bool has_missing() const { return mask_.any(); }
  [[nodiscard]] bool column_has_missing(Index j) const { return mask_.col(j).any(); }
  [[nodiscard]] Index missing_count(Index j) const { return mask_.col(j).count(); }
  [[nodiscard]] bool all_continuous() const;

  [[nodiscard]] MaskedMatrix select_rows(std::span<const Index> rows) const;
  [[nodiscard]] MaskedMatrix select_cols(std::span<const Index> cols) const;
  /// Same schema, new values; masked cells of `values` are ignored.
  [[nodiscard]] MaskedMatrix with_values(Eigen::MatrixXd values) const;
  [[nodiscard]] MaskedMatrix with_mask(Mask mask) const;
  /// Copy whose masked cells hold NaN.
  [[nodiscard]] MaskedMatrix sanitized() const;

  /// Row-concatenation; schemas must agree.
  static MaskedMatrix vstack(const MaskedMatrix& top, const MaskedMatrix& bottom);

 private:
  void validate() const;

  Eigen::MatrixXd values_;
  Mask mask_;
  std::vector<ColumnInfo> columns_;
};

/// One row's missingness vector m.
class Pattern {
 public:
  Pattern() = default;
  explicit Pattern(std::vector<bool> bits);
  static Pattern none(std::size_t d) { return Pattern(std::vector<bool>(d, false)); }
  static Pattern of_row(const Mask& mask, Index row);

  [[nodiscard]] std::size_t size() const { return bits_.size(); }
  [[nodiscard]] bool operator[](std::size_t j) const { return bits_[j]; }
  [[nodiscard]] std::size_t count_missing() const { return count_; }
  [[nodiscard]] const std::vector<bool>& bits() const { return bits_; }

  friend bool operator==(const Pattern& a, const Pattern& b) { return a.bits_ == b.bits_; }
  friend auto operator<=>(const Pattern& a, const Pattern& b) { return a.bits_ <=> b.bits_; }

 private:
  std::vector<bool> bits_;
  std::size_t count_ = 0;
};

struct PatternHash {
  std::size_t operator()(const Pattern& p) const { return std::hash<std::vector<bool>>{}(p.bits()); }
};

enum class Task { regression, binary };

struct TargetVector {
  Eigen::VectorXd y;
  Task task = Task::regression;

  TargetVector() = default;
  TargetVector(Eigen::VectorXd values, Task t);

  [[nodiscard]] Index size() const { return y.size(); }
  [[nodiscard]] TargetVector select(std::span<const Index> rows) const;
};

/// ⟨w, x⟩_m: the dot product over observed coordinates only.
double masked_dot(std::span<const double> w, std::span<const double> x, const Pattern& m);

struct PatternGroup {
  Pattern pattern;
  std::vector<Index> rows;
};

/// Partition of the rows by identical mask rows, in order of first appearance.
std::vector<PatternGroup> unique_patterns(const Mask& mask);

std::vector<Index> iota_rows(Index n);

}  // namespace missreg
