#include "missreg/masked_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

namespace missreg {

namespace {

std::vector<ColumnInfo> default_columns(Index d) {
  std::vector<ColumnInfo> cols;
  cols.reserve(static_cast<std::size_t>(d));
  for (Index j = 0; j < d; ++j) cols.push_back(ColumnInfo::continuous("x" + std::to_string(j + 1)));
  return cols;
}

}  // namespace

MaskedMatrix::MaskedMatrix(Eigen::MatrixXd values, Mask mask, std::vector<ColumnInfo> columns)
    : values_(std::move(values)), mask_(std::move(mask)), columns_(std::move(columns)) {
  validate();
}

MaskedMatrix::MaskedMatrix(Eigen::MatrixXd values)
    : values_(std::move(values)),
      mask_(Mask::Constant(values_.rows(), values_.cols(), false)),
      columns_(default_columns(values_.cols())) {
  validate();
}

MaskedMatrix::MaskedMatrix(Eigen::MatrixXd values, Mask mask)
    : values_(std::move(values)), mask_(std::move(mask)), columns_(default_columns(values_.cols())) {
  validate();
}

void MaskedMatrix::validate() const {
  if (values_.rows() != mask_.rows() || values_.cols() != mask_.cols())
    throw DimensionError("mask and values must have identical shape");
  if (static_cast<Index>(columns_.size()) != values_.cols())
    throw DimensionError("column metadata count does not match matrix width");
  for (Index j = 0; j < cols(); ++j) {
    const auto& info = columns_[static_cast<std::size_t>(j)];
    if (!info.is_categorical()) continue;
    for (Index i = 0; i < rows(); ++i) {
      if (mask_(i, j)) continue;
      const double v = values_(i, j);
      if (v != std::floor(v) || v < 0 || v >= info.n_levels())
        throw std::invalid_argument("categorical column '" + info.name + "' holds an invalid level code");
    }
  }
}

double MaskedMatrix::value(Index i, Index j) const {
  if (mask_(i, j)) throw std::logic_error("attempt to read a masked cell");
  return values_(i, j);
}

Eigen::MatrixXd MaskedMatrix::filled(double fill) const {
  Eigen::MatrixXd out(rows(), cols());
  for (Index j = 0; j < cols(); ++j)
    for (Index i = 0; i < rows(); ++i) out(i, j) = mask_(i, j) ? fill : values_(i, j);
  return out;
}

bool MaskedMatrix::all_continuous() const {
  for (const auto& c : columns_)
    if (c.is_categorical()) return false;
  return true;
}

MaskedMatrix MaskedMatrix::select_rows(std::span<const Index> rows) const {
  Eigen::MatrixXd v(static_cast<Index>(rows.size()), cols());
  Mask m(static_cast<Index>(rows.size()), cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    v.row(static_cast<Index>(r)) = values_.row(rows[r]);
    m.row(static_cast<Index>(r)) = mask_.row(rows[r]);
  }
  return {std::move(v), std::move(m), columns_};
}

MaskedMatrix MaskedMatrix::select_cols(std::span<const Index> cols) const {
  Eigen::MatrixXd v(rows(), static_cast<Index>(cols.size()));
  Mask m(rows(), static_cast<Index>(cols.size()));
  std::vector<ColumnInfo> info;
  for (std::size_t c = 0; c < cols.size(); ++c) {
    v.col(static_cast<Index>(c)) = values_.col(cols[c]);
    m.col(static_cast<Index>(c)) = mask_.col(cols[c]);
    info.push_back(columns_.at(static_cast<std::size_t>(cols[c])));
  }
  return {std::move(v), std::move(m), std::move(info)};
}

MaskedMatrix MaskedMatrix::with_values(Eigen::MatrixXd values) const { return {std::move(values), mask_, columns_}; }

MaskedMatrix MaskedMatrix::with_mask(Mask mask) const { return {values_, std::move(mask), columns_}; }

MaskedMatrix MaskedMatrix::sanitized() const {
  Eigen::MatrixXd v = values_;
  for (Index j = 0; j < cols(); ++j)
    for (Index i = 0; i < rows(); ++i)
      if (mask_(i, j)) v(i, j) = std::numeric_limits<double>::quiet_NaN();
  return {std::move(v), mask_, columns_};
}

MaskedMatrix MaskedMatrix::vstack(const MaskedMatrix& top, const MaskedMatrix& bottom) {
  if (top.cols() != bottom.cols()) throw DimensionError("vstack: column count mismatch");
  for (Index j = 0; j < top.cols(); ++j) {
    if (top.column(j).kind != bottom.column(j).kind || top.column(j).levels != bottom.column(j).levels)
      throw DimensionError("vstack: schema mismatch in column " + top.column(j).name);
  }
  Eigen::MatrixXd v(top.rows() + bottom.rows(), top.cols());
  Mask m(top.rows() + bottom.rows(), top.cols());
  v << top.values_, bottom.values_;
  m << top.mask_, bottom.mask_;
  return {std::move(v), std::move(m), top.columns_};
}

Pattern::Pattern(std::vector<bool> bits) : bits_(std::move(bits)) {
  count_ = static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), true));
}

Pattern Pattern::of_row(const Mask& mask, Index row) {
  std::vector<bool> bits(static_cast<std::size_t>(mask.cols()));
  for (Index j = 0; j < mask.cols(); ++j) bits[static_cast<std::size_t>(j)] = mask(row, j);
  return Pattern(std::move(bits));
}

TargetVector::TargetVector(Eigen::VectorXd values, Task t) : y(std::move(values)), task(t) {
  for (Index i = 0; i < y.size(); ++i) {
    if (!std::isfinite(y(i))) throw std::invalid_argument("target values must be finite");
    if (task == Task::binary && y(i) != 0.0 && y(i) != 1.0)
      throw std::invalid_argument("binary targets must be 0 or 1");
  }
}

TargetVector TargetVector::select(std::span<const Index> rows) const {
  Eigen::VectorXd out(static_cast<Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) out(static_cast<Index>(r)) = y(rows[r]);
  return {std::move(out), task};
}

double masked_dot(std::span<const double> w, std::span<const double> x, const Pattern& m) {
  if (w.size() != x.size() || w.size() != m.size()) throw DimensionError("masked_dot: dimension mismatch");
  double acc = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j)
    if (!m[j]) acc += w[j] * x[j];
  return acc;
}

std::vector<PatternGroup> unique_patterns(const Mask& mask) {
  std::vector<PatternGroup> groups;
  std::unordered_map<Pattern, std::size_t, PatternHash> index;
  for (Index i = 0; i < mask.rows(); ++i) {
    Pattern p = Pattern::of_row(mask, i);
    auto [it, inserted] = index.try_emplace(p, groups.size());
    if (inserted) groups.push_back({std::move(p), {}});
    groups[it->second].rows.push_back(i);
  }
  return groups;
}

std::vector<Index> iota_rows(Index n) {
  std::vector<Index> r(static_cast<std::size_t>(n));
  std::iota(r.begin(), r.end(), Index{0});
  return r;
}

}  // namespace missreg
