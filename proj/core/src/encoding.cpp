#include "missreg/encoding.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace missreg {

MaskedMatrix one_hot(const MaskedMatrix& x, std::vector<OneHotColumn>* layout) {
  std::vector<OneHotColumn> cols;
  std::vector<ColumnInfo> info;
  for (Index j = 0; j < x.cols(); ++j) {
    const auto& c = x.column(j);
    if (!c.is_categorical()) {
      cols.push_back({j, -1});
      info.push_back(c);
      continue;
    }
    for (int l = 0; l < c.n_levels(); ++l) {
      cols.push_back({j, l});
      info.push_back(ColumnInfo::continuous(c.name + "=" + c.levels[static_cast<std::size_t>(l)]));
    }
  }
  const Index n = x.rows(), p = static_cast<Index>(cols.size());
  Eigen::MatrixXd v(n, p);
  Mask m(n, p);
  for (Index k = 0; k < p; ++k) {
    const auto [src, level] = cols[static_cast<std::size_t>(k)];
    for (Index i = 0; i < n; ++i) {
      m(i, k) = x.missing(i, src);
      if (m(i, k))
        v(i, k) = std::numeric_limits<double>::quiet_NaN();
      else
        v(i, k) = level < 0 ? x.value(i, src) : (x.value(i, src) == level ? 1.0 : 0.0);
    }
  }
  if (layout) *layout = cols;
  return {std::move(v), std::move(m), std::move(info)};
}

MaskedMatrix encode_missing_category(const MaskedMatrix& x, std::span<const Index> columns) {
  Eigen::MatrixXd v = x.raw_values();
  Mask m = x.mask();
  std::vector<ColumnInfo> info = x.columns();
  for (Index j : columns) {
    if (j < 0 || j >= x.cols()) throw std::out_of_range("encode_missing_category: column index out of range");
    auto& c = info[static_cast<std::size_t>(j)];
    if (!c.is_categorical())
      throw std::invalid_argument("encode_missing_category: column '" + c.name + "' is continuous");
    if (std::find(c.levels.begin(), c.levels.end(), kMissingLevel) != c.levels.end()) continue;
    const double code = c.n_levels();
    c.levels.push_back(kMissingLevel);
    for (Index i = 0; i < x.rows(); ++i) {
      if (!m(i, j)) continue;
      v(i, j) = code;
      m(i, j) = false;
    }
  }
  return {std::move(v), std::move(m), std::move(info)};
}

MaskedMatrix encode_missing_category(const MaskedMatrix& x) {
  std::vector<Index> cols;
  for (Index j = 0; j < x.cols(); ++j)
    if (x.column(j).is_categorical() && x.column_has_missing(j)) cols.push_back(j);
  return encode_missing_category(x, cols);
}

MaskedMatrix decode_missing_category(const MaskedMatrix& encoded) {
  Eigen::MatrixXd v = encoded.raw_values();
  Mask m = encoded.mask();
  std::vector<ColumnInfo> info = encoded.columns();
  for (Index j = 0; j < encoded.cols(); ++j) {
    auto& c = info[static_cast<std::size_t>(j)];
    if (!c.is_categorical() || c.levels.empty() || c.levels.back() != kMissingLevel) continue;
    const double code = c.n_levels() - 1;
    c.levels.pop_back();
    for (Index i = 0; i < encoded.rows(); ++i) {
      if (m(i, j) || v(i, j) != code) continue;
      m(i, j) = true;
      v(i, j) = std::numeric_limits<double>::quiet_NaN();
    }
  }
  return {std::move(v), std::move(m), std::move(info)};
}

}  // namespace missreg
