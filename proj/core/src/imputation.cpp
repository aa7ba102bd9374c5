#include "missreg/imputation.hpp"

#include "missreg/encoding.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace missreg {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double observed_mean(const MaskedMatrix& x, Index j) {
  double sum = 0.0;
  Index count = 0;
  for (Index i = 0; i < x.rows(); ++i) {
    if (x.missing(i, j)) continue;
    sum += x.value(i, j);
    ++count;
  }
  if (count == 0) throw std::invalid_argument("column '" + x.column(j).name + "' has no observed cell");
  return sum / static_cast<double>(count);
}

double observed_mode(const MaskedMatrix& x, Index j) {
  std::vector<Index> counts(static_cast<std::size_t>(x.column(j).n_levels()), 0);
  bool any = false;
  for (Index i = 0; i < x.rows(); ++i) {
    if (x.missing(i, j)) continue;
    ++counts[static_cast<std::size_t>(x.value(i, j))];
    any = true;
  }
  if (!any) throw std::invalid_argument("column '" + x.column(j).name + "' has no observed cell");
  std::size_t best = 0;
  for (std::size_t l = 1; l < counts.size(); ++l)
    if (counts[l] > counts[best]) best = l;
  return static_cast<double>(best);
}

bool has_observed(const MaskedMatrix& x, Index j) { return x.missing_count(j) < x.rows(); }

ColumnModel fit_column_model(const Eigen::MatrixXd& design, const Eigen::VectorXd& target, const ColumnInfo& info,
                             const ChainedOptions& options) {
  ColumnModel model;
  if (!info.is_categorical()) {
    model.linear = ridge_fit(design, target, options.ridge);
    return model;
  }
  const int levels = info.n_levels();
  model.classes.resize(static_cast<std::size_t>(levels));
  model.class_present.assign(static_cast<std::size_t>(levels), false);
  int n_present = 0;
  for (Index i = 0; i < target.size(); ++i) model.class_present[static_cast<std::size_t>(target(i))] = true;
  for (bool b : model.class_present) n_present += b ? 1 : 0;
  for (int l = 0; l < levels; ++l) {
    auto& fit = model.classes[static_cast<std::size_t>(l)];
    fit.beta = Eigen::VectorXd::Zero(design.cols());
    if (!model.class_present[static_cast<std::size_t>(l)]) continue;
    if (n_present == 1) {
      fit.intercept = 0.0;
      continue;
    }
    const Eigen::VectorXd yl = (target.array() == static_cast<double>(l)).cast<double>().matrix();
    fit = logistic_ridge_fit(design, yl, options.ridge);
  }
  return model;
}

double predict_column(const ColumnModel& model, const Eigen::RowVectorXd& row, const ColumnInfo& info) {
  if (!info.is_categorical()) return model.linear.intercept + row.dot(model.linear.beta);
  double best = -std::numeric_limits<double>::infinity();
  int arg = -1;
  for (std::size_t l = 0; l < model.classes.size(); ++l) {
    if (!model.class_present[l]) continue;
    const double s = model.classes[l].intercept + row.dot(model.classes[l].beta);
    if (arg < 0 || s > best) {
      best = s;
      arg = static_cast<int>(l);
    }
  }
  if (arg < 0) throw std::logic_error("categorical column model has no level");
  return arg;
}

std::vector<Index> rows_where(const MaskedMatrix& x, Index j, bool missing) {
  std::vector<Index> rows;
  for (Index i = 0; i < x.rows(); ++i)
    if (x.missing(i, j) == missing) rows.push_back(i);
  return rows;
}

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& m, const std::vector<Index>& rows) {
  Eigen::MatrixXd out(static_cast<Index>(rows.size()), m.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) out.row(static_cast<Index>(r)) = m.row(rows[r]);
  return out;
}

}  // namespace

std::string to_string(ImputerKind k) {
  switch (k) {
    case ImputerKind::zero: return "zero";
    case ImputerKind::mean: return "mean";
    case ImputerKind::mode: return "mode";
    case ImputerKind::constant: return "constant";
    case ImputerKind::missing_category: return "missing_category";
    case ImputerKind::chained: return "chained";
  }
  return "?";
}

std::string to_string(TestPolicy p) {
  switch (p) {
    case TestPolicy::v1: return "v1";
    case TestPolicy::v2: return "v2";
    case TestPolicy::v3: return "v3";
  }
  return "?";
}

ImputerKind parse_imputer_kind(const std::string& s) {
  if (s == "zero") return ImputerKind::zero;
  if (s == "mean") return ImputerKind::mean;
  if (s == "mode") return ImputerKind::mode;
  if (s == "constant") return ImputerKind::constant;
  if (s == "missing_category" || s == "category") return ImputerKind::missing_category;
  if (s == "chained" || s == "mice") return ImputerKind::chained;
  throw std::invalid_argument("unknown imputer '" + s + "'");
}

TestPolicy parse_test_policy(const std::string& s) {
  if (s == "v1" || s == "V1") return TestPolicy::v1;
  if (s == "v2" || s == "V2") return TestPolicy::v2;
  if (s == "v3" || s == "V3") return TestPolicy::v3;
  throw std::invalid_argument("unknown test policy '" + s + "'");
}

Eigen::MatrixXd chained_design(const Eigen::MatrixXd& work, const std::vector<ColumnInfo>& schema, Index target) {
  Index q = 0;
  for (Index j = 0; j < work.cols(); ++j) {
    if (j == target) continue;
    const auto& c = schema[static_cast<std::size_t>(j)];
    q += c.is_categorical() ? std::max(0, c.n_levels() - 1) : 1;
  }
  Eigen::MatrixXd out(work.rows(), q);
  Index k = 0;
  for (Index j = 0; j < work.cols(); ++j) {
    if (j == target) continue;
    const auto& c = schema[static_cast<std::size_t>(j)];
    if (!c.is_categorical()) {
      out.col(k++) = work.col(j);
      continue;
    }
    for (int l = 1; l < c.n_levels(); ++l) out.col(k++) = (work.col(j).array() == l).cast<double>().matrix();
  }
  return out;
}

ChainedResult run_chained(const MaskedMatrix& x, const ChainedOptions& options) {
  const Index n = x.rows(), d = x.cols();
  if (n < 2) throw std::invalid_argument("chained imputation needs at least 2 rows");
  if (d < 2) throw std::invalid_argument("chained imputation needs at least 2 columns");
  if (options.n_sweeps < 0) throw std::invalid_argument("n_sweeps must be non-negative");
  Eigen::MatrixXd work(n, d);
  for (Index j = 0; j < d; ++j) {
    const double init = x.column(j).is_categorical() ? observed_mode(x, j) : observed_mean(x, j);
    for (Index i = 0; i < n; ++i) work(i, j) = x.value_or(i, j, init);
  }
  std::vector<std::vector<Index>> observed(static_cast<std::size_t>(d)), missing(static_cast<std::size_t>(d));
  for (Index j = 0; j < d; ++j) {
    observed[static_cast<std::size_t>(j)] = rows_where(x, j, false);
    missing[static_cast<std::size_t>(j)] = rows_where(x, j, true);
  }
  auto fit_one = [&](Index j) {
    const auto& obs = observed[static_cast<std::size_t>(j)];
    const Eigen::MatrixXd design = chained_design(work, x.columns(), j);
    Eigen::VectorXd target(static_cast<Index>(obs.size()));
    for (std::size_t r = 0; r < obs.size(); ++r) target(static_cast<Index>(r)) = work(obs[r], j);
    ColumnModel model = fit_column_model(take_rows(design, obs), target, x.column(j), options);
    return std::make_pair(std::move(model), design);
  };
  for (int s = 0; s < options.n_sweeps; ++s) {
    for (Index j = 0; j < d; ++j) {
      const auto& miss = missing[static_cast<std::size_t>(j)];
      if (miss.empty()) continue;
      auto [model, design] = fit_one(j);
      for (Index i : miss) work(i, j) = predict_column(model, design.row(i), x.column(j));
    }
  }
  ChainedResult out;
  out.models.reserve(static_cast<std::size_t>(d));
  for (Index j = 0; j < d; ++j) out.models.push_back(fit_one(j).first);
  out.completed = std::move(work);
  return out;
}

Imputer Imputer::fit_zero(const MaskedMatrix& train) {
  Imputer imp;
  imp.kind_ = ImputerKind::zero;
  imp.schema_ = train.columns();
  imp.fill_.resize(train.cols());
  for (Index j = 0; j < train.cols(); ++j)
    imp.fill_(j) = train.column(j).is_categorical() ? observed_mode(train, j) : 0.0;
  imp.fit_mask_.assign(static_cast<std::size_t>(train.cols()), true);
  imp.fitted_ = true;
  imp.raw_train_ = train;
  imp.imputed_train_ = imp.apply_statistics(train);
  return imp;
}

Imputer Imputer::fit_mean(const MaskedMatrix& train) {
  Imputer imp;
  imp.kind_ = ImputerKind::mean;
  imp.schema_ = train.columns();
  imp.fill_.resize(train.cols());
  for (Index j = 0; j < train.cols(); ++j)
    imp.fill_(j) = train.column(j).is_categorical() ? observed_mode(train, j) : observed_mean(train, j);
  imp.fit_mask_.assign(static_cast<std::size_t>(train.cols()), true);
  imp.fitted_ = true;
  imp.raw_train_ = train;
  imp.imputed_train_ = imp.apply_statistics(train);
  return imp;
}

Imputer Imputer::fit_mode(const MaskedMatrix& train) {
  std::vector<Index> cols;
  for (Index j = 0; j < train.cols(); ++j)
    if (train.column(j).is_categorical()) cols.push_back(j);
  return fit_mode(train, cols);
}

Imputer Imputer::fit_mode(const MaskedMatrix& train, std::span<const Index> columns) {
  Imputer imp;
  imp.kind_ = ImputerKind::mode;
  imp.schema_ = train.columns();
  imp.fill_ = Eigen::VectorXd::Constant(train.cols(), kNaN);
  imp.fit_mask_.assign(static_cast<std::size_t>(train.cols()), false);
  for (Index j : columns) {
    if (j < 0 || j >= train.cols()) throw std::out_of_range("fit_mode: column index out of range");
    if (!train.column(j).is_categorical())
      throw std::invalid_argument("fit_mode: column '" + train.column(j).name + "' is numeric");
    imp.fill_(j) = observed_mode(train, j);
    imp.fit_mask_[static_cast<std::size_t>(j)] = true;
  }
  imp.fitted_ = true;
  imp.raw_train_ = train;
  imp.imputed_train_ = imp.apply_statistics(train);
  return imp;
}

Imputer Imputer::fit_constant(const MaskedMatrix& train, Eigen::VectorXd mu) {
  if (mu.size() != train.cols()) throw DimensionError("fit_constant: mu length must equal column count");
  for (Index j = 0; j < train.cols(); ++j) {
    const auto& c = train.column(j);
    if (!std::isfinite(mu(j))) throw std::invalid_argument("fit_constant: non-finite fill value");
    if (c.is_categorical() && (mu(j) != std::floor(mu(j)) || mu(j) < 0 || mu(j) >= c.n_levels()))
      throw std::invalid_argument("fit_constant: invalid level code for column '" + c.name + "'");
  }
  Imputer imp;
  imp.kind_ = ImputerKind::constant;
  imp.schema_ = train.columns();
  imp.fill_ = std::move(mu);
  imp.fit_mask_.assign(static_cast<std::size_t>(train.cols()), true);
  imp.fitted_ = true;
  imp.raw_train_ = train;
  imp.imputed_train_ = imp.apply_statistics(train);
  return imp;
}

Imputer Imputer::fit_missing_category(const MaskedMatrix& train) {
  Imputer imp;
  imp.kind_ = ImputerKind::missing_category;
  imp.schema_ = train.columns();
  imp.fill_ = Eigen::VectorXd::Constant(train.cols(), kNaN);
  imp.fit_mask_.assign(static_cast<std::size_t>(train.cols()), false);
  for (Index j = 0; j < train.cols(); ++j) {
    const auto& c = train.column(j);
    if (!c.is_categorical()) continue;
    imp.fit_mask_[static_cast<std::size_t>(j)] = true;
    if (train.column_has_missing(j))
      imp.fill_(j) = c.n_levels();
    else if (has_observed(train, j))
      imp.fill_(j) = observed_mode(train, j);
  }
  imp.fitted_ = true;
  imp.raw_train_ = train;
  imp.imputed_train_ = imp.apply_statistics(train);
  return imp;
}

Imputer Imputer::fit_chained(const MaskedMatrix& train, ChainedOptions options) {
  Imputer imp;
  imp.kind_ = ImputerKind::chained;
  imp.schema_ = train.columns();
  imp.options_ = options;
  imp.fill_.resize(train.cols());
  for (Index j = 0; j < train.cols(); ++j)
    imp.fill_(j) = train.column(j).is_categorical() ? observed_mode(train, j) : observed_mean(train, j);
  imp.fit_mask_.assign(static_cast<std::size_t>(train.cols()), true);
  ChainedResult res = run_chained(train, options);
  imp.models_ = std::move(res.models);
  imp.raw_train_ = train;
  imp.imputed_train_ =
      MaskedMatrix(std::move(res.completed), Mask::Constant(train.rows(), train.cols(), false), train.columns());
  imp.fitted_ = true;
  return imp;
}

Imputer Imputer::restore(ImputerKind kind, std::vector<ColumnInfo> schema, Eigen::VectorXd fill,
                         std::vector<bool> fit_mask, ChainedOptions options, std::vector<ColumnModel> models,
                         MaskedMatrix raw_train, MaskedMatrix imputed_train) {
  Imputer imp;
  imp.kind_ = kind;
  imp.schema_ = std::move(schema);
  imp.fill_ = std::move(fill);
  imp.fit_mask_ = std::move(fit_mask);
  imp.options_ = options;
  imp.models_ = std::move(models);
  imp.raw_train_ = std::move(raw_train);
  imp.imputed_train_ = std::move(imputed_train);
  imp.fitted_ = true;
  return imp;
}

void Imputer::check_schema(const MaskedMatrix& x) const {
  if (!fitted_) throw std::logic_error("imputer used before fit");
  if (static_cast<std::size_t>(x.cols()) != schema_.size()) throw DimensionError("imputer: column count mismatch");
  for (Index j = 0; j < x.cols(); ++j) {
    const auto& a = x.column(j);
    const auto& b = schema_[static_cast<std::size_t>(j)];
    if (a.kind != b.kind || a.levels != b.levels) throw DimensionError("imputer: schema mismatch in column " + a.name);
  }
}

MaskedMatrix Imputer::apply_statistics(const MaskedMatrix& x) const {
  MaskedMatrix src = x;
  if (kind_ == ImputerKind::missing_category) {
    std::vector<Index> level_cols;
    for (Index j = 0; j < x.cols(); ++j)
      if (fit_mask_[static_cast<std::size_t>(j)] && fill_(j) == schema_[static_cast<std::size_t>(j)].n_levels())
        level_cols.push_back(j);
    src = encode_missing_category(x, level_cols);
  }
  Eigen::MatrixXd v = src.raw_values();
  Mask m = src.mask();
  for (Index j = 0; j < src.cols(); ++j) {
    if (!fit_mask_[static_cast<std::size_t>(j)]) continue;
    for (Index i = 0; i < src.rows(); ++i) {
      if (!m(i, j)) continue;
      if (!std::isfinite(fill_(j)))
        throw std::invalid_argument("imputer has no fill value for column '" + src.column(j).name + "'");
      v(i, j) = fill_(j);
      m(i, j) = false;
    }
  }
  return {std::move(v), std::move(m), src.columns()};
}

MaskedMatrix Imputer::transform(const MaskedMatrix& x, TestPolicy policy) const {
  check_schema(x);
  if (kind_ != ImputerKind::chained) return apply_statistics(x);
  if (x.rows() == 0) return x.with_mask(Mask(0, x.cols()));
  const Mask none = Mask::Constant(x.rows(), x.cols(), false);
  if (policy == TestPolicy::v2) {
    Eigen::MatrixXd work(x.rows(), x.cols());
    for (Index j = 0; j < x.cols(); ++j)
      for (Index i = 0; i < x.rows(); ++i) work(i, j) = x.value_or(i, j, fill_(j));
    for (int s = 0; s < options_.n_sweeps; ++s) {
      for (Index j = 0; j < x.cols(); ++j) {
        if (!x.column_has_missing(j)) continue;
        const Eigen::MatrixXd design = chained_design(work, schema_, j);
        const auto& model = models_[static_cast<std::size_t>(j)];
        for (Index i = 0; i < x.rows(); ++i)
          if (x.missing(i, j)) work(i, j) = predict_column(model, design.row(i), schema_[static_cast<std::size_t>(j)]);
      }
    }
    return {std::move(work), none, schema_};
  }
  const MaskedMatrix stacked = MaskedMatrix::vstack(raw_train_, x);
  ChainedResult res = run_chained(stacked, options_);
  Eigen::MatrixXd tail = res.completed.bottomRows(x.rows());
  return {std::move(tail), none, schema_};
}

}  // namespace missreg
