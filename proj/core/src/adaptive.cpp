#include "missreg/adaptive.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

namespace missreg {

namespace {

void for_each_subset(Index d, int size, const std::function<void(const std::vector<Index>&)>& fn) {
  std::vector<Index> cur;
  std::function<void(Index)> rec = [&](Index start) {
    if (static_cast<int>(cur.size()) == size) {
      fn(cur);
      return;
    }
    for (Index j = start; j < d; ++j) {
      cur.push_back(j);
      rec(j + 1);
      cur.pop_back();
    }
  };
  rec(0);
}

double sigmoid(double e) {
  if (e >= 0) return 1.0 / (1.0 + std::exp(-e));
  const double z = std::exp(e);
  return z / (1.0 + z);
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

void check_inputs(const MaskedMatrix& x, const TargetVector& y) {
  if (!x.all_continuous()) throw std::invalid_argument("adaptive models need a numeric matrix (one-hot encode first)");
  if (y.size() != x.rows()) throw DimensionError("adaptive: x and y row counts differ");
  if (x.cols() < 1) throw std::invalid_argument("adaptive: need at least one feature");
}

GlmSpec base_spec(Task task) {
  GlmSpec s;
  s.loss = task == Task::binary ? Loss::logistic : Loss::squared;
  return s;
}

GlmFit as_glm(const DenseFit& f, Loss loss) {
  GlmFit g;
  g.loss = loss;
  g.beta = f.beta;
  g.intercept = f.intercept;
  g.converged = true;
  return g;
}

/// Pattern partition grown by greedy mask-bit splits.
struct Grown {
  std::vector<PartitionNode> nodes;
  std::vector<DenseFit> node_fit;
  std::vector<std::vector<Index>> node_rows;
};

class PartitionBuilder {
 public:
  PartitionBuilder(const Eigen::MatrixXd& z, const Mask& mask, const Eigen::VectorXd& y, const FunctionClass& cls,
                   Task task, double scale)
      : z_(z), mask_(mask), y_(y), cls_(cls), task_(task), tiny_(1e-12 * scale) {}

  Grown grow(const std::vector<Index>& rows, int max_depth) {
    Grown g;
    rec(g, rows, 0, max_depth);
    return g;
  }

 private:
  struct Fitted {
    DenseFit fit;
    double sse = 0.0;
  };

  Fitted ls_fit(const std::vector<Index>& rows) const {
    const Eigen::MatrixXd zr = take_rows(z_, rows);
    const Eigen::VectorXd yr = take(y_, rows);
    Fitted f;
    f.fit = ridge_fit(zr, yr, 1e-8);
    f.sse = sse(f.fit, zr, yr);
    return f;
  }

  int rec(Grown& g, const std::vector<Index>& rows, int depth, int max_depth) {
    const int id = static_cast<int>(g.nodes.size());
    g.nodes.emplace_back();
    g.nodes.back().n_samples = static_cast<Index>(rows.size());
    g.nodes.back().depth = depth;
    const Fitted parent = ls_fit(rows);
    g.node_fit.push_back(task_ == Task::binary ? logistic_ridge_fit(take_rows(z_, rows), take(y_, rows), 1e-4)
                                               : parent.fit);
    g.node_rows.push_back(rows);
    if (depth >= max_depth || parent.sse <= tiny_) return id;

    Index best_j = -1;
    double best_loss = std::numeric_limits<double>::infinity();
    std::vector<Index> best0, best1;
    for (Index j = 0; j < mask_.cols(); ++j) {
      std::vector<Index> r0, r1;
      for (Index i : rows) (mask_(i, j) ? r1 : r0).push_back(i);
      if (static_cast<Index>(r0.size()) < cls_.min_leaf || static_cast<Index>(r1.size()) < cls_.min_leaf) continue;
      const double loss = ls_fit(r0).sse + ls_fit(r1).sse;
      if (loss < best_loss) {
        best_loss = loss;
        best_j = j;
        best0 = std::move(r0);
        best1 = std::move(r1);
      }
    }
    if (best_j < 0 || !((parent.sse - best_loss) / parent.sse >= cls_.min_gain)) return id;
    g.nodes[static_cast<std::size_t>(id)].feature = best_j;
    const int c0 = rec(g, best0, depth + 1, max_depth);
    const int c1 = rec(g, best1, depth + 1, max_depth);
    g.nodes[static_cast<std::size_t>(id)].child_observed = c0;
    g.nodes[static_cast<std::size_t>(id)].child_missing = c1;
    return id;
  }

  const Eigen::MatrixXd& z_;
  const Mask& mask_;
  const Eigen::VectorXd& y_;
  const FunctionClass& cls_;
  Task task_;
  double tiny_;
};

int route(const std::vector<PartitionNode>& nodes, const Mask& mask, Index row, int max_depth) {
  int id = 0;
  while (nodes[static_cast<std::size_t>(id)].feature >= 0 &&
         (max_depth < 0 || nodes[static_cast<std::size_t>(id)].depth < max_depth)) {
    const auto& n = nodes[static_cast<std::size_t>(id)];
    id = mask(row, n.feature) ? n.child_missing : n.child_observed;
  }
  return id;
}

}  // namespace

std::string FunctionClass::name() const {
  switch (kind) {
    case ClassKind::static_linear: return "static";
    case ClassKind::affine_intercept: return "affine_intercept";
    case ClassKind::affine: return "affine";
    case ClassKind::polynomial: return "polynomial:" + std::to_string(t);
    case ClassKind::finite: return "finite";
  }
  return "?";
}

FunctionClass FunctionClass::parse(const std::string& s) {
  if (s == "static") return static_linear();
  if (s == "affine_intercept") return affine_intercept();
  if (s == "affine") return affine();
  if (s == "finite") return finite();
  const std::string prefix = "polynomial:";
  if (s.rfind(prefix, 0) == 0) return polynomial(std::stoi(s.substr(prefix.size())));
  throw std::invalid_argument("unknown function class '" + s + "'");
}

std::vector<ExpandedColumn> expansion_columns(Index d, const FunctionClass& cls, bool affine_intercepts) {
  if (d < 1) throw std::invalid_argument("expansion needs d >= 1");
  std::vector<ExpandedColumn> cols;
  for (Index j = 0; j < d; ++j) cols.push_back({j, {}});
  switch (cls.kind) {
    case ClassKind::static_linear: break;
    case ClassKind::affine_intercept:
      for (Index j = 0; j < d; ++j) cols.push_back({-1, {j}});
      cols.push_back({-1, {}});
      break;
    case ClassKind::affine:
      for (Index j = 0; j < d; ++j)
        for (Index k = 0; k < d; ++k) cols.push_back({j, {k}});
      if (affine_intercepts)
        for (Index k = 0; k < d; ++k) cols.push_back({-1, {k}});
      break;
    case ClassKind::polynomial: {
      if (cls.t < 1 || cls.t > d) throw std::invalid_argument("polynomial degree must lie in [1, d]");
      cols.clear();
      for (int s = 0; s <= cls.t; ++s)
        for_each_subset(d, s, [&](const std::vector<Index>& J) {
          for (Index j = 0; j < d; ++j)
            if (std::find(J.begin(), J.end(), j) == J.end()) cols.push_back({j, J});
        });
      for (int s = 0; s <= cls.t; ++s) for_each_subset(d, s, [&](const std::vector<Index>& J) { cols.push_back({-1, J}); });
      break;
    }
    case ClassKind::finite: throw std::invalid_argument("the finite class has no fixed expansion");
  }
  return cols;
}

Eigen::RowVectorXd expand_row(const Eigen::MatrixXd& values, const Mask& mask, Index row,
                              const std::vector<ExpandedColumn>& columns) {
  Eigen::RowVectorXd out(static_cast<Index>(columns.size()));
  for (std::size_t k = 0; k < columns.size(); ++k) {
    const auto& c = columns[k];
    double v = 1.0;
    for (Index j : c.monomial)
      if (!mask(row, j)) {
        v = 0.0;
        break;
      }
    if (v != 0.0 && c.base >= 0) v = mask(row, c.base) ? 0.0 : values(row, c.base);
    out(static_cast<Index>(k)) = v;
  }
  return out;
}

Eigen::MatrixXd expand_matrix(const Eigen::MatrixXd& values, const Mask& mask,
                              const std::vector<ExpandedColumn>& columns) {
  if (values.rows() != mask.rows() || values.cols() != mask.cols()) throw DimensionError("expand: mask shape mismatch");
  Eigen::MatrixXd out(values.rows(), static_cast<Index>(columns.size()));
  for (std::size_t k = 0; k < columns.size(); ++k) {
    const auto& c = columns[k];
    for (Index i = 0; i < values.rows(); ++i) {
      double v = 1.0;
      for (Index j : c.monomial)
        if (!mask(i, j)) {
          v = 0.0;
          break;
        }
      if (v != 0.0 && c.base >= 0) v = mask(i, c.base) ? 0.0 : values(i, c.base);
      out(i, static_cast<Index>(k)) = v;
    }
  }
  return out;
}

ExpandedDesign expand(const MaskedMatrix& x, const FunctionClass& cls, bool affine_intercepts) {
  ExpandedDesign out;
  out.columns = expansion_columns(x.cols(), cls, affine_intercepts);
  out.matrix = expand_matrix(x.raw_values(), x.mask(), out.columns);
  return out;
}

int AdaptiveLinearModel::leaf_of(const Mask& mask, Index row) const { return route(partition, mask, row, -1); }

double AdaptiveLinearModel::score_row(const Eigen::MatrixXd& values, const Mask& mask, Index row) const {
  if (cls.kind == ClassKind::finite) {
    const auto& node = partition[static_cast<std::size_t>(leaf_of(mask, row))];
    const GlmFit& f = leaf_fits[static_cast<std::size_t>(node.leaf)];
    double s = f.intercept;
    for (Index j = 0; j < d; ++j)
      if (!mask(row, j)) s += f.beta(j) * values(row, j);
    return s;
  }
  return fit.intercept + expand_row(values, mask, row, columns).dot(fit.beta);
}

Eigen::VectorXd AdaptiveLinearModel::predict(const Eigen::MatrixXd& values, const Mask& mask) const {
  if (values.cols() != d || mask.cols() != d || mask.rows() != values.rows())
    throw DimensionError("adaptive model: input width does not match the fitted model");
  Eigen::VectorXd out(values.rows());
  if (cls.kind == ClassKind::finite) {
    for (Index i = 0; i < values.rows(); ++i) out(i) = score_row(values, mask, i);
  } else {
    out = (expand_matrix(values, mask, columns) * fit.beta).array() + fit.intercept;
  }
  if (task == Task::binary)
    for (Index i = 0; i < out.size(); ++i) out(i) = sigmoid(out(i));
  return out;
}

PatternWeights weights_for(const AdaptiveLinearModel& model, const Pattern& m) {
  if (static_cast<Index>(m.size()) != model.d) throw DimensionError("weights_for: pattern length mismatch");
  PatternWeights pw;
  if (model.cls.kind == ClassKind::finite) {
    Mask row(1, model.d);
    for (Index j = 0; j < model.d; ++j) row(0, j) = m[static_cast<std::size_t>(j)];
    const auto& node = model.partition[static_cast<std::size_t>(model.leaf_of(row, 0))];
    const GlmFit& f = model.leaf_fits[static_cast<std::size_t>(node.leaf)];
    pw.w = f.beta;
    pw.b = f.intercept;
    return pw;
  }
  pw.w = Eigen::VectorXd::Zero(model.d);
  pw.b = model.fit.intercept;
  for (std::size_t k = 0; k < model.columns.size(); ++k) {
    const auto& c = model.columns[k];
    bool on = true;
    for (Index j : c.monomial) on = on && m[static_cast<std::size_t>(j)];
    if (!on) continue;
    const double coef = model.fit.beta(static_cast<Index>(k));
    if (c.base < 0)
      pw.b += coef;
    else
      pw.w(c.base) += coef;
  }
  return pw;
}

AdaptiveLinearModel fit_adaptive(const MaskedMatrix& x, const TargetVector& y, const FunctionClass& cls,
                                 const AdaptiveSpec& spec) {
  if (cls.kind == ClassKind::finite) return fit_finite(x, y, cls, spec);
  check_inputs(x, y);
  if (spec.gamma_grid.empty()) throw std::invalid_argument("adaptive: empty gamma grid");
  AdaptiveLinearModel model;
  model.cls = cls;
  model.d = x.cols();
  model.task = y.task;
  model.columns = expansion_columns(x.cols(), cls, spec.affine_intercepts && cls.kind == ClassKind::affine);
  const Eigen::MatrixXd z = expand_matrix(x.raw_values(), x.mask(), model.columns);
  std::vector<std::vector<Index>> monomials;
  for (const auto& c : model.columns) monomials.push_back(c.monomial);
  const Eigen::VectorXd phi = spec.scale_penalties ? scaled_penalty_factors(x.mask(), monomials)
                                                   : Eigen::VectorXd::Ones(static_cast<Index>(monomials.size()));
  const auto folds = make_folds(x.rows(), spec.folds, spec.seed);
  double best = std::numeric_limits<double>::infinity();
  for (double gamma : spec.gamma_grid) {
    GlmSpec base = base_spec(y.task);
    base.penalty_factors = phi;
    for (std::size_t k = 0; k < monomials.size(); ++k)
      if (!monomials[k].empty()) base.penalty_factors(static_cast<Index>(k)) *= gamma;
    CvResult cv = cv_path(z, y.y, base, spec.grid, folds);
    if (cv.cv_loss < best) {
      best = cv.cv_loss;
      model.fit = std::move(cv.fit);
      model.gamma = gamma;
      model.cv_mse = cv.cv_mse;
    }
  }
  return model;
}

AdaptiveLinearModel fit_finite(const MaskedMatrix& x, const TargetVector& y, const FunctionClass& cls,
                               const AdaptiveSpec& spec) {
  check_inputs(x, y);
  if (cls.max_depth < 0) throw std::invalid_argument("finite: max_depth must be >= 0");
  if (cls.min_leaf < 1) throw std::invalid_argument("finite: min_leaf must be >= 1");
  AdaptiveLinearModel model;
  model.cls = cls;
  model.d = x.cols();
  model.task = y.task;
  const auto static_cols = expansion_columns(x.cols(), FunctionClass::static_linear());
  const Eigen::MatrixXd z = expand_matrix(x.raw_values(), x.mask(), static_cols);
  const double scale = (y.y.array() - y.y.mean()).square().sum() + 1e-300;
  PartitionBuilder builder(z, x.mask(), y.y, cls, y.task, scale);

  std::vector<int> depths = spec.finite_depths.empty() ? std::vector<int>{cls.max_depth} : spec.finite_depths;
  std::sort(depths.begin(), depths.end());
  const auto folds = make_folds(x.rows(), spec.folds, spec.seed);
  std::vector<double> mse(depths.size(), 0.0);
  for (const auto& fold : folds) {
    const Grown g = builder.grow(fold.train, depths.back());
    for (std::size_t k = 0; k < depths.size(); ++k) {
      double s = 0.0;
      for (Index i : fold.valid) {
        const int node = route(g.nodes, x.mask(), i, depths[k]);
        double pred = g.node_fit[static_cast<std::size_t>(node)].intercept +
                      z.row(i).dot(g.node_fit[static_cast<std::size_t>(node)].beta);
        if (y.task == Task::binary) pred = sigmoid(pred);
        s += (y.y(i) - pred) * (y.y(i) - pred);
      }
      mse[k] += s / static_cast<double>(fold.valid.size()) / static_cast<double>(folds.size());
    }
  }
  std::size_t best = 0;
  for (std::size_t k = 1; k < depths.size(); ++k)
    if (mse[k] < mse[best]) best = k;
  model.cls.max_depth = depths[best];
  model.cv_mse = mse[best];

  const Grown g = builder.grow(iota_rows(x.rows()), depths[best]);
  model.partition = g.nodes;
  const Loss loss = y.task == Task::binary ? Loss::logistic : Loss::squared;
  for (std::size_t id = 0; id < model.partition.size(); ++id) {
    auto& node = model.partition[id];
    if (node.feature >= 0) continue;
    const auto& rows = g.node_rows[id];
    const Eigen::MatrixXd zl = take_rows(z, rows);
    const Eigen::VectorXd yl = take(y.y, rows);
    GlmFit leaf;
    const bool cv_ok = spec.final_leaf_cv && static_cast<Index>(rows.size()) >= std::max(2 * spec.folds, 10);
    if (cv_ok) {
      leaf = cv_path(zl, yl, base_spec(y.task), spec.grid, spec.folds, spec.seed).fit;
    } else if (y.task == Task::binary) {
      leaf = as_glm(logistic_ridge_fit(zl, yl, 1e-6), loss);
    } else {
      leaf = as_glm(ridge_fit(zl, yl, 0.0), loss);
    }
    node.leaf = static_cast<int>(model.leaf_fits.size());
    model.leaf_fits.push_back(std::move(leaf));
  }
  return model;
}

AdaptiveLinearModel fit_adaptive_best(const MaskedMatrix& x, const TargetVector& y, const AdaptiveSpec& spec) {
  AdaptiveLinearModel best = fit_adaptive(x, y, FunctionClass::affine_intercept(), spec);
  AdaptiveSpec with_intercepts = spec;
  with_intercepts.affine_intercepts = true;
  AdaptiveLinearModel affine = fit_adaptive(x, y, FunctionClass::affine(), with_intercepts);
  if (affine.cv_mse < best.cv_mse) best = std::move(affine);
  AdaptiveLinearModel finite = fit_finite(x, y, FunctionClass::finite(), spec);
  if (finite.cv_mse < best.cv_mse) best = std::move(finite);
  return best;
}

DerivedImputation to_imputation(const AdaptiveLinearModel& model) {
  if (model.cls.kind != ClassKind::affine_intercept)
    throw std::invalid_argument("to_imputation needs an affine_intercept model");
  DerivedImputation out;
  out.mu = Eigen::VectorXd::Zero(model.d);
  out.undefined.assign(static_cast<std::size_t>(model.d), false);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(model.d), b = Eigen::VectorXd::Zero(model.d);
  for (std::size_t k = 0; k < model.columns.size(); ++k) {
    const auto& c = model.columns[k];
    if (c.base >= 0 && c.monomial.empty()) w(c.base) = model.fit.beta(static_cast<Index>(k));
    if (c.base < 0 && c.monomial.size() == 1) b(c.monomial.front()) = model.fit.beta(static_cast<Index>(k));
  }
  for (Index j = 0; j < model.d; ++j) {
    if (std::abs(w(j)) < 1e-12) {
      out.undefined[static_cast<std::size_t>(j)] = true;
      out.mu(j) = std::numeric_limits<double>::quiet_NaN();
    } else {
      out.mu(j) = b(j) / w(j);
    }
  }
  return out;
}

}  // namespace missreg
