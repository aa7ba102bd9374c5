#include "missreg/joint.hpp"

#include "missreg/metrics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace missreg {

void JointConfig::validate() const {
  if (max_outer < 1 || max_inner_passes < 1) throw std::invalid_argument("joint: iteration limits must be positive");
  if (!(min_rel_improve >= 0.0)) throw std::invalid_argument("joint: min_rel_improve must be >= 0");
}

double joint_error(Task task, const Eigen::VectorXd& y, const Eigen::VectorXd& pred) {
  if (task == Task::binary) return 1.0 - auc(y, pred);
  return mse(y, pred);
}

Eigen::MatrixXd JointModel::impute(const Eigen::MatrixXd& values, const Mask& mask) const {
  if (values.cols() != mu.size() || mask.cols() != mu.size() || mask.rows() != values.rows())
    throw DimensionError("joint model: input width does not match mu");
  Eigen::MatrixXd out = values;
  for (Index j = 0; j < out.cols(); ++j)
    for (Index i = 0; i < out.rows(); ++i)
      if (mask(i, j)) out(i, j) = mu(j);
  return out;
}

Eigen::VectorXd JointModel::predict(const Eigen::MatrixXd& values, const Mask& mask) const {
  return predictor.predict(impute(values, mask));
}

namespace {

// Algorithm body with the downstream choice held fixed.
JointModel run_joint(const MaskedMatrix& x, const TargetVector& y, const JointConfig& config,
                     const DownstreamChoice* fixed) {
  const Index n = x.rows();
  const Index d = x.cols();
  const Mask& mask = x.mask();

  JointModel model;
  model.mu = Eigen::VectorXd::Zero(d);
  model.step = Eigen::VectorXd::Zero(d);
  std::vector<std::vector<Index>> missing_rows(static_cast<std::size_t>(d));
  for (Index j = 0; j < d; ++j) {
    double s = 0.0, ss = 0.0;
    Index k = 0;
    for (Index i = 0; i < n; ++i) {
      if (mask(i, j)) {
        missing_rows[static_cast<std::size_t>(j)].push_back(i);
        continue;
      }
      s += x.raw_values()(i, j);
      ++k;
    }
    if (k == 0) throw std::invalid_argument("joint: column '" + x.column(j).name + "' has no observed cell");
    const double mean = s / static_cast<double>(k);
    for (Index i = 0; i < n; ++i)
      if (!mask(i, j)) ss += (x.raw_values()(i, j) - mean) * (x.raw_values()(i, j) - mean);
    model.mu(j) = mean;
    model.step(j) = std::sqrt(ss / static_cast<double>(k)) / std::sqrt(static_cast<double>(n));
  }

  Eigen::MatrixXd xmu = model.impute(x.raw_values(), mask);
  DownstreamOptions options = config.options;
  options.task = y.task;
  options.mia = false;
  model.choice = fixed ? *fixed : select_downstream(xmu, nullptr, y.y, config.downstream, options);

  Eigen::VectorXd mu = model.mu;
  double best_err = std::numeric_limits<double>::infinity();
  for (int outer = 0; outer < config.max_outer; ++outer) {
    Downstream f = fit_downstream(xmu, nullptr, y.y, model.choice, y.task);
    Eigen::VectorXd pred = f.predict(xmu);
    double err = joint_error(y.task, y.y, pred);
    const double start_err = err;
    model.outer_starts.push_back(model.error_trace.size());
    model.error_trace.push_back(err);
    if (err < best_err) {
      best_err = err;
      model.mu = mu;
      model.predictor = f;
    }
    if (!x.has_missing()) break;

    for (int pass = 0; pass < config.max_inner_passes; ++pass) {
      bool moved = false;
      for (Index j = 0; j < d; ++j) {
        const auto& rows = missing_rows[static_cast<std::size_t>(j)];
        if (rows.empty() || model.step(j) <= 0.0) continue;
        Eigen::MatrixXd sub(static_cast<Index>(rows.size()), d);
        for (std::size_t r = 0; r < rows.size(); ++r) sub.row(static_cast<Index>(r)) = xmu.row(rows[r]);
        double best_eps_err = err;
        double best_eps = 0.0;
        Eigen::VectorXd best_sub_pred;
        for (double eps : {-1.0, 1.0}) {
          const double cand = mu(j) + eps * model.step(j);
          sub.col(j).setConstant(cand);
          const Eigen::VectorXd sub_pred = f.predict(sub);
          Eigen::VectorXd trial = pred;
          for (std::size_t r = 0; r < rows.size(); ++r) trial(rows[r]) = sub_pred(static_cast<Index>(r));
          const double e = joint_error(y.task, y.y, trial);
          if (e < best_eps_err) {
            best_eps_err = e;
            best_eps = eps;
            best_sub_pred = sub_pred;
          }
        }
        if (best_eps == 0.0) continue;
        mu(j) += best_eps * model.step(j);
        for (std::size_t r = 0; r < rows.size(); ++r) {
          xmu(rows[r], j) = mu(j);
          pred(rows[r]) = best_sub_pred(static_cast<Index>(r));
        }
        err = best_eps_err;
        model.error_trace.push_back(err);
        moved = true;
        if (err < best_err) {
          best_err = err;
          model.mu = mu;
          model.predictor = f;
        }
      }
      if (!moved) break;
    }
    const double rel = start_err > 0.0 ? (start_err - err) / start_err : 0.0;
    if (rel < config.min_rel_improve) break;
  }
  model.train_error = best_err;
  return model;
}

}  // namespace

JointModel fit_joint(const MaskedMatrix& x, const TargetVector& y, const JointConfig& config) {
  config.validate();
  if (!x.all_continuous()) throw std::invalid_argument("joint: needs a numeric matrix (one-hot encode first)");
  if (y.size() != x.rows()) throw DimensionError("joint: x and y row counts differ");
  if (config.downstream != DownstreamKind::best || !x.has_missing()) return run_joint(x, y, config, nullptr);

  // best: each family gets its hyper-parameters on the mean-imputed matrix,
  // then the whole joint procedure is scored on shared folds.
  Eigen::MatrixXd xmean = x.raw_values();
  for (Index j = 0; j < x.cols(); ++j) {
    double s = 0.0;
    Index k = 0;
    for (Index i = 0; i < x.rows(); ++i)
      if (!x.missing(i, j)) {
        s += x.value(i, j);
        ++k;
      }
    if (k == 0) throw std::invalid_argument("joint: column '" + x.column(j).name + "' has no observed cell");
    for (Index i = 0; i < x.rows(); ++i)
      if (x.missing(i, j)) xmean(i, j) = s / static_cast<double>(k);
  }
  DownstreamOptions options = config.options;
  options.task = y.task;
  options.mia = false;
  const auto folds = make_folds(x.rows(), options.folds, options.seed);
  DownstreamChoice best_choice;
  double best_mse = std::numeric_limits<double>::infinity();
  for (DownstreamKind kind : {DownstreamKind::linear, DownstreamKind::tree, DownstreamKind::forest}) {
    DownstreamChoice choice = select_downstream(xmean, nullptr, y.y, kind, options);
    double total = 0.0;
    bool ok = true;
    for (const auto& f : folds) {
      const MaskedMatrix xt = x.select_rows(f.train), xv = x.select_rows(f.valid);
      bool observed = true;
      for (Index j = 0; j < xt.cols() && observed; ++j) observed = xt.missing_count(j) < xt.rows();
      if (!observed) {
        ok = false;
        break;
      }
      const TargetVector yt = y.select(f.train), yv = y.select(f.valid);
      const JointModel m = run_joint(xt, yt, config, &choice);
      total += (yv.y - m.predict(xv)).squaredNorm();
    }
    if (!ok) continue;
    choice.cv_mse = total / static_cast<double>(x.rows());
    if (choice.cv_mse < best_mse) {
      best_mse = choice.cv_mse;
      best_choice = choice;
    }
  }
  if (!(best_mse < std::numeric_limits<double>::infinity())) return run_joint(x, y, config, nullptr);
  return run_joint(x, y, config, &best_choice);
}

}  // namespace missreg
