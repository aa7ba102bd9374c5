#include "missreg/downstream.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace missreg {

namespace {

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& m, const std::vector<Index>& rows) {
  Eigen::MatrixXd out(static_cast<Index>(rows.size()), m.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) out.row(static_cast<Index>(r)) = m.row(rows[r]);
  return out;
}

Mask take_mask(const Mask& m, const std::vector<Index>& rows) {
  Mask out(static_cast<Index>(rows.size()), m.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) out.row(static_cast<Index>(r)) = m.row(rows[r]);
  return out;
}

Eigen::VectorXd take(const Eigen::VectorXd& v, const std::vector<Index>& rows) {
  Eigen::VectorXd out(static_cast<Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) out(static_cast<Index>(r)) = v(rows[r]);
  return out;
}

GlmSpec base_glm(Task task) {
  GlmSpec spec;
  spec.loss = task == Task::binary ? Loss::logistic : Loss::squared;
  return spec;
}

}  // namespace

std::string to_string(Family f) {
  switch (f) {
    case Family::linear: return "linear";
    case Family::tree: return "tree";
    case Family::forest: return "forest";
  }
  return "?";
}

std::string to_string(DownstreamKind k) {
  switch (k) {
    case DownstreamKind::linear: return "linear";
    case DownstreamKind::tree: return "tree";
    case DownstreamKind::forest: return "forest";
    case DownstreamKind::best: return "best";
  }
  return "?";
}

Family parse_family(const std::string& s) {
  if (s == "linear") return Family::linear;
  if (s == "tree") return Family::tree;
  if (s == "forest") return Family::forest;
  throw std::invalid_argument("unknown predictor family '" + s + "'");
}

DownstreamKind parse_downstream_kind(const std::string& s) {
  if (s == "best") return DownstreamKind::best;
  switch (parse_family(s)) {
    case Family::linear: return DownstreamKind::linear;
    case Family::tree: return DownstreamKind::tree;
    case Family::forest: return DownstreamKind::forest;
  }
  return DownstreamKind::best;
}

DownstreamChoice select_downstream(const Eigen::MatrixXd& x, const Mask* mask, const Eigen::VectorXd& y,
                                   DownstreamKind kind, const DownstreamOptions& options) {
  if (y.size() != x.rows()) throw DimensionError("select_downstream: row mismatch");
  const bool masked = mask && mask->any();
  if (masked && !options.mia) throw std::invalid_argument("select_downstream: masked input needs MIA predictors");
  const auto folds = make_folds(x.rows(), options.folds, options.seed);
  const double inf = std::numeric_limits<double>::infinity();
  DownstreamChoice best;
  best.cv_mse = inf;
  auto consider = [&](const DownstreamChoice& c) {
    if (c.cv_mse < best.cv_mse) best = c;
  };

  if ((kind == DownstreamKind::linear || kind == DownstreamKind::best) && !masked) {
    const CvResult cv = cv_path(x, y, base_glm(options.task), options.glm_grid, folds);
    DownstreamChoice c;
    c.family = Family::linear;
    c.glm = cv.best;
    c.cv_mse = cv.cv_mse;
    consider(c);
  } else if (kind == DownstreamKind::linear) {
    throw std::invalid_argument("linear predictor cannot consume masked cells");
  }

  if (kind == DownstreamKind::tree || kind == DownstreamKind::best) {
    const int max_depth = *std::max_element(options.tree_depths.begin(), options.tree_depths.end());
    std::vector<double> mse(options.tree_depths.size(), 0.0);
    for (const auto& fold : folds) {
      const Eigen::MatrixXd xt = take_rows(x, fold.train), xv = take_rows(x, fold.valid);
      const Eigen::VectorXd yt = take(y, fold.train), yv = take(y, fold.valid);
      Mask mt, mv;
      if (mask) {
        mt = take_mask(*mask, fold.train);
        mv = take_mask(*mask, fold.valid);
      }
      TreeSpec ts;
      ts.max_depth = max_depth;
      ts.min_samples_leaf = options.min_samples_leaf;
      ts.mia = options.mia;
      ts.criterion = options.task == Task::binary ? SplitCriterion::gini : SplitCriterion::variance;
      const Tree tree = fit_tree(xt, mask ? &mt : nullptr, yt, ts);
      for (std::size_t k = 0; k < options.tree_depths.size(); ++k) {
        const Eigen::VectorXd pred = tree.predict(xv, mask ? &mv : nullptr, options.tree_depths[k]);
        mse[k] += (yv - pred).squaredNorm() / static_cast<double>(yv.size()) / static_cast<double>(folds.size());
      }
    }
    for (std::size_t k = 0; k < options.tree_depths.size(); ++k) {
      DownstreamChoice c;
      c.family = Family::tree;
      c.tree.max_depth = options.tree_depths[k];
      c.tree.min_samples_leaf = options.min_samples_leaf;
      c.tree.mia = options.mia;
      c.tree.criterion = options.task == Task::binary ? SplitCriterion::gini : SplitCriterion::variance;
      c.cv_mse = mse[k];
      consider(c);
    }
  }

  if (kind == DownstreamKind::forest || kind == DownstreamKind::best) {
    const int max_depth = *std::max_element(options.forest_depths.begin(), options.forest_depths.end());
    const int max_trees = *std::max_element(options.forest_trees.begin(), options.forest_trees.end());
    ForestSpec fs;
    fs.n_trees = max_trees;
    fs.tree.max_depth = max_depth;
    fs.tree.min_samples_leaf = options.min_samples_leaf;
    fs.tree.mia = options.mia;
    fs.tree.criterion = options.task == Task::binary ? SplitCriterion::gini : SplitCriterion::variance;
    fs.seed = derive_seed({options.seed, hash_string("forest")});
    Eigen::MatrixXd mse = Eigen::MatrixXd::Zero(static_cast<Index>(options.forest_trees.size()),
                                                static_cast<Index>(options.forest_depths.size()));
    for (const auto& fold : folds) {
      const Eigen::MatrixXd xt = take_rows(x, fold.train), xv = take_rows(x, fold.valid);
      const Eigen::VectorXd yt = take(y, fold.train), yv = take(y, fold.valid);
      Mask mt, mv;
      if (mask) {
        mt = take_mask(*mask, fold.train);
        mv = take_mask(*mask, fold.valid);
      }
      const Forest forest = fit_forest(xt, mask ? &mt : nullptr, yt, fs);
      for (std::size_t a = 0; a < options.forest_trees.size(); ++a)
        for (std::size_t b = 0; b < options.forest_depths.size(); ++b) {
          const Eigen::VectorXd pred =
              forest.predict(xv, mask ? &mv : nullptr, options.forest_trees[a], options.forest_depths[b]);
          mse(static_cast<Index>(a), static_cast<Index>(b)) +=
              (yv - pred).squaredNorm() / static_cast<double>(yv.size()) / static_cast<double>(folds.size());
        }
    }
    for (std::size_t a = 0; a < options.forest_trees.size(); ++a)
      for (std::size_t b = 0; b < options.forest_depths.size(); ++b) {
        DownstreamChoice c;
        c.family = Family::forest;
        c.forest = fs;
        c.forest.n_trees = options.forest_trees[a];
        c.forest.tree.max_depth = options.forest_depths[b];
        c.cv_mse = mse(static_cast<Index>(a), static_cast<Index>(b));
        consider(c);
      }
  }
  if (!(best.cv_mse < inf)) throw std::runtime_error("select_downstream: no candidate could be evaluated");
  return best;
}

Downstream fit_downstream(const Eigen::MatrixXd& x, const Mask* mask, const Eigen::VectorXd& y,
                          const DownstreamChoice& choice, Task task) {
  Downstream out;
  out.family = choice.family;
  out.task = task;
  switch (choice.family) {
    case Family::linear:
      if (mask && mask->any()) throw std::invalid_argument("linear predictor cannot consume masked cells");
      out.glm = fit_glm(x, y, choice.glm);
      break;
    case Family::tree: out.tree = fit_tree(x, mask, y, choice.tree); break;
    case Family::forest: out.forest = fit_forest(x, mask, y, choice.forest); break;
  }
  return out;
}

Downstream fit_downstream_cv(const Eigen::MatrixXd& x, const Mask* mask, const Eigen::VectorXd& y,
                             DownstreamKind kind, const DownstreamOptions& options, DownstreamChoice* chosen) {
  const DownstreamChoice choice = select_downstream(x, mask, y, kind, options);
  if (chosen) *chosen = choice;
  return fit_downstream(x, mask, y, choice, options.task);
}

Eigen::VectorXd Downstream::predict(const Eigen::MatrixXd& x, const Mask* mask) const {
  switch (family) {
    case Family::linear:
      if (mask && mask->any()) throw std::invalid_argument("linear predictor cannot consume masked cells");
      return glm.predict(x);
    case Family::tree: return tree.predict(x, mask);
    case Family::forest: return forest.predict(x, mask);
  }
  return {};
}

}  // namespace missreg
