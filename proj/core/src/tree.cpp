#include "missreg/tree.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace missreg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Moments {
  double count = 0, sum = 0;
  void add(double y) {
    count += 1;
    sum += y;
  }
  [[nodiscard]] double score() const { return count > 0 ? sum * sum / count : 0.0; }
};

double gain(const Moments& l, const Moments& r, const Moments& parent, SplitCriterion c) {
  const double d = l.score() + r.score() - parent.score();
  return c == SplitCriterion::gini ? 2.0 * d : d;
}

bool missing_at(const Mask* mask, Index i, Index j) { return mask && (*mask)(i, j); }

void check_inputs(const Eigen::MatrixXd& x, const Mask* mask, const Eigen::VectorXd& y, const TreeSpec& spec) {
  spec.validate();
  if (y.size() != x.rows()) throw DimensionError("fit_tree: x and y row counts differ");
  if (mask && (mask->rows() != x.rows() || mask->cols() != x.cols()))
    throw DimensionError("fit_tree: mask shape mismatch");
  if (!y.allFinite()) throw std::invalid_argument("fit_tree: non-finite target");
  if (mask && !spec.mia && mask->any()) throw std::invalid_argument("fit_tree: masked cells require an MIA tree");
  for (Index j = 0; j < x.cols(); ++j)
    for (Index i = 0; i < x.rows(); ++i)
      if (!missing_at(mask, i, j) && !std::isfinite(x(i, j)))
        throw std::invalid_argument("fit_tree: non-finite observed feature value");
}

class Builder {
 public:
  Builder(const Eigen::MatrixXd& x, const Mask* mask, const Eigen::VectorXd& y, const TreeSpec& spec,
          std::uint64_t seed)
      : x_(x), mask_(mask), y_(y), spec_(spec), seed_(seed) {}

  Tree build(std::vector<Index> rows) {
    if (rows.empty()) throw std::invalid_argument("fit_tree: empty node");
    tree_.mia = spec_.mia;
    grow(std::move(rows), 0, 1);
    return std::move(tree_);
  }

 private:
  // `code` is the heap index of the node (root 1, children 2c and 2c+1); the
  // feature draw at a node depends only on it, so truncating a deeper tree
  // reproduces a shallower one exactly.
  int grow(std::vector<Index> rows, int depth, std::uint64_t code) {
    const int id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    double sum = 0.0;
    for (Index i : rows) sum += y_(i);
    {
      auto& node = tree_.nodes.back();
      node.value = sum / static_cast<double>(rows.size());
      node.n_samples = static_cast<Index>(rows.size());
      node.depth = depth;
    }
    if (depth >= spec_.max_depth || static_cast<Index>(rows.size()) < 2 * spec_.min_samples_leaf) return id;

    std::vector<Index> features;
    const Index d = x_.cols();
    if (spec_.mtry > 0 && spec_.mtry < d) {
      Rng rng(derive_seed({seed_, code}));
      features = sample_without_replacement(d, spec_.mtry, rng);
    } else {
      features = iota_rows(d);
    }
    const auto cands = enumerate_splits(x_, mask_, y_, rows, spec_, &features);
    const SplitCandidate* best = nullptr;
    for (const auto& c : cands)
      if (!best || c.decrease > best->decrease + 1e-12 * std::max(1.0, std::abs(best->decrease))) best = &c;
    if (!best || !(best->decrease > 1e-12 * std::max(1.0, std::abs(sum)))) return id;

    const SplitCandidate split = *best;
    MissingGoes missing_side = split.missing;
    bool any_missing = false;
    std::vector<Index> left, right;
    for (Index i : rows) {
      if (missing_at(mask_, i, split.feature)) {
        any_missing = true;
        (split.missing == MissingGoes::left ? left : right).push_back(i);
      } else {
        (x_(i, split.feature) <= split.threshold ? left : right).push_back(i);
      }
    }
    if (!any_missing) missing_side = left.size() >= right.size() ? MissingGoes::left : MissingGoes::right;
    {
      auto& node = tree_.nodes[static_cast<std::size_t>(id)];
      node.feature = split.feature;
      node.threshold = split.threshold;
      node.missing = missing_side;
      node.impurity_decrease = split.decrease;
    }
    const int l = grow(std::move(left), depth + 1, 2 * code);
    const int r = grow(std::move(right), depth + 1, 2 * code + 1);
    tree_.nodes[static_cast<std::size_t>(id)].left = l;
    tree_.nodes[static_cast<std::size_t>(id)].right = r;
    return id;
  }

  const Eigen::MatrixXd& x_;
  const Mask* mask_;
  const Eigen::VectorXd& y_;
  const TreeSpec& spec_;
  std::uint64_t seed_;
  Tree tree_;
};

}  // namespace

void TreeSpec::validate() const {
  if (max_depth < 1) throw std::invalid_argument("TreeSpec: max_depth must be >= 1");
  if (min_samples_leaf < 1) throw std::invalid_argument("TreeSpec: min_samples_leaf must be >= 1");
  if (mtry < 0) throw std::invalid_argument("TreeSpec: mtry must be >= 0");
}

void ForestSpec::validate() const {
  tree.validate();
  if (n_trees < 1) throw std::invalid_argument("ForestSpec: n_trees must be >= 1");
  if (!(feature_fraction > 0 && feature_fraction <= 1))
    throw std::invalid_argument("ForestSpec: feature_fraction must lie in (0, 1]");
}

std::vector<SplitCandidate> enumerate_splits(const Eigen::MatrixXd& x, const Mask* mask, const Eigen::VectorXd& y,
                                             const std::vector<Index>& rows, const TreeSpec& spec,
                                             const std::vector<Index>* features) {
  std::vector<SplitCandidate> out;
  Moments parent;
  for (Index i : rows) parent.add(y(i));
  const auto min_leaf = static_cast<double>(spec.min_samples_leaf);
  std::vector<std::pair<double, double>> obs;
  obs.reserve(rows.size());
  const std::vector<Index> all = features ? std::vector<Index>{} : iota_rows(x.cols());
  const std::vector<Index>& feats = features ? *features : all;
  for (Index j : feats) {
    obs.clear();
    Moments miss;
    for (Index i : rows) {
      if (missing_at(mask, i, j))
        miss.add(y(i));
      else
        obs.emplace_back(x(i, j), y(i));
    }
    if (miss.count > 0 && !spec.mia) throw std::invalid_argument("plain tree fed a masked cell");
    std::sort(obs.begin(), obs.end());
    Moments obs_total;
    for (const auto& [v, t] : obs) obs_total.add(t);
    Moments prefix;
    for (std::size_t k = 0; k + 1 < obs.size(); ++k) {
      prefix.add(obs[k].second);
      if (obs[k].first == obs[k + 1].first) continue;
      const double thr = 0.5 * (obs[k].first + obs[k + 1].first);
      Moments suffix{obs_total.count - prefix.count, obs_total.sum - prefix.sum};
      for (MissingGoes side : {MissingGoes::left, MissingGoes::right}) {
        if (side == MissingGoes::right && miss.count == 0) break;
        Moments l = prefix, r = suffix;
        if (side == MissingGoes::left) {
          l.count += miss.count;
          l.sum += miss.sum;
        } else {
          r.count += miss.count;
          r.sum += miss.sum;
        }
        if (l.count < min_leaf || r.count < min_leaf) continue;
        out.push_back({static_cast<int>(j), thr, side, gain(l, r, parent, spec.criterion),
                       static_cast<Index>(l.count), static_cast<Index>(r.count)});
      }
    }
    if (miss.count > 0 && !obs.empty() && obs_total.count >= min_leaf && miss.count >= min_leaf)
      out.push_back({static_cast<int>(j), kInf, MissingGoes::right, gain(obs_total, miss, parent, spec.criterion),
                     static_cast<Index>(obs_total.count), static_cast<Index>(miss.count)});
  }
  return out;
}

int Tree::leaf_of(const Eigen::MatrixXd& x, const Mask* mask, Index i, int max_depth) const {
  if (nodes.empty()) throw std::logic_error("empty tree");
  int id = 0;
  while (!nodes[static_cast<std::size_t>(id)].is_leaf() &&
         (max_depth < 0 || nodes[static_cast<std::size_t>(id)].depth < max_depth)) {
    const auto& node = nodes[static_cast<std::size_t>(id)];
    bool go_left;
    if (missing_at(mask, i, node.feature)) {
      if (!mia) throw std::invalid_argument("plain tree fed a masked cell");
      go_left = node.missing == MissingGoes::left;
    } else {
      go_left = x(i, node.feature) <= node.threshold;
    }
    id = go_left ? node.left : node.right;
  }
  return id;
}

Eigen::VectorXd Tree::predict(const Eigen::MatrixXd& x, const Mask* mask, int max_depth) const {
  if (mask && (mask->rows() != x.rows() || mask->cols() != x.cols())) throw DimensionError("Tree: mask shape mismatch");
  Eigen::VectorXd out(x.rows());
  for (Index i = 0; i < x.rows(); ++i) out(i) = nodes[static_cast<std::size_t>(leaf_of(x, mask, i, max_depth))].value;
  return out;
}

int Tree::depth() const {
  int d = 0;
  for (const auto& n : nodes) d = std::max(d, n.depth);
  return d;
}

int Tree::n_leaves() const {
  return static_cast<int>(std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

Tree fit_tree_on_rows(const Eigen::MatrixXd& x, const Mask* mask, const Eigen::VectorXd& y, const TreeSpec& spec,
                      std::vector<Index> rows, std::uint64_t seed) {
  check_inputs(x, mask, y, spec);
  return Builder(x, mask, y, spec, seed).build(std::move(rows));
}

Tree fit_tree(const Eigen::MatrixXd& x, const Mask* mask, const Eigen::VectorXd& y, const TreeSpec& spec,
              std::uint64_t seed) {
  return fit_tree_on_rows(x, mask, y, spec, iota_rows(x.rows()), seed);
}

Eigen::VectorXd Forest::predict(const Eigen::MatrixXd& x, const Mask* mask, int n_first, int max_depth) const {
  if (trees.empty()) throw std::logic_error("empty forest");
  const int k = n_first > 0 ? std::min<int>(n_first, static_cast<int>(trees.size())) : static_cast<int>(trees.size());
  Eigen::VectorXd out = Eigen::VectorXd::Zero(x.rows());
  for (int t = 0; t < k; ++t) out += trees[static_cast<std::size_t>(t)].predict(x, mask, max_depth);
  return out / static_cast<double>(k);
}

Forest fit_forest(const Eigen::MatrixXd& x, const Mask* mask, const Eigen::VectorXd& y, const ForestSpec& spec) {
  spec.validate();
  check_inputs(x, mask, y, spec.tree);
  TreeSpec ts = spec.tree;
  const auto d = static_cast<double>(x.cols());
  ts.mtry = std::max(1, static_cast<int>(std::lround(d * spec.feature_fraction)));
  Forest forest;
  forest.trees.reserve(static_cast<std::size_t>(spec.n_trees));
  const Index n = x.rows();
  for (int t = 0; t < spec.n_trees; ++t) {
    const std::uint64_t tree_seed = derive_seed({spec.seed, static_cast<std::uint64_t>(t)});
    Rng rng(derive_seed({tree_seed, hash_string("bootstrap")}));
    std::vector<Index> rows;
    if (spec.bootstrap) {
      std::uniform_int_distribution<Index> pick(0, n - 1);
      rows.resize(static_cast<std::size_t>(n));
      for (auto& r : rows) r = pick(rng);
    } else {
      rows = iota_rows(n);
    }
    forest.trees.push_back(Builder(x, mask, y, ts, tree_seed).build(std::move(rows)));
  }
  return forest;
}

}  // namespace missreg
