#include "missreg/serialize.hpp"

#include <cmath>
#include <fstream>
#include <limits>

namespace missreg {

using nlohmann::json;

namespace {

constexpr const char* kFormat = "missreg-model";
constexpr int kVersion = 1;

json num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double get_num(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  throw FormatError("model document: expected a number");
}

json vec(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(num(v(i)));
  return a;
}

Eigen::VectorXd get_vec(const json& j) {
  Eigen::VectorXd v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Index>(i)) = get_num(j[i]);
  return v;
}

json columns_json(const std::vector<ColumnInfo>& cols) {
  json a = json::array();
  for (const auto& c : cols)
    a.push_back({{"name", c.name}, {"kind", c.is_categorical() ? "categorical" : "continuous"}, {"levels", c.levels}});
  return a;
}

std::vector<ColumnInfo> get_columns(const json& j) {
  std::vector<ColumnInfo> out;
  for (const auto& c : j) {
    const auto kind = c.at("kind").get<std::string>();
    if (kind == "categorical")
      out.push_back(ColumnInfo::categorical(c.at("name").get<std::string>(), c.at("levels").get<std::vector<std::string>>()));
    else
      out.push_back(ColumnInfo::continuous(c.at("name").get<std::string>()));
  }
  return out;
}

json dense_json(const DenseFit& f) { return {{"intercept", num(f.intercept)}, {"beta", vec(f.beta)}}; }
DenseFit get_dense(const json& j) { return {get_num(j.at("intercept")), get_vec(j.at("beta"))}; }

json glm_json(const GlmFit& f) {
  return {{"loss", to_string(f.loss)}, {"intercept", num(f.intercept)}, {"beta", vec(f.beta)},
          {"converged", f.converged}, {"iterations", f.iterations}};
}

GlmFit get_glm(const json& j) {
  GlmFit f;
  f.loss = j.at("loss").get<std::string>() == "logistic" ? Loss::logistic : Loss::squared;
  f.intercept = get_num(j.at("intercept"));
  f.beta = get_vec(j.at("beta"));
  f.converged = j.at("converged").get<bool>();
  f.iterations = j.at("iterations").get<int>();
  return f;
}

json glm_spec_json(const GlmSpec& s) {
  return {{"loss", to_string(s.loss)}, {"lambda", num(s.lambda)}, {"alpha", num(s.alpha)},
          {"penalty_factors", vec(s.penalty_factors)}, {"standardize", s.standardize}};
}

GlmSpec get_glm_spec(const json& j) {
  GlmSpec s;
  s.loss = j.at("loss").get<std::string>() == "logistic" ? Loss::logistic : Loss::squared;
  s.lambda = get_num(j.at("lambda"));
  s.alpha = get_num(j.at("alpha"));
  s.penalty_factors = get_vec(j.at("penalty_factors"));
  s.standardize = j.at("standardize").get<bool>();
  return s;
}

json tree_json(const Tree& t) {
  json nodes = json::array();
  for (const auto& n : t.nodes)
    nodes.push_back({n.feature, num(n.threshold), n.missing == MissingGoes::left ? 0 : 1, n.left, n.right, num(n.value),
                     n.n_samples, n.depth});
  return {{"mia", t.mia}, {"nodes", nodes}};
}

Tree get_tree(const json& j) {
  Tree t;
  t.mia = j.at("mia").get<bool>();
  for (const auto& a : j.at("nodes")) {
    TreeNode n;
    n.feature = a.at(0).get<int>();
    n.threshold = get_num(a.at(1));
    n.missing = a.at(2).get<int>() == 0 ? MissingGoes::left : MissingGoes::right;
    n.left = a.at(3).get<int>();
    n.right = a.at(4).get<int>();
    n.value = get_num(a.at(5));
    n.n_samples = a.at(6).get<Index>();
    n.depth = a.at(7).get<int>();
    t.nodes.push_back(n);
  }
  return t;
}

json choice_json(const DownstreamChoice& c) {
  return {{"family", to_string(c.family)},
          {"cv_mse", num(c.cv_mse)},
          {"glm", glm_spec_json(c.glm)},
          {"tree_depth", c.tree.max_depth},
          {"forest_trees", c.forest.n_trees},
          {"forest_depth", c.forest.tree.max_depth}};
}

DownstreamChoice get_choice(const json& j) {
  DownstreamChoice c;
  c.family = parse_family(j.at("family").get<std::string>());
  c.cv_mse = get_num(j.at("cv_mse"));
  c.glm = get_glm_spec(j.at("glm"));
  c.tree.max_depth = j.at("tree_depth").get<int>();
  c.forest.n_trees = j.at("forest_trees").get<int>();
  c.forest.tree.max_depth = j.at("forest_depth").get<int>();
  return c;
}

Task get_task(const json& j) { return j.get<std::string>() == "binary" ? Task::binary : Task::regression; }
const char* task_name(Task t) { return t == Task::binary ? "binary" : "regression"; }

json imputer_json(const Imputer& imp) {
  json models = json::array();
  for (const auto& m : imp.models()) {
    json classes = json::array();
    for (const auto& c : m.classes) classes.push_back(dense_json(c));
    models.push_back({{"linear", dense_json(m.linear)}, {"classes", classes}, {"class_present", m.class_present}});
  }
  json out = {{"kind", to_string(imp.kind())},
              {"schema", columns_json(imp.schema())},
              {"fill", vec(imp.fill())},
              {"fit_mask", imp.fit_mask()},
              {"n_sweeps", imp.chained_options().n_sweeps},
              {"ridge", num(imp.chained_options().ridge)},
              {"models", models}};
  if (imp.kind() == ImputerKind::chained) {
    out["raw_train"] = to_json(imp.raw_train());
    out["imputed_train"] = to_json(imp.imputed_train());
  }
  return out;
}

Imputer get_imputer(const json& j) {
  std::vector<ColumnModel> models;
  for (const auto& m : j.at("models")) {
    ColumnModel cm;
    cm.linear = get_dense(m.at("linear"));
    for (const auto& c : m.at("classes")) cm.classes.push_back(get_dense(c));
    cm.class_present = m.at("class_present").get<std::vector<bool>>();
    models.push_back(std::move(cm));
  }
  ChainedOptions opt;
  opt.n_sweeps = j.at("n_sweeps").get<int>();
  opt.ridge = get_num(j.at("ridge"));
  MaskedMatrix raw, imputed;
  if (j.contains("raw_train")) {
    raw = masked_matrix_from_json(j.at("raw_train"));
    imputed = masked_matrix_from_json(j.at("imputed_train"));
  }
  return Imputer::restore(parse_imputer_kind(j.at("kind").get<std::string>()), get_columns(j.at("schema")),
                          get_vec(j.at("fill")), j.at("fit_mask").get<std::vector<bool>>(), opt, std::move(models),
                          std::move(raw), std::move(imputed));
}

}  // namespace

json to_json(const MaskedMatrix& x) {
  json rows = json::array();
  for (Index i = 0; i < x.rows(); ++i) {
    json r = json::array();
    for (Index j = 0; j < x.cols(); ++j) r.push_back(x.missing(i, j) ? json(nullptr) : num(x.raw_values()(i, j)));
    rows.push_back(std::move(r));
  }
  return {{"columns", columns_json(x.columns())}, {"rows", rows}};
}

MaskedMatrix masked_matrix_from_json(const json& j) {
  auto cols = get_columns(j.at("columns"));
  const auto& rows = j.at("rows");
  const auto n = static_cast<Index>(rows.size());
  const auto d = static_cast<Index>(cols.size());
  Eigen::MatrixXd v = Eigen::MatrixXd::Constant(n, d, std::numeric_limits<double>::quiet_NaN());
  Mask m = Mask::Constant(n, d, false);
  for (Index i = 0; i < n; ++i) {
    const auto& r = rows[static_cast<std::size_t>(i)];
    if (static_cast<Index>(r.size()) != d) throw FormatError("model document: ragged matrix");
    for (Index k = 0; k < d; ++k) {
      if (r[static_cast<std::size_t>(k)].is_null())
        m(i, k) = true;
      else
        v(i, k) = get_num(r[static_cast<std::size_t>(k)]);
    }
  }
  return {std::move(v), std::move(m), std::move(cols)};
}

json to_json(const AdaptiveLinearModel& m) {
  json columns = json::array();
  for (const auto& c : m.columns) columns.push_back({{"base", c.base}, {"monomial", c.monomial}});
  json partition = json::array();
  for (const auto& n : m.partition)
    partition.push_back({n.feature, n.child_observed, n.child_missing, n.leaf, n.n_samples, n.depth});
  json leaves = json::array();
  for (const auto& f : m.leaf_fits) leaves.push_back(glm_json(f));
  return {{"class", m.cls.name()},
          {"max_depth", m.cls.max_depth},
          {"min_leaf", m.cls.min_leaf},
          {"min_gain", num(m.cls.min_gain)},
          {"d", m.d},
          {"task", task_name(m.task)},
          {"columns", columns},
          {"fit", glm_json(m.fit)},
          {"partition", partition},
          {"leaf_fits", leaves},
          {"gamma", num(m.gamma)},
          {"cv_mse", num(m.cv_mse)}};
}

AdaptiveLinearModel adaptive_from_json(const json& j) {
  AdaptiveLinearModel m;
  m.cls = FunctionClass::parse(j.at("class").get<std::string>());
  m.cls.max_depth = j.at("max_depth").get<int>();
  m.cls.min_leaf = j.at("min_leaf").get<Index>();
  m.cls.min_gain = get_num(j.at("min_gain"));
  m.d = j.at("d").get<Index>();
  m.task = get_task(j.at("task"));
  for (const auto& c : j.at("columns"))
    m.columns.push_back({c.at("base").get<Index>(), c.at("monomial").get<std::vector<Index>>()});
  m.fit = get_glm(j.at("fit"));
  for (const auto& a : j.at("partition")) {
    PartitionNode n;
    n.feature = a.at(0).get<Index>();
    n.child_observed = a.at(1).get<int>();
    n.child_missing = a.at(2).get<int>();
    n.leaf = a.at(3).get<int>();
    n.n_samples = a.at(4).get<Index>();
    n.depth = a.at(5).get<int>();
    m.partition.push_back(n);
  }
  for (const auto& f : j.at("leaf_fits")) m.leaf_fits.push_back(get_glm(f));
  m.gamma = get_num(j.at("gamma"));
  m.cv_mse = get_num(j.at("cv_mse"));
  return m;
}

json to_json(const Downstream& d) {
  json trees = json::array();
  for (const auto& t : d.forest.trees) trees.push_back(tree_json(t));
  return {{"family", to_string(d.family)},
          {"task", task_name(d.task)},
          {"glm", glm_json(d.glm)},
          {"tree", tree_json(d.tree)},
          {"forest", trees}};
}

Downstream downstream_from_json(const json& j) {
  Downstream d;
  d.family = parse_family(j.at("family").get<std::string>());
  d.task = get_task(j.at("task"));
  d.glm = get_glm(j.at("glm"));
  d.tree = get_tree(j.at("tree"));
  for (const auto& t : j.at("forest")) d.forest.trees.push_back(get_tree(t));
  return d;
}

json to_json(const Pipeline& p) {
  json imputers = json::array();
  for (const auto& imp : p.imputers) imputers.push_back(imputer_json(imp));
  json doc = {{"format", kFormat},
              {"version", kVersion},
              {"method", p.method.name()},
              {"task", task_name(p.task)},
              {"schema", columns_json(p.schema)},
              {"encoded_schema", columns_json(p.encoded_schema)},
              {"imputers", imputers},
              {"kept_columns", p.kept_columns},
              {"kept_fill", vec(p.kept_fill)},
              {"choice", choice_json(p.choice)},
              {"downstream", to_json(p.downstream)},
              {"constant", p.constant ? num(*p.constant) : json(nullptr)}};
  if (p.method.kind == MethodKind::adaptive) doc["adaptive"] = to_json(p.adaptive);
  if (p.method.kind == MethodKind::joint) {
    doc["joint"] = {{"mu", vec(p.joint.mu)},
                    {"step", vec(p.joint.step)},
                    {"predictor", to_json(p.joint.predictor)},
                    {"train_error", num(p.joint.train_error)},
                    {"error_trace", p.joint.error_trace}};
  }
  return doc;
}

Pipeline pipeline_from_json(const json& j) {
  try {
    if (j.at("format").get<std::string>() != kFormat) throw FormatError("not a model document");
    if (j.at("version").get<int>() != kVersion) throw FormatError("unsupported model document version");
    Pipeline p;
    p.method = MethodSpec::parse(j.at("method").get<std::string>());
    p.task = get_task(j.at("task"));
    p.schema = get_columns(j.at("schema"));
    p.encoded_schema = get_columns(j.at("encoded_schema"));
    for (const auto& imp : j.at("imputers")) p.imputers.push_back(get_imputer(imp));
    p.kept_columns = j.at("kept_columns").get<std::vector<Index>>();
    p.kept_fill = get_vec(j.at("kept_fill"));
    p.choice = get_choice(j.at("choice"));
    p.downstream = downstream_from_json(j.at("downstream"));
    if (!j.at("constant").is_null()) p.constant = get_num(j.at("constant"));
    if (j.contains("adaptive")) p.adaptive = adaptive_from_json(j.at("adaptive"));
    if (j.contains("joint")) {
      const auto& jj = j.at("joint");
      p.joint.mu = get_vec(jj.at("mu"));
      p.joint.step = get_vec(jj.at("step"));
      p.joint.predictor = downstream_from_json(jj.at("predictor"));
      p.joint.train_error = get_num(jj.at("train_error"));
      p.joint.choice = p.choice;
    }
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed model document: ") + e.what());
  }
}

void save_pipeline(const Pipeline& p, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << to_json(p).dump(1) << '\n';
}

Pipeline load_pipeline(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed model document: ") + e.what());
  }
  return pipeline_from_json(j);
}

}  // namespace missreg
