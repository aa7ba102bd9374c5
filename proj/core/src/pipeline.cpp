#include "missreg/pipeline.hpp"

#include <stdexcept>

namespace missreg {

namespace {

std::string family_name(DownstreamKind k) { return to_string(k); }

void check_schema(const std::vector<ColumnInfo>& schema, const MaskedMatrix& x) {
  if (static_cast<std::size_t>(x.cols()) != schema.size()) throw DimensionError("pipeline: column count mismatch");
  for (Index j = 0; j < x.cols(); ++j) {
    const auto& a = x.column(j);
    const auto& b = schema[static_cast<std::size_t>(j)];
    if (a.kind != b.kind || a.levels != b.levels) throw DimensionError("pipeline: schema mismatch in column " + a.name);
  }
}

std::vector<Imputer> fit_imputers(ImputerKind kind, const MaskedMatrix& x, const PipelineOptions& options,
                                  MaskedMatrix& out) {
  std::vector<Imputer> chain;
  const auto push = [&](Imputer imp) {
    out = imp.imputed_train();
    chain.push_back(std::move(imp));
  };
  out = x;
  switch (kind) {
    case ImputerKind::zero: push(Imputer::fit_zero(out)); break;
    case ImputerKind::mode: push(Imputer::fit_mean(out)); break;
    case ImputerKind::mean:
    case ImputerKind::missing_category:
      push(Imputer::fit_missing_category(out));
      push(Imputer::fit_mean(out));
      break;
    case ImputerKind::chained:
      push(Imputer::fit_missing_category(out));
      push(Imputer::fit_chained(out, options.chained));
      break;
    case ImputerKind::constant: throw std::invalid_argument("pipeline: constant imputation is not a method");
  }
  return chain;
}

Eigen::VectorXd constant_vector(Index n, double v) { return Eigen::VectorXd::Constant(n, v); }

}  // namespace

MethodSpec MethodSpec::parse(const std::string& text) {
  MethodSpec m;
  const auto colon = text.find(':');
  const std::string head = text.substr(0, colon);
  const std::string tail = colon == std::string::npos ? "" : text.substr(colon + 1);
  const auto need_tail = [&] {
    if (tail.empty()) throw std::invalid_argument("method '" + text + "' needs an argument after ':'");
  };
  if (head == "mia_tree" || head == "mia_forest") {
    if (!tail.empty()) throw std::invalid_argument("unknown method '" + text + "'");
    m.kind = MethodKind::mia;
    m.downstream = head == "mia_tree" ? DownstreamKind::tree : DownstreamKind::forest;
    return m;
  }
  if (head == "mia") {
    need_tail();
    m.kind = MethodKind::mia;
    m.downstream = parse_downstream_kind(tail);
    if (m.downstream == DownstreamKind::linear || m.downstream == DownstreamKind::best)
      throw std::invalid_argument("mia methods take tree or forest");
    return m;
  }
  if (head == "complete" || head == "oracle" || head == "joint") {
    need_tail();
    m.kind = head == "complete" ? MethodKind::complete : head == "oracle" ? MethodKind::oracle : MethodKind::joint;
    m.downstream = parse_downstream_kind(tail);
    return m;
  }
  if (head == "adaptive") {
    need_tail();
    m.kind = MethodKind::adaptive;
    if (tail == "best")
      m.adaptive_best = true;
    else
      m.cls = FunctionClass::parse(tail);
    return m;
  }
  const auto plus = head.find('+');
  if (plus == std::string::npos) throw std::invalid_argument("unknown method '" + text + "'");
  m.kind = MethodKind::impute;
  m.imputer = parse_imputer_kind(head.substr(0, plus));
  if (m.imputer == ImputerKind::constant) throw std::invalid_argument("constant imputation is not a method");
  m.downstream = parse_downstream_kind(head.substr(plus + 1));
  if (!tail.empty()) m.policy = parse_test_policy(tail);
  return m;
}

std::string MethodSpec::name() const {
  switch (kind) {
    case MethodKind::complete: return "complete:" + family_name(downstream);
    case MethodKind::oracle: return "oracle:" + family_name(downstream);
    case MethodKind::joint: return "joint:" + family_name(downstream);
    case MethodKind::mia: return "mia_" + family_name(downstream);
    case MethodKind::adaptive: return "adaptive:" + (adaptive_best ? std::string("best") : cls.name());
    case MethodKind::impute: {
      std::string imp = imputer == ImputerKind::missing_category ? "category" : to_string(imputer);
      std::string s = imp + "+" + family_name(downstream);
      if (imputer == ImputerKind::chained) s += ":" + to_string(policy);
      return s;
    }
  }
  return "?";
}

PipelineOptions::PipelineOptions() {
  adaptive.gamma_grid = {1.0, 4.0};
  adaptive.finite_depths = {1, 2, 3, 4};
}

void PipelineOptions::set_seed(std::uint64_t seed) {
  downstream.seed = seed;
  adaptive.seed = seed;
  joint.options.seed = seed;
}

void PipelineOptions::set_folds(int folds) {
  downstream.folds = folds;
  adaptive.folds = folds;
  joint.options.folds = folds;
}

MaskedMatrix Pipeline::prepare(const MaskedMatrix& x) const {
  check_schema(schema, x);
  switch (method.kind) {
    case MethodKind::complete: {
      MaskedMatrix sub = x.select_cols(kept_columns);
      Eigen::MatrixXd v = sub.raw_values();
      for (Index j = 0; j < sub.cols(); ++j)
        for (Index i = 0; i < sub.rows(); ++i)
          if (sub.missing(i, j)) v(i, j) = kept_fill(j);
      return one_hot(MaskedMatrix(std::move(v), Mask::Constant(sub.rows(), sub.cols(), false), sub.columns()));
    }
    case MethodKind::impute: {
      MaskedMatrix cur = x;
      for (const auto& imp : imputers) cur = imp.transform(cur, method.policy);
      return one_hot(cur);
    }
    case MethodKind::adaptive:
    case MethodKind::joint:
    case MethodKind::mia: return one_hot(x);
    case MethodKind::oracle: throw std::logic_error("oracle pipelines predict from complete features");
  }
  return x;
}

Eigen::VectorXd Pipeline::predict(const MaskedMatrix& x, const Eigen::MatrixXd* x_full) const {
  if (constant) {
    check_schema(schema, x);
    return constant_vector(x.rows(), *constant);
  }
  if (method.kind == MethodKind::oracle) {
    check_schema(schema, x);
    if (x_full == nullptr) throw std::invalid_argument("oracle pipeline needs complete test features");
    MaskedMatrix full(*x_full, Mask::Constant(x_full->rows(), x_full->cols(), false), schema);
    return downstream.predict(one_hot(full).raw_values());
  }
  const MaskedMatrix z = prepare(x);
  switch (method.kind) {
    case MethodKind::adaptive: return adaptive.predict(z);
    case MethodKind::joint: return joint.predict(z);
    case MethodKind::mia: return downstream.predict(z.raw_values(), &z.mask());
    default: return downstream.predict(z.raw_values());
  }
}

Pipeline fit_pipeline(const MethodSpec& method, const MaskedMatrix& x, const TargetVector& y,
                      const PipelineOptions& options, const FitContext& context) {
  if (y.size() != x.rows()) throw DimensionError("pipeline: x and y row counts differ");
  Pipeline p;
  p.method = method;
  p.task = y.task;
  p.schema = x.columns();
  DownstreamOptions dopt = options.downstream;
  dopt.task = y.task;

  switch (method.kind) {
    case MethodKind::complete: {
      for (Index j = 0; j < x.cols(); ++j)
        if (!x.column_has_missing(j)) p.kept_columns.push_back(j);
      if (p.kept_columns.empty()) {
        p.constant = y.y.mean();
        return p;
      }
      const MaskedMatrix sub = x.select_cols(p.kept_columns);
      p.kept_fill.resize(sub.cols());
      for (Index j = 0; j < sub.cols(); ++j) p.kept_fill(j) = sub.raw_values().col(j).mean();
      const MaskedMatrix z = one_hot(sub);
      p.encoded_schema = z.columns();
      p.downstream = fit_downstream_cv(z.raw_values(), nullptr, y.y, method.downstream, dopt, &p.choice);
      return p;
    }
    case MethodKind::oracle: {
      if (context.train_full == nullptr) throw std::invalid_argument("oracle pipeline needs complete training features");
      const MaskedMatrix z =
          one_hot(MaskedMatrix(*context.train_full, Mask::Constant(x.rows(), x.cols(), false), x.columns()));
      p.encoded_schema = z.columns();
      p.downstream = fit_downstream_cv(z.raw_values(), nullptr, y.y, method.downstream, dopt, &p.choice);
      return p;
    }
    case MethodKind::impute: {
      MaskedMatrix imputed;
      p.imputers = fit_imputers(method.imputer, x, options, imputed);
      if (method.imputer == ImputerKind::chained && method.policy == TestPolicy::v1) {
        if (context.test_x == nullptr) throw std::invalid_argument("V1 pipelines need the test features at fit time");
        const MaskedMatrix test_step = p.imputers.front().transform(*context.test_x, TestPolicy::v1);
        const MaskedMatrix train_step = p.imputers.front().imputed_train();
        ChainedResult res = run_chained(MaskedMatrix::vstack(train_step, test_step), options.chained);
        imputed = MaskedMatrix(res.completed.topRows(x.rows()), Mask::Constant(x.rows(), x.cols(), false),
                               train_step.columns());
      }
      const MaskedMatrix z = one_hot(imputed);
      p.encoded_schema = z.columns();
      p.downstream = fit_downstream_cv(z.raw_values(), nullptr, y.y, method.downstream, dopt, &p.choice);
      return p;
    }
    case MethodKind::adaptive: {
      const MaskedMatrix z = one_hot(x);
      p.encoded_schema = z.columns();
      AdaptiveSpec spec = options.adaptive;
      spec.task = y.task;
      p.adaptive = method.adaptive_best ? fit_adaptive_best(z, y, spec) : fit_adaptive(z, y, method.cls, spec);
      return p;
    }
    case MethodKind::joint: {
      const MaskedMatrix z = one_hot(x);
      p.encoded_schema = z.columns();
      JointConfig cfg = options.joint;
      cfg.downstream = method.downstream;
      cfg.options = options.downstream;
      cfg.options.task = y.task;
      p.joint = fit_joint(z, y, cfg);
      p.choice = p.joint.choice;
      return p;
    }
    case MethodKind::mia: {
      const MaskedMatrix z = one_hot(x);
      p.encoded_schema = z.columns();
      dopt.mia = true;
      p.downstream = fit_downstream_cv(z.raw_values(), &z.mask(), y.y, method.downstream, dopt, &p.choice);
      return p;
    }
  }
  return p;
}

}  // namespace missreg
