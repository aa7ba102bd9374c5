#include "missreg/datagen.hpp"

#include "missreg/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace missreg {

std::string to_string(SignalKind k) { return k == SignalKind::linear ? "linear" : "nn"; }

std::string to_string(SyntheticMechanism m) { return m == SyntheticMechanism::mcar ? "mcar" : "censoring"; }

std::string to_string(SemiSynMechanism m) {
  switch (m) {
    case SemiSynMechanism::mar: return "mar";
    case SemiSynMechanism::nmar: return "nmar";
    case SemiSynMechanism::am: return "am";
  }
  return "?";
}

SignalKind parse_signal_kind(const std::string& s) {
  if (s == "linear") return SignalKind::linear;
  if (s == "nn") return SignalKind::nn;
  throw std::invalid_argument("unknown signal kind '" + s + "'");
}

SyntheticMechanism parse_synthetic_mechanism(const std::string& s) {
  if (s == "mcar") return SyntheticMechanism::mcar;
  if (s == "censoring" || s == "nmar") return SyntheticMechanism::censoring;
  throw std::invalid_argument("unknown synthetic mechanism '" + s + "'");
}

SemiSynMechanism parse_semisyn_mechanism(const std::string& s) {
  if (s == "mar") return SemiSynMechanism::mar;
  if (s == "nmar") return SemiSynMechanism::nmar;
  if (s == "am") return SemiSynMechanism::am;
  throw std::invalid_argument("unknown semi-synthetic mechanism '" + s + "'");
}

void SyntheticConfig::validate() const {
  if (d < 1) throw std::invalid_argument("d must be positive");
  if (r < 0 || r > d) throw std::invalid_argument("r must lie in [0, d]");
  if (!(eps > 0)) throw std::invalid_argument("eps must be positive");
  if (k < 1 || k > d) throw std::invalid_argument("k must lie in [1, d]");
  if (!(snr > 0)) throw std::invalid_argument("snr must be positive");
  if (!(p_missing >= 0 && p_missing < 1)) throw std::invalid_argument("p_missing must lie in [0, 1)");
  if (n_train < 2 || n_test < 1) throw std::invalid_argument("sample sizes too small");
}

GaussianDesign::GaussianDesign(Index d, Index r, double eps, Rng& rng) : loadings_(d, r), eps_(eps) {
  if (!(eps > 0)) throw std::invalid_argument("eps must be positive");
  std::normal_distribution<double> z;
  for (Index j = 0; j < r; ++j)
    for (Index i = 0; i < d; ++i) loadings_(i, j) = z(rng);
}

Eigen::MatrixXd GaussianDesign::covariance() const {
  Eigen::MatrixXd cov = loadings_ * loadings_.transpose();
  cov.diagonal().array() += eps_;
  return cov;
}

Eigen::MatrixXd GaussianDesign::sample(Index n, Rng& rng) const {
  const Index d = loadings_.rows(), r = loadings_.cols();
  std::normal_distribution<double> z;
  Eigen::MatrixXd factors(n, r), noise(n, d);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < r; ++j) factors(i, j) = z(rng);
    for (Index j = 0; j < d; ++j) noise(i, j) = z(rng);
  }
  Eigen::MatrixXd x = std::sqrt(eps_) * noise;
  if (r > 0) x.noalias() += factors * loadings_.transpose();
  return x;
}

MaskedMatrix gen_gaussian(const SyntheticConfig& config) {
  config.validate();
  Rng design_rng(derive_seed({config.seed, hash_string("design")}));
  GaussianDesign design(config.d, config.r, config.eps, design_rng);
  Rng rows(derive_seed({config.seed, hash_string("train-rows")}));
  return MaskedMatrix(design.sample(config.n_train, rows));
}

double SignalModel::evaluate(const Eigen::Ref<const Eigen::RowVectorXd>& x, const Mask* mask, Index row) const {
  Eigen::VectorXd in(n_inputs());
  Index k = 0;
  for (Index j : support) in(k++) = x(j);
  for (Index j : mask_support) {
    if (!mask) throw std::invalid_argument("signal reads mask bits but no mask was supplied");
    in(k++) = (*mask)(row, j) ? 1.0 : 0.0;
  }
  if (kind == SignalKind::linear) return intercept + weights.dot(in);
  const Eigen::VectorXd hidden = (hidden_weights.transpose() * in + hidden_bias).cwiseMax(0.0);
  return out_weights.dot(hidden) + out_bias;
}

Eigen::VectorXd SignalModel::evaluate_all(const Eigen::MatrixXd& x_full, const Mask* mask) const {
  for (Index j : support)
    if (j < 0 || j >= x_full.cols()) throw std::out_of_range("signal support index out of range");
  for (Index j : mask_support)
    if (!mask || j < 0 || j >= mask->cols()) throw std::out_of_range("signal mask support index out of range");
  Eigen::VectorXd f(x_full.rows());
  for (Index i = 0; i < x_full.rows(); ++i) f(i) = evaluate(x_full.row(i), mask, i);
  return f;
}

SignalModel make_signal(SignalKind kind, std::vector<Index> support, std::vector<Index> mask_support, Rng& rng) {
  SignalModel m;
  m.kind = kind;
  m.support = std::move(support);
  m.mask_support = std::move(mask_support);
  const Index k = m.n_inputs();
  std::normal_distribution<double> z;
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  if (kind == SignalKind::linear) {
    m.intercept = z(rng);
    m.weights.resize(k);
    for (Index j = 0; j < k; ++j) m.weights(j) = u(rng);
  } else {
    constexpr Index hidden = 10;
    m.hidden_weights.resize(k, hidden);
    m.hidden_bias.resize(hidden);
    m.out_weights.resize(hidden);
    for (Index h = 0; h < hidden; ++h) {
      for (Index j = 0; j < k; ++j) m.hidden_weights(j, h) = z(rng);
      m.hidden_bias(h) = u(rng);
      m.out_weights(h) = z(rng);
    }
    m.out_bias = u(rng);
  }
  return m;
}

namespace {

double sample_variance(const Eigen::VectorXd& v) {
  if (v.size() < 2) return 0.0;
  const double mean = v.mean();
  return (v.array() - mean).square().sum() / static_cast<double>(v.size() - 1);
}

}  // namespace

void calibrate_noise(SignalModel& model, const Eigen::MatrixXd& x_full, double snr, const Mask* mask) {
  if (!(snr > 0)) throw std::invalid_argument("snr must be positive");
  if (std::isinf(snr)) {
    model.noise_sd = 0.0;
    return;
  }
  model.noise_sd = std::sqrt(sample_variance(model.evaluate_all(x_full, mask)) / snr);
}

TargetVector gen_signal(const Eigen::MatrixXd& x_full, const SignalModel& model, Rng& rng, const Mask* mask) {
  Eigen::VectorXd y = model.evaluate_all(x_full, mask);
  if (model.noise_sd > 0) {
    std::normal_distribution<double> eps(0.0, model.noise_sd);
    for (Index i = 0; i < y.size(); ++i) y(i) += eps(rng);
  }
  return {std::move(y), Task::regression};
}

MaskedMatrix apply_mcar(const MaskedMatrix& x, double p, Rng& rng) {
  if (!(p >= 0 && p <= 1)) throw std::invalid_argument("p must lie in [0, 1]");
  std::bernoulli_distribution coin(p);
  Mask mask = x.mask();
  for (Index j = 0; j < x.cols(); ++j)
    for (Index i = 0; i < x.rows(); ++i)
      if (coin(rng)) mask(i, j) = true;
  return x.with_mask(std::move(mask)).sanitized();
}

MaskedMatrix apply_mcar(const MaskedMatrix& x, double p, std::uint64_t seed) {
  Rng rng(seed);
  return apply_mcar(x, p, rng);
}

MaskedMatrix apply_censoring(const MaskedMatrix& x, double p) {
  if (!(p >= 0 && p <= 1)) throw std::invalid_argument("p must lie in [0, 1]");
  Mask mask = x.mask();
  std::vector<double> col;
  for (Index j = 0; j < x.cols(); ++j) {
    col.clear();
    for (Index i = 0; i < x.rows(); ++i)
      if (!x.missing(i, j)) col.push_back(x.value(i, j));
    if (col.empty()) continue;
    std::sort(col.begin(), col.end());
    const auto n = static_cast<double>(col.size());
    // Guard against (1-p) n landing a hair above an integer.
    auto idx = static_cast<std::size_t>(std::ceil((1.0 - p) * n - 1e-9));
    idx = std::clamp<std::size_t>(idx, 1, col.size());
    const double threshold = col[idx - 1];
    for (Index i = 0; i < x.rows(); ++i)
      if (!x.missing(i, j) && x.value(i, j) > threshold) mask(i, j) = true;
  }
  return x.with_mask(std::move(mask)).sanitized();
}

SyntheticInstance generate_synthetic(const SyntheticConfig& config) {
  config.validate();
  Rng design_rng(derive_seed({config.seed, hash_string("design")}));
  GaussianDesign design(config.d, config.r, config.eps, design_rng);

  Rng train_rows(derive_seed({config.seed, hash_string("train-rows")}));
  Rng test_rows(derive_seed({config.seed, hash_string("test-rows")}));
  Eigen::MatrixXd train_full = design.sample(config.n_train, train_rows);
  Eigen::MatrixXd test_full = design.sample(config.n_test, test_rows);

  Rng signal_rng(derive_seed({config.seed, hash_string("signal")}));
  auto support = sample_without_replacement(config.d, config.k, signal_rng);
  SignalModel signal = make_signal(config.signal, support, {}, signal_rng);
  calibrate_noise(signal, train_full, config.snr);

  Rng train_noise(derive_seed({config.seed, hash_string("train-noise")}));
  Rng test_noise(derive_seed({config.seed, hash_string("test-noise")}));
  TargetVector train_y = gen_signal(train_full, signal, train_noise);
  TargetVector test_y = gen_signal(test_full, signal, test_noise);

  MaskedMatrix train_x(train_full), test_x(test_full);
  if (config.mechanism == SyntheticMechanism::mcar) {
    train_x = apply_mcar(train_x, config.p_missing, derive_seed({config.seed, hash_string("train-mask")}));
    test_x = apply_mcar(test_x, config.p_missing, derive_seed({config.seed, hash_string("test-mask")}));
  } else {
    train_x = apply_censoring(train_x, config.p_missing);
    test_x = apply_censoring(test_x, config.p_missing);
  }
  return {config,         std::move(train_x), std::move(train_y), std::move(train_full),
          std::move(test_x), std::move(test_y), std::move(test_full), std::move(signal),
          design.covariance()};
}

SemiSynSignal semisyn_signal(const Eigen::MatrixXd& x_full, const Mask& mask, const SemiSynConfig& config) {
  if (mask.rows() != x_full.rows() || mask.cols() != x_full.cols())
    throw DimensionError("semisyn_signal: mask shape mismatch");
  const Index d = x_full.cols();
  const Index k = std::min(config.k_cap, d);
  if (config.k_missing < 0 || config.k_missing > k) throw std::invalid_argument("k_missing must lie in [0, k]");

  std::vector<Index> maskable, complete;
  for (Index j = 0; j < d; ++j) (mask.col(j).any() ? maskable : complete).push_back(j);
  if (config.k_missing > static_cast<Index>(maskable.size()))
    throw std::invalid_argument("k_missing exceeds the number of columns with missing cells");

  Rng rng(derive_seed({config.seed, hash_string("semisyn-signal")}));
  std::vector<Index> support;
  for (Index pick : sample_without_replacement(static_cast<Index>(maskable.size()), config.k_missing, rng))
    support.push_back(maskable[static_cast<std::size_t>(pick)]);
  const Index n_complete = std::min(k - config.k_missing, static_cast<Index>(complete.size()));
  for (Index pick : sample_without_replacement(static_cast<Index>(complete.size()), n_complete, rng))
    support.push_back(complete[static_cast<std::size_t>(pick)]);
  std::sort(support.begin(), support.end());

  std::vector<Index> mask_support;
  if (config.mechanism == SemiSynMechanism::nmar)
    for (Index j : support)
      if (mask.col(j).any()) mask_support.push_back(j);

  SignalModel model = make_signal(config.signal, support, mask_support, rng);
  calibrate_noise(model, x_full, config.snr, &mask);
  Rng noise(derive_seed({config.seed, hash_string("semisyn-noise")}));
  TargetVector y = gen_signal(x_full, model, noise, &mask);
  return {std::move(y), std::move(model)};
}

Reassignment adversarial_reassign(const Eigen::MatrixXd& x_full, const Mask& mask, Index exact_limit) {
  if (mask.rows() != x_full.rows() || mask.cols() != x_full.cols())
    throw DimensionError("adversarial_reassign: mask shape mismatch");
  const Index n = x_full.rows();
  const Eigen::MatrixXd score = x_full * mask.cast<double>().matrix().transpose();
  Reassignment out;
  out.exact = n <= exact_limit;
  out.sigma = out.exact ? max_weight_assignment(score) : greedy_assignment(score);
  out.objective = assignment_value(score, out.sigma);
  const double identity = score.trace();
  if (identity >= out.objective - 1e-12 * std::max(1.0, std::abs(out.objective))) {
    out.sigma = iota_rows(n);
    out.objective = identity;
  }
  return out;
}

SemiSynInstance generate_semisynthetic(const Eigen::MatrixXd& x_full, const Mask& mask, const SemiSynConfig& config) {
  SemiSynConfig signal_config = config;
  if (config.mechanism == SemiSynMechanism::am) signal_config.mechanism = SemiSynMechanism::mar;
  auto [y, model] = semisyn_signal(x_full, mask, signal_config);
  Mask out_mask = mask;
  std::optional<Reassignment> re;
  if (config.mechanism == SemiSynMechanism::am) {
    re = adversarial_reassign(x_full, mask);
    Eigen::VectorXd y_perm(y.size());
    for (Index i = 0; i < x_full.rows(); ++i) {
      const Index s = re->sigma[static_cast<std::size_t>(i)];
      out_mask.row(i) = mask.row(s);
      y_perm(i) = y.y(s);
    }
    y = TargetVector(std::move(y_perm), y.task);
  }
  MaskedMatrix x = MaskedMatrix(x_full, std::move(out_mask)).sanitized();
  return {std::move(x), std::move(y), x_full, std::move(model), std::move(re)};
}

}  // namespace missreg

namespace missreg {

void BinaryNmarConfig::validate() const {
  if (d < 1 || n_train < 1 || n_test < 1) throw std::invalid_argument("binary nmar: sizes must be positive");
  for (double p : {p_one, p_missing_one, p_missing_zero})
    if (!(p >= 0.0 && p < 1.0)) throw std::invalid_argument("binary nmar: probabilities must lie in [0, 1)");
  if (!(snr > 0.0)) throw std::invalid_argument("binary nmar: snr must be positive");
}

BinaryNmarInstance generate_binary_nmar(const BinaryNmarConfig& config) {
  config.validate();
  Rng wrng(derive_seed({config.seed, hash_string("binary-weights")}));
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Eigen::VectorXd w(config.d);
  for (Index j = 0; j < config.d; ++j) w(j) = unif(wrng);
  const double center = config.p_one * w.sum();
  const double signal_var = config.p_one * (1 - config.p_one) * w.squaredNorm();
  const double noise_sd = std::sqrt(signal_var / config.snr);

  std::vector<ColumnInfo> cols;
  for (Index j = 0; j < config.d; ++j) cols.push_back(ColumnInfo::categorical("x" + std::to_string(j + 1), {"0", "1"}));

  const auto draw = [&](Index n, const char* tag, MaskedMatrix& x, TargetVector& y) {
    Rng rng(derive_seed({config.seed, hash_string(tag)}));
    std::bernoulli_distribution one(config.p_one), miss1(config.p_missing_one), miss0(config.p_missing_zero);
    std::normal_distribution<double> noise(0.0, noise_sd);
    Eigen::MatrixXd v(n, config.d);
    Mask m(n, config.d);
    Eigen::VectorXd yv(n);
    for (Index i = 0; i < n; ++i) {
      double s = -center;
      for (Index j = 0; j < config.d; ++j) {
        v(i, j) = one(rng) ? 1.0 : 0.0;
        s += w(j) * v(i, j);
        m(i, j) = v(i, j) == 1.0 ? miss1(rng) : miss0(rng);
      }
      yv(i) = s + noise(rng) > 0.0 ? 1.0 : 0.0;
    }
    x = MaskedMatrix(std::move(v), std::move(m), cols).sanitized();
    y = TargetVector(std::move(yv), Task::binary);
  };
  BinaryNmarInstance out;
  draw(config.n_train, "binary-train", out.train_x, out.train_y);
  draw(config.n_test, "binary-test", out.test_x, out.test_y);
  out.weights = w;
  return out;
}

}  // namespace missreg
