#pragma once

#include "missreg/masked_matrix.hpp"
#include "missreg/rng.hpp"

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace missreg {

enum class SignalKind { linear, nn };
enum class SyntheticMechanism { mcar, censoring };
enum class SemiSynMechanism { mar, nmar, am };

std::string to_string(SignalKind k);
std::string to_string(SyntheticMechanism m);
std::string to_string(SemiSynMechanism m);
SignalKind parse_signal_kind(const std::string& s);
SyntheticMechanism parse_synthetic_mechanism(const std::string& s);
SemiSynMechanism parse_semisyn_mechanism(const std::string& s);

struct SyntheticConfig {
  Index d = 10;
  Index r = 5;
  double eps = 0.1;
  Index k = 5;
  /// Signal-to-noise ratio; +infinity gives noiseless targets.
  double snr = 2.0;
  Index n_train = 1000;
  Index n_test = 5000;
  double p_missing = 0.3;
  SignalKind signal = SignalKind::linear;
  SyntheticMechanism mechanism = SyntheticMechanism::mcar;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Zero-mean Gaussian design with covariance B Bᵀ + eps I.
class GaussianDesign {
 public:
  GaussianDesign(Index d, Index r, double eps, Rng& rng);

  [[nodiscard]] Index dim() const { return loadings_.rows(); }
  [[nodiscard]] const Eigen::MatrixXd& loadings() const { return loadings_; }
  [[nodiscard]] Eigen::MatrixXd covariance() const;
  /// n i.i.d. rows; X = Z_r Bᵀ + sqrt(eps) Z_d.
  [[nodiscard]] Eigen::MatrixXd sample(Index n, Rng& rng) const;

 private:
  Eigen::MatrixXd loadings_;
  double eps_;
};

/// Training matrix of a synthetic config (mask all false).
MaskedMatrix gen_gaussian(const SyntheticConfig& config);

/// Response function f plus calibrated noise level.
///
/// `support` lists the x coordinates the signal reads; `mask_support` lists
/// mask bits it also reads (non-empty only for NMAR semi-synthetic signals).
struct SignalModel {
  SignalKind kind = SignalKind::linear;
  std::vector<Index> support;
  std::vector<Index> mask_support;
  // linear: f = intercept + weights · inputs
  double intercept = 0.0;
  Eigen::VectorXd weights;
  // nn: f = out_weights · relu(hidden_weights ᵀ inputs + hidden_bias) + out_bias
  Eigen::MatrixXd hidden_weights;  // inputs × hidden
  Eigen::VectorXd hidden_bias;
  Eigen::VectorXd out_weights;
  double out_bias = 0.0;
  double noise_sd = 0.0;

  [[nodiscard]] Index n_inputs() const { return static_cast<Index>(support.size() + mask_support.size()); }
  /// Noise-free response for one full row x and its mask row (mask may be null
  /// when mask_support is empty).
  [[nodiscard]] double evaluate(const Eigen::Ref<const Eigen::RowVectorXd>& x, const Mask* mask, Index row) const;
  [[nodiscard]] Eigen::VectorXd evaluate_all(const Eigen::MatrixXd& x_full, const Mask* mask = nullptr) const;
};

/// Draws a signal: linear b ~ N(0,1), w_j ~ U[-1,1]; nn with 10 hidden ReLU
/// units, hidden weights N(0,1), hidden and output intercepts U[-1,1], output
/// weights N(0,1).
SignalModel make_signal(SignalKind kind, std::vector<Index> support, std::vector<Index> mask_support, Rng& rng);

/// Sets noise_sd so that sample Var[f] / noise variance = snr on `x_full`.
void calibrate_noise(SignalModel& model, const Eigen::MatrixXd& x_full, double snr, const Mask* mask = nullptr);

/// y = f(x) + N(0, noise_sd²).
TargetVector gen_signal(const Eigen::MatrixXd& x_full, const SignalModel& model, Rng& rng, const Mask* mask = nullptr);

MaskedMatrix apply_mcar(const MaskedMatrix& x, double p, Rng& rng);
MaskedMatrix apply_mcar(const MaskedMatrix& x, double p, std::uint64_t seed);

/// Per column, masks the observed cells strictly above the order statistic at
/// 1-based index ceil((1-p) n_obs). Deterministic in x.
MaskedMatrix apply_censoring(const MaskedMatrix& x, double p);

struct SyntheticInstance {
  SyntheticConfig config;
  MaskedMatrix train_x;
  TargetVector train_y;
  Eigen::MatrixXd train_full;
  MaskedMatrix test_x;
  TargetVector test_y;
  Eigen::MatrixXd test_full;
  SignalModel signal;
  Eigen::MatrixXd covariance;
};

/// Full synthetic train/test instance. Design, signal, train and test rows,
/// and masks each come from an independent stream derived from config.seed.
SyntheticInstance generate_synthetic(const SyntheticConfig& config);

struct SemiSynConfig {
  Index k_cap = 10;
  Index k_missing = 0;
  SemiSynMechanism mechanism = SemiSynMechanism::mar;
  SignalKind signal = SignalKind::linear;
  double snr = 2.0;
  std::uint64_t seed = 1;
};

struct SemiSynSignal {
  TargetVector y;
  SignalModel model;
};

/// Response for a completed real design. MAR reads k = min(k_cap, d)
/// coordinates of x_full, k_missing of them from columns that have missing
/// cells; NMAR additionally reads the mask bits of those k_missing columns.
SemiSynSignal semisyn_signal(const Eigen::MatrixXd& x_full, const Mask& mask, const SemiSynConfig& config);

struct Reassignment {
  /// Row i of the output takes mask row sigma[i] and target sigma[i].
  std::vector<Index> sigma;
  double objective = 0.0;
  bool exact = true;
};

/// Permutation maximizing sum_i x_full_iᵀ m_sigma(i). Exact (Hungarian) for
/// n <= exact_limit, greedy otherwise. The identity is returned whenever it
/// attains the optimum.
Reassignment adversarial_reassign(const Eigen::MatrixXd& x_full, const Mask& mask, Index exact_limit = 2000);

struct SemiSynInstance {
  MaskedMatrix x;
  TargetVector y;
  Eigen::MatrixXd x_full;
  SignalModel model;
  std::optional<Reassignment> reassignment;
};

/// Applies the configured mechanism end to end: signal, then (AM only) the
/// adversarial reassignment of masks and targets.
SemiSynInstance generate_semisynthetic(const Eigen::MatrixXd& x_full, const Mask& mask, const SemiSynConfig& config);

}  // namespace missreg

namespace missreg {

/// Binary categorical features whose cells go missing more often when the
/// value is 1 (self-masking NMAR), with a thresholded linear label.
struct BinaryNmarConfig {
  Index d = 6;
  Index n_train = 1000;
  Index n_test = 5000;
  double p_one = 0.5;
  /// P(M_j = 1 | X_j = 1) and P(M_j = 1 | X_j = 0).
  double p_missing_one = 0.6;
  double p_missing_zero = 0.1;
  double snr = 4.0;
  std::uint64_t seed = 1;
  void validate() const;
};

struct BinaryNmarInstance {
  MaskedMatrix train_x;
  TargetVector train_y;
  MaskedMatrix test_x;
  TargetVector test_y;
  Eigen::VectorXd weights;
};

BinaryNmarInstance generate_binary_nmar(const BinaryNmarConfig& config);

}  // namespace missreg
