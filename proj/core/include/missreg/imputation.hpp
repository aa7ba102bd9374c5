#pragma once

#include "missreg/dense_fit.hpp"
#include "missreg/masked_matrix.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace missreg {

enum class ImputerKind { zero, mean, mode, constant, missing_category, chained };
/// Test-time policy: V1 imputes train and test jointly, V2 imputes the test
/// set from the imputed training data, V3 from the raw training data.
enum class TestPolicy { v1, v2, v3 };

std::string to_string(ImputerKind k);
std::string to_string(TestPolicy p);
ImputerKind parse_imputer_kind(const std::string& s);
TestPolicy parse_test_policy(const std::string& s);

struct ChainedOptions {
  int n_sweeps = 5;
  double ridge = 1e-6;
};

/// Chained-equations model for one column: ridge regression (continuous) or
/// one-vs-all logistic regressions (categorical) on all other columns.
struct ColumnModel {
  DenseFit linear;
  std::vector<DenseFit> classes;
  /// Levels with at least one observed training cell.
  std::vector<bool> class_present;
};

/// A fitted imputer. Observed cells are never modified.
///
/// zero: continuous cells get 0, categorical cells the mode.
/// mean: continuous cells get the observed mean, categorical cells the mode.
/// mode: selected categorical columns get their mode; other columns untouched.
/// constant: column j gets mu[j].
/// missing_category: categorical columns with training NAs gain the level
///   "<missing>"; NAs in other categorical columns get the mode; continuous
///   columns untouched.
/// chained: deterministic chained-equations regression imputation.
class Imputer {
 public:
  static Imputer fit_zero(const MaskedMatrix& train);
  static Imputer fit_mean(const MaskedMatrix& train);
  static Imputer fit_mode(const MaskedMatrix& train);
  static Imputer fit_mode(const MaskedMatrix& train, std::span<const Index> columns);
  static Imputer fit_constant(const MaskedMatrix& train, Eigen::VectorXd mu);
  static Imputer fit_missing_category(const MaskedMatrix& train);
  static Imputer fit_chained(const MaskedMatrix& train, ChainedOptions options = {});

  [[nodiscard]] ImputerKind kind() const { return kind_; }
  [[nodiscard]] bool fitted() const { return fitted_; }
  /// Per-column fill statistic (level code for categorical); NaN where the
  /// imputer leaves the column alone.
  [[nodiscard]] const Eigen::VectorXd& fill() const { return fill_; }
  /// Columns this imputer fills (or, for missing_category, recodes).
  [[nodiscard]] const std::vector<bool>& fit_mask() const { return fit_mask_; }
  [[nodiscard]] const std::vector<ColumnInfo>& schema() const { return schema_; }
  [[nodiscard]] const ChainedOptions& chained_options() const { return options_; }
  [[nodiscard]] const std::vector<ColumnModel>& models() const { return models_; }
  [[nodiscard]] const MaskedMatrix& raw_train() const { return raw_train_; }

  /// The training matrix after imputation.
  [[nodiscard]] const MaskedMatrix& imputed_train() const { return imputed_train_; }

  /// Fills the masked cells of `x`. Single-statistic imputers ignore `policy`.
  /// For the chained kind, V2 iterates the stored column models over each row
  /// of `x`; V3 reruns the chained procedure on [raw train; x]; V1 reruns it
  /// on [raw train; x] as well (the pipeline also takes its training rows).
  [[nodiscard]] MaskedMatrix transform(const MaskedMatrix& x, TestPolicy policy = TestPolicy::v2) const;

  /// Rebuilds a fitted imputer from serialized state.
  static Imputer restore(ImputerKind kind, std::vector<ColumnInfo> schema, Eigen::VectorXd fill,
                         std::vector<bool> fit_mask, ChainedOptions options, std::vector<ColumnModel> models,
                         MaskedMatrix raw_train, MaskedMatrix imputed_train);

 private:
  void check_schema(const MaskedMatrix& x) const;
  [[nodiscard]] MaskedMatrix apply_statistics(const MaskedMatrix& x) const;

  ImputerKind kind_ = ImputerKind::mean;
  bool fitted_ = false;
  std::vector<ColumnInfo> schema_;
  Eigen::VectorXd fill_;
  std::vector<bool> fit_mask_;
  ChainedOptions options_;
  std::vector<ColumnModel> models_;
  MaskedMatrix raw_train_;
  MaskedMatrix imputed_train_;
};

/// Chained-equations fit on a matrix: returns the completed matrix and the
/// final per-column models.
struct ChainedResult {
  Eigen::MatrixXd completed;
  std::vector<ColumnModel> models;
};
ChainedResult run_chained(const MaskedMatrix& x, const ChainedOptions& options);

/// Design row used by the column-j model: all other columns, categorical ones
/// one-hot coded without their first level.
Eigen::MatrixXd chained_design(const Eigen::MatrixXd& work, const std::vector<ColumnInfo>& schema, Index target);

}  // namespace missreg
