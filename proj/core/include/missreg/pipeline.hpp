#pragma once

#include "missreg/adaptive.hpp"
#include "missreg/downstream.hpp"
#include "missreg/encoding.hpp"
#include "missreg/imputation.hpp"
#include "missreg/joint.hpp"
#include "missreg/masked_matrix.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace missreg {

enum class MethodKind { complete, impute, adaptive, joint, mia, oracle };

/// A method string such as "mean+best", "chained+linear:v3", "adaptive:finite",
/// "joint:best", "mia_tree", "oracle:linear" or "complete:best".
struct MethodSpec {
  MethodKind kind = MethodKind::impute;
  ImputerKind imputer = ImputerKind::mean;
  TestPolicy policy = TestPolicy::v2;
  DownstreamKind downstream = DownstreamKind::best;
  FunctionClass cls;
  /// adaptive:best (CV over affine_intercept, affine and finite).
  bool adaptive_best = false;

  static MethodSpec parse(const std::string& text);
  [[nodiscard]] std::string name() const;
};

struct PipelineOptions {
  DownstreamOptions downstream;
  AdaptiveSpec adaptive;
  JointConfig joint;
  ChainedOptions chained;

  PipelineOptions();
  /// Sets the CV seed of every component.
  void set_seed(std::uint64_t seed);
  void set_folds(int folds);
};

/// Extra inputs some methods need at fit time.
struct FitContext {
  /// Test features, required by V1 chained pipelines.
  const MaskedMatrix* test_x = nullptr;
  /// Complete training features, required by oracle pipelines.
  const Eigen::MatrixXd* train_full = nullptr;
};

class Pipeline {
 public:
  MethodSpec method;
  Task task = Task::regression;
  std::vector<ColumnInfo> schema;
  /// Applied in order before one-hot encoding.
  std::vector<Imputer> imputers;
  /// Columns used by complete-feature pipelines.
  std::vector<Index> kept_columns;
  /// Fallback fill for kept columns that are missing at test time.
  Eigen::VectorXd kept_fill;
  std::vector<ColumnInfo> encoded_schema;
  Downstream downstream;
  DownstreamChoice choice;
  AdaptiveLinearModel adaptive;
  JointModel joint;
  /// Constant prediction when no feature is usable.
  std::optional<double> constant;

  /// Imputed and one-hot coded features as seen by the predictor.
  [[nodiscard]] MaskedMatrix prepare(const MaskedMatrix& x) const;
  /// Test predictions. Oracle pipelines need the complete test features.
  [[nodiscard]] Eigen::VectorXd predict(const MaskedMatrix& x, const Eigen::MatrixXd* x_full = nullptr) const;
};

Pipeline fit_pipeline(const MethodSpec& method, const MaskedMatrix& x, const TargetVector& y,
                      const PipelineOptions& options, const FitContext& context = {});

}  // namespace missreg
