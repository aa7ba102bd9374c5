#pragma once

#include "missreg/datagen.hpp"
#include "missreg/pipeline.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace missreg {

enum class SourceType { synthetic, binary_nmar, csv, semisynthetic };
std::string to_string(SourceType t);
SourceType parse_source_type(const std::string& s);

struct SourceConfig {
  SourceType type = SourceType::synthetic;
  SyntheticConfig synthetic;
  BinaryNmarConfig binary;
  SemiSynConfig semisyn;
  // csv and semisynthetic
  std::string path;
  std::string target;
  std::optional<Task> task;
  std::string na_token = "NA";
  double test_fraction = 0.3;
};

/// One point of the experiment grid. Fields that do not apply to the source
/// keep their defaults.
struct SweepPoint {
  Index n_train = 0;
  double p_missing = 0.0;
  Index k_missing = 0;
  std::string mechanism;
  std::string signal;
};

struct ExperimentConfig {
  std::string name = "experiment";
  SourceConfig source;
  std::vector<Index> n_train;
  std::vector<double> p_missing;
  std::vector<Index> k_missing;
  std::vector<std::string> mechanisms;
  std::vector<std::string> signals;
  std::vector<std::string> methods;
  int replications = 10;
  int folds = 5;
  std::uint64_t seed = 1;
  int threads = 1;
  /// auto (r2 or auc_norm by task), r2, auc_norm or accuracy.
  std::string metric = "auto";

  void validate() const;
  [[nodiscard]] std::vector<SweepPoint> sweep() const;
  static ExperimentConfig from_json(const nlohmann::json& j);
  [[nodiscard]] nlohmann::json to_json() const;
};

ExperimentConfig load_experiment_config(const std::filesystem::path& path);

struct ResultRecord {
  std::string dataset;
  std::string method;
  int replication = 0;
  std::string mechanism;
  std::string signal;
  Index n_train = 0;
  double p_missing = 0.0;
  Index k_missing = 0;
  std::string metric;
  double value = 0.0;
  double wall_time = 0.0;
  /// "ok" or "error".
  std::string status = "ok";
  std::string error;
};

/// A generated or split train/test instance.
struct Instance {
  MaskedMatrix train_x;
  TargetVector train_y;
  MaskedMatrix test_x;
  TargetVector test_y;
  std::optional<Eigen::MatrixXd> train_full;
  std::optional<Eigen::MatrixXd> test_full;
};

/// Data seed for a sweep point and replication; shared by every method.
std::uint64_t instance_seed(std::uint64_t master, const std::string& dataset, std::size_t point, int replication);
/// CV seed of one method on one replication.
std::uint64_t method_seed(std::uint64_t master, const std::string& dataset, const std::string& method,
                          int replication);

Instance make_instance(const ExperimentConfig& config, const SweepPoint& point, int replication, std::size_t point_index);

double score(const std::string& metric, const Eigen::VectorXd& y, const Eigen::VectorXd& pred);

using RecordCallback = std::function<void(const ResultRecord&)>;
/// Every (sweep point, replication, method) in a fixed order; failures become
/// error records.
std::vector<ResultRecord> run_experiment(const ExperimentConfig& config, const RecordCallback& on_record = {});

std::vector<std::string> results_header();
void write_results_csv(const std::filesystem::path& path, const std::vector<ResultRecord>& records);
std::vector<ResultRecord> read_results_csv(const std::filesystem::path& path);

struct SummaryRow {
  std::string dataset;
  std::string method;
  std::string mechanism;
  std::string signal;
  Index n_train = 0;
  double p_missing = 0.0;
  Index k_missing = 0;
  std::string metric;
  double mean = 0.0;
  double se = 0.0;
  int count = 0;
  int errors = 0;
};

/// Mean and standard error per (dataset, method, sweep point, metric), in
/// first-appearance order.
std::vector<SummaryRow> summarize(const std::vector<ResultRecord>& records);
nlohmann::json summary_json(const std::vector<SummaryRow>& rows);
/// Long-format figure data: one line per summary row.
void write_plot_data(const std::filesystem::path& path, const std::vector<SummaryRow>& rows);

}  // namespace missreg
