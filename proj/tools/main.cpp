#include "missreg/csv.hpp"
#include "missreg/datagen.hpp"
#include "missreg/experiment.hpp"
#include "missreg/serialize.hpp"
#include "missreg/theory.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace missreg;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<int> threads;
  std::string na_token = "NA";
};

void add_common(CLI::App* cmd, Common& c, bool with_config, bool with_threads) {
  if (with_config) cmd->add_option("--config", c.config, "JSON configuration file");
  cmd->add_option("--seed", c.seed, "Master seed");
  cmd->add_option("--out", c.out, "Output path");
  if (with_threads) cmd->add_option("--threads", c.threads, "Worker threads");
  cmd->add_option("--na-token", c.na_token, "Token marking missing cells")->capture_default_str();
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  json j;
  in >> j;
  return j;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

json signal_json(const SignalModel& s) {
  return {{"kind", to_string(s.kind)}, {"support", s.support}, {"noise_sd", s.noise_sd},
          {"noise_variance", s.noise_sd * s.noise_sd}};
}

int run_generate(const Common& c, const std::string& source_flag) {
  ExperimentConfig cfg;
  if (!c.config.empty()) {
    cfg = ExperimentConfig::from_json({{"source", read_json(c.config)}, {"methods", {"mean+linear"}}});
  } else {
    cfg.source.type = parse_source_type(source_flag);
  }
  if (c.seed) cfg.seed = *c.seed;
  const fs::path dir = c.out.empty() ? fs::path(".") : fs::path(c.out);
  fs::create_directories(dir);
  json manifest = {{"source", cfg.to_json().at("source")}, {"seed", cfg.seed}};
  if (cfg.source.type == SourceType::synthetic) {
    SyntheticConfig sc = cfg.source.synthetic;
    sc.seed = cfg.seed;
    const SyntheticInstance inst = generate_synthetic(sc);
    write_csv(dir / "train.csv", inst.train_x, &inst.train_y, "y", c.na_token);
    write_csv(dir / "test.csv", inst.test_x, &inst.test_y, "y", c.na_token);
    manifest["signal"] = signal_json(inst.signal);
  } else if (cfg.source.type == SourceType::binary_nmar) {
    BinaryNmarConfig bc = cfg.source.binary;
    bc.seed = cfg.seed;
    const BinaryNmarInstance inst = generate_binary_nmar(bc);
    write_csv(dir / "train.csv", inst.train_x, &inst.train_y, "y", c.na_token);
    write_csv(dir / "test.csv", inst.test_x, &inst.test_y, "y", c.na_token);
    manifest["weights"] = std::vector<double>(inst.weights.data(), inst.weights.data() + inst.weights.size());
  } else {
    throw std::invalid_argument("generate supports synthetic and binary_nmar sources");
  }
  manifest["files"] = {"train.csv", "test.csv"};
  write_json(dir / "manifest.json", manifest);
  std::cout << "wrote " << (dir / "train.csv").string() << ", " << (dir / "test.csv").string() << '\n';
  return 0;
}

Dataset load(const std::string& path, const std::string& target, const std::string& task, const std::string& na) {
  CsvOptions opt;
  opt.na_token = na;
  if (!target.empty()) opt.target = target;
  if (task == "binary") opt.task = Task::binary;
  if (task == "regression") opt.task = Task::regression;
  return read_csv(path, opt);
}

int run_train(const Common& c, const std::string& data, const std::string& target, const std::string& method,
              const std::string& task, const std::string& test, int folds) {
  const Dataset ds = load(data, target, task, c.na_token);
  if (!ds.y) throw std::invalid_argument("training data has no target column");
  PipelineOptions opt;
  opt.set_folds(folds);
  opt.set_seed(c.seed.value_or(1));
  FitContext ctx;
  Dataset test_ds;
  if (!test.empty()) {
    test_ds = load(test, target, task, c.na_token);
    ctx.test_x = &test_ds.x;
  }
  const Pipeline p = fit_pipeline(MethodSpec::parse(method), ds.x, *ds.y, opt, ctx);
  const std::string out = c.out.empty() ? "model.json" : c.out;
  save_pipeline(p, out);
  std::cout << "wrote " << out << '\n';
  return 0;
}

int run_predict(const Common& c, const std::string& model_path, const std::string& data, const std::string& target) {
  const Pipeline p = load_pipeline(model_path);
  CsvOptions opt;
  opt.na_token = c.na_token;
  if (!target.empty()) opt.target = target;
  for (const auto& col : p.schema) opt.kinds[col.name] = col.kind;
  Dataset ds = read_csv(data, opt);
  MaskedMatrix x = ds.x;
  // Level codes follow first appearance in each file; map them onto the model schema.
  if (x.cols() != static_cast<Index>(p.schema.size())) throw DimensionError("predict: column count differs from the model");
  Eigen::MatrixXd v = x.raw_values();
  for (Index j = 0; j < x.cols(); ++j) {
    const auto& want = p.schema[static_cast<std::size_t>(j)];
    if (x.column(j).name != want.name) throw DimensionError("predict: column '" + x.column(j).name + "' not in model");
    if (!want.is_categorical()) continue;
    for (Index i = 0; i < x.rows(); ++i) {
      if (x.missing(i, j)) continue;
      const auto& label = x.column(j).levels[static_cast<std::size_t>(v(i, j))];
      const auto it = std::find(want.levels.begin(), want.levels.end(), label);
      if (it == want.levels.end()) throw DimensionError("predict: unseen level '" + label + "' in " + want.name);
      v(i, j) = static_cast<double>(it - want.levels.begin());
    }
  }
  x = MaskedMatrix(std::move(v), x.mask(), p.schema);
  const Eigen::VectorXd pred = p.predict(x);
  std::ostream* os = &std::cout;
  std::ofstream file;
  if (!c.out.empty()) {
    file.open(c.out);
    if (!file) throw std::runtime_error("cannot write " + c.out);
    os = &file;
  }
  *os << "prediction\n";
  for (Index i = 0; i < pred.size(); ++i) *os << format_double(pred(i)) << '\n';
  return 0;
}

int run_benchmark(const Common& c) {
  if (c.config.empty()) throw CLI::RequiredError("--config");
  ExperimentConfig cfg = load_experiment_config(c.config);
  if (c.seed) cfg.seed = *c.seed;
  if (c.threads) cfg.threads = *c.threads;
  cfg.validate();
  const fs::path dir = c.out.empty() ? fs::path("results") : fs::path(c.out);
  fs::create_directories(dir);
  const auto records = run_experiment(cfg, [](const ResultRecord& r) {
    std::cerr << r.method << " rep " << r.replication << ": " << r.status << ' ' << r.value << '\n';
  });
  write_results_csv(dir / "results.csv", records);
  write_json(dir / "summary.json", summary_json(summarize(records)));
  write_json(dir / "manifest.json", {{"config", cfg.to_json()}, {"records", records.size()}});
  std::cout << "wrote " << records.size() << " records to " << (dir / "results.csv").string() << '\n';
  return 0;
}

int run_verify(const Common& c, int n_random) {
  const auto checks = run_theory_suite(c.seed.value_or(1), n_random);
  bool ok = true;
  for (const auto& ch : checks) {
    std::cout << (ch.passed ? "PASS " : "FAIL ") << ch.name << "  " << ch.detail << '\n';
    ok = ok && ch.passed;
  }
  return ok ? 0 : 2;
}

int run_plot(const Common& c, const std::string& results) {
  const auto rows = summarize(read_results_csv(results));
  const std::string out = c.out.empty() ? "plot_data.csv" : c.out;
  write_plot_data(out, rows);
  std::cout << "wrote " << rows.size() << " rows to " << out << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Prediction with missing data: adaptive linear models, joint impute-then-regress, benchmarks"};
  app.require_subcommand(1);

  Common gen_c, train_c, pred_c, bench_c, theory_c, plot_c;
  std::string source = "synthetic";
  auto* gen = app.add_subcommand("generate", "Write a synthetic train/test pair and a manifest");
  add_common(gen, gen_c, true, false);
  gen->add_option("--source", source, "synthetic or binary_nmar (ignored with --config)")->capture_default_str();

  std::string data, target = "y", method = "mean+best", task, test;
  int folds = 5;
  auto* train = app.add_subcommand("train", "Fit one pipeline and write the model document");
  add_common(train, train_c, false, false);
  train->add_option("--data", data, "Training CSV")->required();
  train->add_option("--target", target, "Target column")->capture_default_str();
  train->add_option("--method", method, "Method, e.g. mean+best, adaptive:best, joint:linear")->capture_default_str();
  train->add_option("--task", task, "regression or binary (inferred when omitted)");
  train->add_option("--test", test, "Test CSV, needed by V1 pipelines");
  train->add_option("--folds", folds, "Cross-validation folds")->capture_default_str();

  std::string model, pdata, ptarget;
  auto* predict = app.add_subcommand("predict", "Apply a model document to a CSV");
  add_common(predict, pred_c, false, false);
  predict->add_option("--model", model, "Model document")->required();
  predict->add_option("--data", pdata, "Feature CSV")->required();
  predict->add_option("--target", ptarget, "Target column to drop when present");

  auto* bench = app.add_subcommand("benchmark", "Run an experiment configuration");
  add_common(bench, bench_c, true, true);

  int n_random = 200;
  auto* theory = app.add_subcommand("verify-theory", "Run the exact theory checks");
  add_common(theory, theory_c, false, false);
  theory->add_option("--random", n_random, "Random joints for the sign check")->capture_default_str();

  std::string results;
  auto* plot = app.add_subcommand("plot-data", "Aggregate results into long-format figure data");
  add_common(plot, plot_c, false, false);
  plot->add_option("--results", results, "results.csv from benchmark")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }
  try {
    if (*gen) return run_generate(gen_c, source);
    if (*train) return run_train(train_c, data, target, method, task, test, folds);
    if (*predict) return run_predict(pred_c, model, pdata, ptarget);
    if (*bench) return run_benchmark(bench_c);
    if (*theory) return run_verify(theory_c, n_random);
    if (*plot) return run_plot(plot_c, results);
  } catch (const CLI::Error& e) {
    std::cerr << "error: " << e.what() << '\n' << app.help();
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
