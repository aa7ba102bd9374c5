#include "missreg/experiment.hpp"

#include "missreg/csv.hpp"
#include "missreg/imputation.hpp"
#include "missreg/metrics.hpp"
#include "missreg/stats.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

namespace missreg {

using nlohmann::json;

namespace {

template <typename T>
void read_opt(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void reject_unknown(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) throw std::invalid_argument("unknown key '" + k + "' in " + where);
}

struct LoadedCsv {
  Dataset data;
  std::optional<Eigen::MatrixXd> completed;
};

LoadedCsv& cached_csv(const SourceConfig& s) {
  static std::mutex mu;
  static std::map<std::string, LoadedCsv> cache;
  std::lock_guard<std::mutex> lock(mu);
  const std::string key = s.path + "\x1f" + s.target + "\x1f" + s.na_token;
  auto it = cache.find(key);
  if (it == cache.end()) {
    CsvOptions opt;
    opt.na_token = s.na_token;
    if (!s.target.empty()) opt.target = s.target;
    opt.task = s.task;
    LoadedCsv l{read_csv(s.path, opt), std::nullopt};
    it = cache.emplace(key, std::move(l)).first;
  }
  if (s.type == SourceType::semisynthetic && !it->second.completed)
    it->second.completed = run_chained(it->second.data.x, ChainedOptions{}).completed;
  return it->second;
}

void split_rows(Index n, double test_fraction, Index n_train, std::uint64_t seed, std::vector<Index>& train,
                std::vector<Index>& test) {
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_test = static_cast<Index>(std::llround(test_fraction * static_cast<double>(n)));
  if (n_test < 1 || n_test >= n) throw std::invalid_argument("test split leaves an empty side");
  test.assign(order.begin(), order.begin() + n_test);
  train.assign(order.begin() + n_test, order.end());
  if (n_train > 0) {
    if (n_train > static_cast<Index>(train.size())) throw std::invalid_argument("n_train exceeds the available rows");
    train.resize(static_cast<std::size_t>(n_train));
  }
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
}

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& m, const std::vector<Index>& rows) {
  Eigen::MatrixXd out(static_cast<Index>(rows.size()), m.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) out.row(static_cast<Index>(r)) = m.row(rows[r]);
  return out;
}

std::string clean(std::string s) {
  for (auto& c : s)
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  return s;
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

std::string to_string(SourceType t) {
  switch (t) {
    case SourceType::synthetic: return "synthetic";
    case SourceType::binary_nmar: return "binary_nmar";
    case SourceType::csv: return "csv";
    case SourceType::semisynthetic: return "semisynthetic";
  }
  return "?";
}

SourceType parse_source_type(const std::string& s) {
  if (s == "synthetic") return SourceType::synthetic;
  if (s == "binary_nmar") return SourceType::binary_nmar;
  if (s == "csv") return SourceType::csv;
  if (s == "semisynthetic") return SourceType::semisynthetic;
  throw std::invalid_argument("unknown source type '" + s + "'");
}

void ExperimentConfig::validate() const {
  if (replications < 1) throw std::invalid_argument("replications must be >= 1");
  if (folds < 2) throw std::invalid_argument("folds must be >= 2");
  if (threads < 1) throw std::invalid_argument("threads must be >= 1");
  if (methods.empty()) throw std::invalid_argument("no methods listed");
  for (const auto& m : methods) (void)MethodSpec::parse(m);
  if (metric != "auto" && metric != "r2" && metric != "auc_norm" && metric != "accuracy")
    throw std::invalid_argument("unknown metric '" + metric + "'");
  if ((source.type == SourceType::csv || source.type == SourceType::semisynthetic) && source.path.empty())
    throw std::invalid_argument("csv sources need a path");
  if (source.type == SourceType::csv && source.target.empty()) throw std::invalid_argument("csv sources need a target");
  for (double p : p_missing)
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("p_missing must lie in (0, 1)");
}

std::vector<SweepPoint> ExperimentConfig::sweep() const {
  std::vector<std::string> mechs = mechanisms, sigs = signals;
  std::vector<double> ps = p_missing;
  std::vector<Index> ks = k_missing, ns = n_train;
  if (mechs.empty()) {
    switch (source.type) {
      case SourceType::synthetic: mechs = {to_string(source.synthetic.mechanism)}; break;
      case SourceType::semisynthetic: mechs = {to_string(source.semisyn.mechanism)}; break;
      case SourceType::binary_nmar: mechs = {"nmar"}; break;
      case SourceType::csv: mechs = {"real"}; break;
    }
  }
  if (sigs.empty()) {
    switch (source.type) {
      case SourceType::synthetic: sigs = {to_string(source.synthetic.signal)}; break;
      case SourceType::semisynthetic: sigs = {to_string(source.semisyn.signal)}; break;
      case SourceType::binary_nmar: sigs = {"linear"}; break;
      case SourceType::csv: sigs = {"real"}; break;
    }
  }
  if (ps.empty()) {
    switch (source.type) {
      case SourceType::synthetic: ps = {source.synthetic.p_missing}; break;
      case SourceType::binary_nmar: ps = {source.binary.p_missing_one}; break;
      default: ps = {0.0};
    }
  }
  if (ks.empty()) ks = {source.type == SourceType::semisynthetic ? source.semisyn.k_missing : 0};
  if (ns.empty()) {
    switch (source.type) {
      case SourceType::synthetic: ns = {source.synthetic.n_train}; break;
      case SourceType::binary_nmar: ns = {source.binary.n_train}; break;
      default: ns = {0};
    }
  }
  std::vector<SweepPoint> out;
  for (const auto& m : mechs)
    for (const auto& s : sigs)
      for (double p : ps)
        for (Index k : ks)
          for (Index n : ns) out.push_back({n, p, k, m, s});
  return out;
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  try {
    reject_unknown(j, {"name", "source", "sweep", "methods", "replications", "folds", "seed", "threads", "metric"},
                   "experiment config");
    ExperimentConfig c;
    read_opt(j, "name", c.name);
    read_opt(j, "methods", c.methods);
    read_opt(j, "replications", c.replications);
    read_opt(j, "folds", c.folds);
    read_opt(j, "seed", c.seed);
    read_opt(j, "threads", c.threads);
    read_opt(j, "metric", c.metric);
    if (j.contains("sweep")) {
      const auto& s = j.at("sweep");
      reject_unknown(s, {"n_train", "p_missing", "k_missing", "mechanism", "signal"}, "sweep");
      read_opt(s, "n_train", c.n_train);
      read_opt(s, "p_missing", c.p_missing);
      read_opt(s, "k_missing", c.k_missing);
      read_opt(s, "mechanism", c.mechanisms);
      read_opt(s, "signal", c.signals);
    }
    if (j.contains("source")) {
      const auto& s = j.at("source");
      reject_unknown(s,
                     {"type", "d", "r", "eps", "k", "snr", "n_train", "n_test", "p_missing", "signal", "mechanism",
                      "p_one", "p_missing_zero", "path", "target", "task", "na_token", "test_fraction", "k_cap",
                      "k_missing"},
                     "source");
      auto& src = c.source;
      if (s.contains("type")) src.type = parse_source_type(s.at("type").get<std::string>());
      auto& sy = src.synthetic;
      read_opt(s, "d", sy.d);
      read_opt(s, "r", sy.r);
      read_opt(s, "eps", sy.eps);
      read_opt(s, "k", sy.k);
      read_opt(s, "snr", sy.snr);
      read_opt(s, "n_train", sy.n_train);
      read_opt(s, "n_test", sy.n_test);
      read_opt(s, "p_missing", sy.p_missing);
      auto& bi = src.binary;
      read_opt(s, "d", bi.d);
      read_opt(s, "n_train", bi.n_train);
      read_opt(s, "n_test", bi.n_test);
      read_opt(s, "p_one", bi.p_one);
      read_opt(s, "p_missing", bi.p_missing_one);
      read_opt(s, "p_missing_zero", bi.p_missing_zero);
      read_opt(s, "snr", bi.snr);
      auto& ss = src.semisyn;
      read_opt(s, "k_cap", ss.k_cap);
      read_opt(s, "k_missing", ss.k_missing);
      read_opt(s, "snr", ss.snr);
      if (s.contains("signal")) {
        sy.signal = parse_signal_kind(s.at("signal").get<std::string>());
        ss.signal = sy.signal;
      }
      if (s.contains("mechanism")) {
        const auto m = s.at("mechanism").get<std::string>();
        if (src.type == SourceType::semisynthetic)
          ss.mechanism = parse_semisyn_mechanism(m);
        else if (src.type == SourceType::synthetic)
          sy.mechanism = parse_synthetic_mechanism(m);
      }
      read_opt(s, "path", src.path);
      read_opt(s, "target", src.target);
      read_opt(s, "na_token", src.na_token);
      read_opt(s, "test_fraction", src.test_fraction);
      if (s.contains("task")) {
        const auto t = s.at("task").get<std::string>();
        if (t != "binary" && t != "regression") throw std::invalid_argument("task must be binary or regression");
        src.task = t == "binary" ? Task::binary : Task::regression;
      }
    }
    c.validate();
    return c;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("experiment config: ") + e.what());
  }
}

json ExperimentConfig::to_json() const {
  json src = {{"type", missreg::to_string(source.type)}};
  switch (source.type) {
    case SourceType::synthetic: {
      const auto& s = source.synthetic;
      src.update({{"d", s.d}, {"r", s.r}, {"eps", s.eps}, {"k", s.k}, {"snr", s.snr}, {"n_train", s.n_train},
                  {"n_test", s.n_test}, {"p_missing", s.p_missing}, {"signal", missreg::to_string(s.signal)},
                  {"mechanism", missreg::to_string(s.mechanism)}});
      break;
    }
    case SourceType::binary_nmar: {
      const auto& b = source.binary;
      src.update({{"d", b.d}, {"n_train", b.n_train}, {"n_test", b.n_test}, {"p_one", b.p_one},
                  {"p_missing", b.p_missing_one}, {"p_missing_zero", b.p_missing_zero}, {"snr", b.snr}});
      break;
    }
    case SourceType::semisynthetic:
      src.update({{"k_cap", source.semisyn.k_cap}, {"k_missing", source.semisyn.k_missing},
                  {"snr", source.semisyn.snr}, {"signal", missreg::to_string(source.semisyn.signal)},
                  {"mechanism", missreg::to_string(source.semisyn.mechanism)}});
      [[fallthrough]];
    case SourceType::csv:
      src.update({{"path", source.path}, {"na_token", source.na_token}, {"test_fraction", source.test_fraction}});
      if (!source.target.empty()) src["target"] = source.target;
      if (source.task) src["task"] = *source.task == Task::binary ? "binary" : "regression";
      break;
  }
  json sweep = json::object();
  if (!n_train.empty()) sweep["n_train"] = n_train;
  if (!p_missing.empty()) sweep["p_missing"] = p_missing;
  if (!k_missing.empty()) sweep["k_missing"] = k_missing;
  if (!mechanisms.empty()) sweep["mechanism"] = mechanisms;
  if (!signals.empty()) sweep["signal"] = signals;
  return {{"name", name},     {"source", src},   {"sweep", sweep},     {"methods", methods},
          {"replications", replications}, {"folds", folds}, {"seed", seed}, {"threads", threads},
          {"metric", metric}};
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::invalid_argument("experiment config: " + std::string(e.what()));
  }
  return ExperimentConfig::from_json(j);
}

std::uint64_t instance_seed(std::uint64_t master, const std::string& dataset, std::size_t point, int replication) {
  return derive_seed({master, hash_string(dataset), static_cast<std::uint64_t>(point), static_cast<std::uint64_t>(replication)});
}

std::uint64_t method_seed(std::uint64_t master, const std::string& dataset, const std::string& method,
                          int replication) {
  return derive_seed({master, hash_string(dataset), hash_string(method), static_cast<std::uint64_t>(replication)});
}

Instance make_instance(const ExperimentConfig& config, const SweepPoint& point, int replication,
                       std::size_t point_index) {
  const std::uint64_t seed = instance_seed(config.seed, config.name, point_index, replication);
  const auto& src = config.source;
  Instance out;
  switch (src.type) {
    case SourceType::synthetic: {
      SyntheticConfig sc = src.synthetic;
      if (point.n_train > 0) sc.n_train = point.n_train;
      sc.p_missing = point.p_missing;
      sc.mechanism = parse_synthetic_mechanism(point.mechanism);
      sc.signal = parse_signal_kind(point.signal);
      sc.seed = seed;
      SyntheticInstance s = generate_synthetic(sc);
      out = {std::move(s.train_x), std::move(s.train_y), std::move(s.test_x), std::move(s.test_y),
             std::move(s.train_full), std::move(s.test_full)};
      return out;
    }
    case SourceType::binary_nmar: {
      BinaryNmarConfig bc = src.binary;
      if (point.n_train > 0) bc.n_train = point.n_train;
      bc.p_missing_one = point.p_missing;
      bc.seed = seed;
      BinaryNmarInstance b = generate_binary_nmar(bc);
      out = {std::move(b.train_x), std::move(b.train_y), std::move(b.test_x), std::move(b.test_y), std::nullopt,
             std::nullopt};
      return out;
    }
    case SourceType::csv: {
      const LoadedCsv& l = cached_csv(src);
      if (!l.data.y) throw std::invalid_argument("csv source has no target column");
      std::vector<Index> tr, te;
      split_rows(l.data.x.rows(), src.test_fraction, point.n_train, seed, tr, te);
      out.train_x = l.data.x.select_rows(tr);
      out.test_x = l.data.x.select_rows(te);
      out.train_y = l.data.y->select(tr);
      out.test_y = l.data.y->select(te);
      return out;
    }
    case SourceType::semisynthetic: {
      const LoadedCsv& l = cached_csv(src);
      SemiSynConfig ss = src.semisyn;
      ss.k_missing = point.k_missing;
      ss.mechanism = parse_semisyn_mechanism(point.mechanism);
      ss.signal = parse_signal_kind(point.signal);
      ss.seed = seed;
      SemiSynInstance s = generate_semisynthetic(*l.completed, l.data.x.mask(), ss);
      std::vector<Index> tr, te;
      split_rows(s.x.rows(), src.test_fraction, point.n_train, derive_seed({seed, hash_string("split")}), tr, te);
      out.train_x = s.x.select_rows(tr);
      out.test_x = s.x.select_rows(te);
      out.train_y = s.y.select(tr);
      out.test_y = s.y.select(te);
      out.train_full = take_rows(s.x_full, tr);
      out.test_full = take_rows(s.x_full, te);
      return out;
    }
  }
  return out;
}

double score(const std::string& metric, const Eigen::VectorXd& y, const Eigen::VectorXd& pred) {
  if (metric == "r2") return r2(y, pred);
  if (metric == "auc_norm") return auc_norm(y, pred);
  if (metric == "accuracy") return accuracy(y, pred);
  throw std::invalid_argument("unknown metric '" + metric + "'");
}

std::vector<ResultRecord> run_experiment(const ExperimentConfig& config, const RecordCallback& on_record) {
  config.validate();
  const auto points = config.sweep();
  const std::size_t n_tasks = points.size() * static_cast<std::size_t>(config.replications);
  std::vector<std::vector<ResultRecord>> slots(n_tasks);
  std::mutex emit;
  std::atomic<std::size_t> next{0};

  const auto work = [&] {
    for (std::size_t t = next++; t < n_tasks; t = next++) {
      const std::size_t pi = t / static_cast<std::size_t>(config.replications);
      const int rep = static_cast<int>(t % static_cast<std::size_t>(config.replications));
      const SweepPoint& pt = points[pi];
      std::optional<Instance> inst;
      std::string data_error;
      try {
        inst = make_instance(config, pt, rep, pi);
      } catch (const std::exception& e) {
        data_error = e.what();
      }
      for (const auto& mname : config.methods) {
        ResultRecord r;
        r.dataset = config.name;
        r.method = mname;
        r.replication = rep;
        r.mechanism = pt.mechanism;
        r.signal = pt.signal;
        r.n_train = inst ? inst->train_x.rows() : pt.n_train;
        r.p_missing = pt.p_missing;
        r.k_missing = pt.k_missing;
        const auto start = std::chrono::steady_clock::now();
        try {
          if (!inst) throw std::runtime_error("data generation failed: " + data_error);
          r.metric = config.metric == "auto" ? (inst->train_y.task == Task::binary ? "auc_norm" : "r2") : config.metric;
          PipelineOptions opt;
          opt.set_folds(config.folds);
          opt.set_seed(method_seed(config.seed, config.name, mname, rep));
          FitContext ctx;
          ctx.test_x = &inst->test_x;
          if (inst->train_full) ctx.train_full = &*inst->train_full;
          const Pipeline p = fit_pipeline(MethodSpec::parse(mname), inst->train_x, inst->train_y, opt, ctx);
          const Eigen::VectorXd pred = p.predict(inst->test_x, inst->test_full ? &*inst->test_full : nullptr);
          r.value = score(r.metric, inst->test_y.y, pred);
        } catch (const std::exception& e) {
          r.status = "error";
          r.error = clean(e.what());
          r.value = std::numeric_limits<double>::quiet_NaN();
        }
        r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (on_record) {
          std::lock_guard<std::mutex> lock(emit);
          on_record(r);
        }
        slots[t].push_back(std::move(r));
      }
    }
  };
  const int n_threads = std::min<int>(config.threads, static_cast<int>(std::max<std::size_t>(n_tasks, 1)));
  if (n_threads <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  std::vector<ResultRecord> out;
  for (auto& s : slots)
    for (auto& r : s) out.push_back(std::move(r));
  return out;
}

std::vector<std::string> results_header() {
  return {"dataset", "method", "replication", "mechanism", "signal", "n_train", "p_missing",
          "k_missing", "metric", "value", "wall_time", "status", "error"};
}

void write_results_csv(const std::filesystem::path& path, const std::vector<ResultRecord>& records) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  const auto h = results_header();
  for (std::size_t i = 0; i < h.size(); ++i) out << (i ? "," : "") << h[i];
  out << '\n';
  for (const auto& r : records) {
    out << clean(r.dataset) << ',' << clean(r.method) << ',' << r.replication << ',' << clean(r.mechanism) << ','
        << clean(r.signal) << ',' << r.n_train << ',' << format_double(r.p_missing) << ',' << r.k_missing << ','
        << r.metric << ',' << format_double(r.value) << ',' << format_double(r.wall_time) << ',' << r.status << ','
        << clean(r.error) << '\n';
  }
}

std::vector<ResultRecord> read_results_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty results file");
  const auto header = split_line(line);
  if (header != results_header()) throw std::runtime_error("unexpected results header in " + path.string());
  std::vector<ResultRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_line(line);
    if (f.size() != header.size()) throw std::runtime_error("malformed results line: " + line);
    ResultRecord r;
    r.dataset = f[0];
    r.method = f[1];
    r.replication = std::stoi(f[2]);
    r.mechanism = f[3];
    r.signal = f[4];
    r.n_train = std::stoll(f[5]);
    r.p_missing = std::stod(f[6]);
    r.k_missing = std::stoll(f[7]);
    r.metric = f[8];
    r.value = f[9] == "NA" ? std::numeric_limits<double>::quiet_NaN() : std::stod(f[9]);
    r.wall_time = std::stod(f[10]);
    r.status = f[11];
    r.error = f[12];
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<SummaryRow> summarize(const std::vector<ResultRecord>& records) {
  using Key = std::tuple<std::string, std::string, std::string, std::string, Index, double, Index>;
  std::vector<Key> order;
  std::map<Key, std::pair<std::vector<double>, int>> groups;
  std::map<Key, std::string> metric;
  for (const auto& r : records) {
    const Key k{r.dataset, r.method, r.mechanism, r.signal, r.n_train, r.p_missing, r.k_missing};
    auto [it, fresh] = groups.try_emplace(k);
    if (fresh) order.push_back(k);
    if (r.status == "ok") {
      it->second.first.push_back(r.value);
      metric[k] = r.metric;
    } else {
      ++it->second.second;
    }
  }
  std::vector<SummaryRow> out;
  for (const auto& k : order) {
    const auto& [vals, errs] = groups.at(k);
    const MeanSe ms = mean_se(vals);
    SummaryRow s;
    std::tie(s.dataset, s.method, s.mechanism, s.signal, s.n_train, s.p_missing, s.k_missing) = k;
    s.metric = metric.count(k) ? metric.at(k) : "";
    s.mean = ms.mean;
    s.se = ms.se;
    s.count = ms.n;
    s.errors = errs;
    out.push_back(std::move(s));
  }
  return out;
}

json summary_json(const std::vector<SummaryRow>& rows) {
  json a = json::array();
  for (const auto& s : rows)
    a.push_back({{"dataset", s.dataset},   {"method", s.method},       {"mechanism", s.mechanism},
                 {"signal", s.signal},     {"n_train", s.n_train},     {"p_missing", s.p_missing},
                 {"k_missing", s.k_missing}, {"metric", s.metric},     {"mean", s.mean},
                 {"se", s.se},             {"count", s.count},         {"errors", s.errors}});
  return {{"groups", a}};
}

void write_plot_data(const std::filesystem::path& path, const std::vector<SummaryRow>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "dataset,method,mechanism,signal,n_train,p_missing,k_missing,metric,mean,se,count\n";
  for (const auto& s : rows)
    out << clean(s.dataset) << ',' << clean(s.method) << ',' << clean(s.mechanism) << ',' << clean(s.signal) << ','
        << s.n_train << ',' << format_double(s.p_missing) << ',' << s.k_missing << ',' << s.metric << ','
        << format_double(s.mean) << ',' << format_double(s.se) << ',' << s.count << '\n';
}

}  // namespace missreg
