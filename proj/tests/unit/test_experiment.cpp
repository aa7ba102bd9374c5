#include "missreg/experiment.hpp"
#include "missreg/stats.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <map>
#include <set>

using namespace missreg;

namespace {

ExperimentConfig tiny() {
  return ExperimentConfig::from_json(nlohmann::json::parse(R"({
    "name": "tiny",
    "source": {"type": "synthetic", "d": 4, "r": 2, "k": 3, "n_train": 120, "n_test": 200, "p_missing": 0.2},
    "sweep": {"mechanism": ["mcar", "censoring"]},
    "methods": ["mean+linear", "adaptive:affine_intercept"],
    "replications": 3,
    "folds": 3,
    "seed": 42
  })"));
}

}  // namespace

TEST(ExperimentConfig, JsonRoundTrip) {
  const ExperimentConfig c = tiny();
  const ExperimentConfig back = ExperimentConfig::from_json(c.to_json());
  EXPECT_EQ(back.to_json(), c.to_json());
  EXPECT_EQ(back.methods, c.methods);
  EXPECT_EQ(back.source.synthetic.d, 4);
}

TEST(ExperimentConfig, UnknownKeysAndBadValuesRejected) {
  EXPECT_ANY_THROW(ExperimentConfig::from_json({{"replicates", 3}}));
  EXPECT_ANY_THROW(ExperimentConfig::from_json({{"source", {{"kind", "synthetic"}}}}));
  ExperimentConfig c = tiny();
  c.methods = {"nonsense"};
  EXPECT_ANY_THROW(c.validate());
  c = tiny();
  c.replications = 0;
  EXPECT_ANY_THROW(c.validate());
}

TEST(ExperimentConfig, SweepIsCartesian) {
  ExperimentConfig c = tiny();
  c.p_missing = {0.1, 0.3};
  EXPECT_EQ(c.sweep().size(), 4u);
}

TEST(Seeds, DistinctAcrossReplicationsAndMethods) {
  std::set<std::uint64_t> inst, meth;
  for (int r = 0; r < 20; ++r) {
    inst.insert(instance_seed(1, "d", 0, r));
    for (const char* m : {"a", "b", "c"}) meth.insert(method_seed(1, "d", m, r));
  }
  EXPECT_EQ(inst.size(), 20u);
  EXPECT_EQ(meth.size(), 60u);
  EXPECT_NE(instance_seed(1, "d", 0, 0), instance_seed(1, "d", 1, 0));
  EXPECT_NE(instance_seed(1, "d", 0, 0), instance_seed(2, "d", 0, 0));
}

TEST(Experiment, RecordCountOrderAndDeterminism) {
  const ExperimentConfig c = tiny();
  std::size_t streamed = 0;
  const auto a = run_experiment(c, [&](const ResultRecord&) { ++streamed; });
  ASSERT_EQ(a.size(), 2u * 3u * 2u);
  EXPECT_EQ(streamed, a.size());
  for (const auto& r : a) {
    EXPECT_EQ(r.status, "ok") << r.error;
    EXPECT_EQ(r.metric, "r2");
  }
  EXPECT_EQ(a[0].method, "mean+linear");
  EXPECT_EQ(a[1].method, "adaptive:affine_intercept");
  EXPECT_EQ(a[0].mechanism, "mcar");
  const auto b = run_experiment(c);
  for (std::size_t k = 0; k < a.size(); ++k) EXPECT_EQ(a[k].value, b[k].value);
}

TEST(Experiment, MethodResultsDoNotDependOnOtherMethods) {
  ExperimentConfig c = tiny();
  const auto both = run_experiment(c);
  c.methods = {"adaptive:affine_intercept"};
  const auto alone = run_experiment(c);
  std::vector<double> from_both;
  for (const auto& r : both)
    if (r.method == "adaptive:affine_intercept") from_both.push_back(r.value);
  ASSERT_EQ(from_both.size(), alone.size());
  for (std::size_t k = 0; k < alone.size(); ++k) EXPECT_EQ(alone[k].value, from_both[k]);
}

TEST(Experiment, InstancesShareDataAcrossMethods) {
  const ExperimentConfig c = tiny();
  const auto pts = c.sweep();
  const Instance a = make_instance(c, pts[0], 1, 0), b = make_instance(c, pts[0], 1, 0);
  EXPECT_TRUE((a.train_x.mask() == b.train_x.mask()).all());
  EXPECT_EQ(a.train_x.filled(0.0), b.train_x.filled(0.0));
  EXPECT_EQ(a.test_y.y, b.test_y.y);
  const Instance other = make_instance(c, pts[0], 2, 0);
  EXPECT_NE(a.train_y.y, other.train_y.y);
}

TEST(Experiment, TestTargetsNeverReachTheFit) {
  // A canary value in the test targets must not change any score except
  // through the metric on those rows.
  const ExperimentConfig c = tiny();
  const Instance inst = make_instance(c, c.sweep()[0], 0, 0);
  PipelineOptions opt;
  opt.set_seed(1);
  opt.set_folds(3);
  const Pipeline p = fit_pipeline(MethodSpec::parse("mean+linear"), inst.train_x, inst.train_y, opt);
  Instance poisoned = inst;
  poisoned.test_y.y.setConstant(1e9);
  const Pipeline q = fit_pipeline(MethodSpec::parse("mean+linear"), poisoned.train_x, poisoned.train_y, opt);
  EXPECT_EQ(p.predict(inst.test_x), q.predict(poisoned.test_x));
}

TEST(Experiment, SummaryRecomputesFromRecords) {
  const auto recs = run_experiment(tiny());
  const auto rows = summarize(recs);
  ASSERT_EQ(rows.size(), 4u);
  for (const auto& row : rows) {
    std::vector<double> v;
    for (const auto& r : recs)
      if (r.method == row.method && r.mechanism == row.mechanism) v.push_back(r.value);
    const MeanSe ms = mean_se(v);
    EXPECT_EQ(row.count, 3);
    EXPECT_NEAR(row.mean, ms.mean, 1e-15);
    EXPECT_NEAR(row.se, ms.se, 1e-15);
  }
  const auto j = summary_json(rows);
  EXPECT_EQ(j.at("groups").size(), 4u);
}

TEST(Experiment, ResultsCsvRoundTrip) {
  const auto recs = run_experiment(tiny());
  const auto path = std::filesystem::temp_directory_path() / "missreg_results_test.csv";
  write_results_csv(path, recs);
  const auto back = read_results_csv(path);
  ASSERT_EQ(back.size(), recs.size());
  for (std::size_t k = 0; k < recs.size(); ++k) {
    EXPECT_EQ(back[k].method, recs[k].method);
    EXPECT_EQ(back[k].value, recs[k].value);
    EXPECT_EQ(back[k].replication, recs[k].replication);
  }
  std::filesystem::remove(path);
}

TEST(Experiment, FailuresBecomeErrorRecords) {
  ExperimentConfig c = tiny();
  c.replications = 1;
  // More folds than training rows.
  c.folds = 500;
  const auto recs = run_experiment(c);
  ASSERT_FALSE(recs.empty());
  for (const auto& r : recs) {
    EXPECT_EQ(r.status, "error");
    EXPECT_FALSE(r.error.empty());
  }
}

TEST(Score, MetricsByName) {
  Eigen::VectorXd y(4), s(4);
  y << 0, 0, 1, 1;
  s << 0.1, 0.6, 0.4, 0.9;
  EXPECT_DOUBLE_EQ(score("auc_norm", y, s), 0.5);
  EXPECT_DOUBLE_EQ(score("accuracy", y, s), 0.5);
  EXPECT_ANY_THROW(score("f1", y, s));
}
