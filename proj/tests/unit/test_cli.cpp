#ifdef MISSREG_CLI_PATH

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("missreg_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int run(const std::string& args) const {
    const std::string cmd = std::string("\"") + MISSREG_CLI_PATH + "\" " + args + " > \"" +
                            (dir_ / "stdout.txt").string() + "\" 2> \"" + (dir_ / "stderr.txt").string() + "\"";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  }

  std::string p(const std::string& name) const { return (dir_ / name).string(); }

  void write(const std::string& name, const std::string& text) const { std::ofstream(dir_ / name) << text; }

  std::vector<std::string> lines(const std::string& name) const {
    std::ifstream in(dir_ / name);
    std::vector<std::string> out;
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
  }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, GenerateTrainPredictRoundTrip) {
  write("source.json", R"({"type": "synthetic", "d": 4, "r": 2, "k": 3, "n_train": 150, "n_test": 60, "p_missing": 0.2})");
  ASSERT_EQ(run("generate --config " + p("source.json") + " --seed 7 --out " + p("data")), 0);
  EXPECT_TRUE(fs::exists(p("data/train.csv")));
  EXPECT_TRUE(fs::exists(p("data/manifest.json")));
  const auto test_rows = lines("data/test.csv");
  ASSERT_EQ(test_rows.size(), 61u);

  ASSERT_EQ(run("train --data " + p("data/train.csv") + " --method mean+linear --folds 3 --out " + p("model.json")), 0);
  ASSERT_EQ(run("predict --model " + p("model.json") + " --data " + p("data/test.csv") + " --target y --out " +
                p("pred.csv")),
            0);
  const auto pred = lines("pred.csv");
  ASSERT_EQ(pred.size(), 61u);
  EXPECT_EQ(pred.front(), "prediction");

  // Same seed, same files.
  ASSERT_EQ(run("generate --config " + p("source.json") + " --seed 7 --out " + p("again")), 0);
  EXPECT_EQ(lines("again/train.csv"), lines("data/train.csv"));
}

TEST_F(Cli, VerifyTheoryExitsZero) {
  EXPECT_EQ(run("verify-theory --random 20"), 0);
  const auto out = lines("stdout.txt");
  ASSERT_FALSE(out.empty());
  for (const auto& l : out) EXPECT_EQ(l.rfind("PASS", 0), 0u) << l;
}

TEST_F(Cli, BenchmarkAndPlotData) {
  write("exp.json", R"({
    "name": "cli",
    "source": {"type": "synthetic", "d": 4, "r": 2, "k": 3, "n_train": 100, "n_test": 100, "p_missing": 0.2},
    "methods": ["mean+linear", "complete:linear"],
    "replications": 2,
    "folds": 3,
    "seed": 5
  })");
  ASSERT_EQ(run("benchmark --config " + p("exp.json") + " --out " + p("res")), 0);
  EXPECT_EQ(lines("res/results.csv").size(), 1u + 2u * 2u);
  std::ifstream in(p("res/summary.json"));
  const auto j = nlohmann::json::parse(in);
  EXPECT_EQ(j.at("groups").size(), 2u);

  ASSERT_EQ(run("plot-data --results " + p("res/results.csv") + " --out " + p("plot.csv")), 0);
  EXPECT_GE(lines("plot.csv").size(), 3u);
}

TEST_F(Cli, BadInvocationsFail) {
  EXPECT_NE(run(""), 0);
  EXPECT_NE(run("train --data " + p("missing.csv")), 0);
  EXPECT_NE(run("benchmark"), 0);
  EXPECT_NE(run("train --data x.csv --method knn+linear"), 0);
}

#endif
