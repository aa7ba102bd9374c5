#include "missreg/adaptive.hpp"
#include "missreg/datagen.hpp"
#include "missreg/glm.hpp"
#include "missreg/imputation.hpp"
#include "missreg/joint.hpp"
#include "missreg/tree.hpp"

#include <benchmark/benchmark.h>

using namespace missreg;

namespace {

SyntheticInstance instance(Index n, Index d, double p) {
  SyntheticConfig c;
  c.d = d;
  c.r = d / 2;
  c.k = d / 2;
  c.n_train = n;
  c.n_test = 10;
  c.p_missing = p;
  c.seed = 3;
  return generate_synthetic(c);
}

}  // namespace

static void BM_LassoFit(benchmark::State& state) {
  const SyntheticInstance inst = instance(state.range(0), state.range(1), 0.0);
  const Eigen::MatrixXd x = inst.train_full;
  GlmSpec spec;
  spec.lambda = 0.1 * lambda_max(x, inst.train_y.y, spec);
  for (auto _ : state) benchmark::DoNotOptimize(fit_glm(x, inst.train_y.y, spec));
}
BENCHMARK(BM_LassoFit)->Args({500, 10})->Args({2000, 10})->Args({2000, 50})->Unit(benchmark::kMillisecond);

static void BM_CvPath(benchmark::State& state) {
  const SyntheticInstance inst = instance(state.range(0), 10, 0.0);
  GlmGrid grid;
  grid.n_lambda = 30;
  for (auto _ : state) benchmark::DoNotOptimize(cv_path(inst.train_full, inst.train_y.y, GlmSpec{}, grid, 5, 1));
}
BENCHMARK(BM_CvPath)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

static void BM_TreeFit(benchmark::State& state) {
  const SyntheticInstance inst = instance(state.range(0), 10, 0.0);
  TreeSpec spec;
  for (auto _ : state) benchmark::DoNotOptimize(fit_tree(inst.train_full, nullptr, inst.train_y.y, spec));
}
BENCHMARK(BM_TreeFit)->Arg(1000)->Arg(5000)->Unit(benchmark::kMillisecond);

static void BM_MiaTreeFit(benchmark::State& state) {
  const SyntheticInstance inst = instance(state.range(0), 10, 0.3);
  const Eigen::MatrixXd v = inst.train_x.filled(0.0);
  TreeSpec spec;
  spec.mia = true;
  for (auto _ : state) benchmark::DoNotOptimize(fit_tree(v, &inst.train_x.mask(), inst.train_y.y, spec));
}
BENCHMARK(BM_MiaTreeFit)->Arg(1000)->Arg(5000)->Unit(benchmark::kMillisecond);

static void BM_ForestFit(benchmark::State& state) {
  const SyntheticInstance inst = instance(1000, 10, 0.0);
  ForestSpec spec;
  spec.n_trees = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(fit_forest(inst.train_full, nullptr, inst.train_y.y, spec));
}
BENCHMARK(BM_ForestFit)->Arg(10)->Arg(50)->Unit(benchmark::kMillisecond);

static void BM_Expansion(benchmark::State& state) {
  const SyntheticInstance inst = instance(2000, 10, 0.3);
  const FunctionClass cls = FunctionClass::polynomial(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(expand(inst.train_x, cls));
}
BENCHMARK(BM_Expansion)->Arg(1)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

static void BM_ChainedImpute(benchmark::State& state) {
  const SyntheticInstance inst = instance(state.range(0), 10, 0.3);
  for (auto _ : state) benchmark::DoNotOptimize(Imputer::fit_chained(inst.train_x));
}
BENCHMARK(BM_ChainedImpute)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

static void BM_JointLinear(benchmark::State& state) {
  const SyntheticInstance inst = instance(1000, 10, 0.3);
  for (auto _ : state) benchmark::DoNotOptimize(fit_joint(inst.train_x, inst.train_y, JointConfig{}));
}
BENCHMARK(BM_JointLinear)->Unit(benchmark::kMillisecond)->Iterations(3);
BENCHMARK_MAIN();
