#include <benchmark/benchmark.h>

#include "relscope/random.hpp"
#include "relscope/svm.hpp"

using namespace relscope;

namespace {
struct Data {
  FeatureMatrix x;
  std::vector<int> y;
};

Data make(std::size_t n, std::size_t dim, int classes) {
  Rng rng(1);
  Data d;
  std::vector<double> row(dim);
  for (std::size_t i = 0; i < n; ++i) {
    int c = static_cast<int>(i % static_cast<std::size_t>(classes));
    for (std::size_t k = 0; k < dim; ++k) row[k] = rng.normal() + (k % classes == static_cast<std::size_t>(c) ? 2.0 : 0.0);
    d.x.push_row(row);
    d.y.push_back(c);
  }
  return d;
}
}  // namespace

static void BM_TrainBinary(benchmark::State& state) {
  auto d = make(static_cast<std::size_t>(state.range(0)), 64, 2);
  std::vector<int> s;
  for (int y : d.y) s.push_back(y ? 1 : -1);
  SvmConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(train_binary(d.x, s, cfg));
  state.SetItemsProcessed(state.iterations() * state.range(0) * static_cast<long>(cfg.epochs));
}
BENCHMARK(BM_TrainBinary)->Arg(200)->Arg(1000)->Arg(5000)->Unit(benchmark::kMillisecond);

static void BM_TrainOneVsRest16(benchmark::State& state) {
  auto d = make(800, static_cast<std::size_t>(state.range(0)), 16);
  SvmConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(train(d.x, d.y, cfg));
}
BENCHMARK(BM_TrainOneVsRest16)->Arg(150)->Arg(1024)->UseRealTime()->Unit(benchmark::kMillisecond);

static void BM_Predict(benchmark::State& state) {
  auto d = make(800, 150, 16);
  auto m = train(d.x, d.y, {});
  for (auto _ : state) benchmark::DoNotOptimize(predict_labels(m, d.x));
  state.SetItemsProcessed(state.iterations() * 800);
}
BENCHMARK(BM_Predict);
