#include <benchmark/benchmark.h>

#include "relscope/annotations.hpp"
#include "relscope/random.hpp"
#include "relscope/statistics.hpp"

using namespace relscope;

namespace {
std::vector<AnnotatorRecord> table(std::size_t n_pairs) {
  Rng rng(2);
  std::vector<AnnotatorRecord> recs;
  for (std::size_t p = 0; p < n_pairs; ++p) {
    auto truth = static_cast<std::uint8_t>(rng.below(16));
    for (int a = 0; a < 5; ++a) {
      AnnotatorRecord r{"a" + std::to_string(a), "p" + std::to_string(p), {}};
      if (rng.bernoulli(0.05)) {
        recs.push_back(r);
        continue;
      }
      r.labels.push_back({RelationId{truth}, rng.bernoulli(0.08)});
      if (rng.bernoulli(0.1)) {
        auto other = static_cast<std::uint8_t>(rng.below(16));
        if (other != truth) r.labels.push_back({RelationId{other}, false});
      }
      recs.push_back(r);
    }
  }
  return recs;
}
}  // namespace

static void BM_ComputeAgreements(benchmark::State& state) {
  auto recs = table(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(compute_agreements(recs, 3));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ComputeAgreements)->Arg(1000)->Arg(20000)->Unit(benchmark::kMillisecond);

static void BM_LabelStatistics(benchmark::State& state) {
  auto recs = table(20000);
  const auto& tax = Taxonomy::builtin();
  for (auto _ : state) benchmark::DoNotOptimize(label_statistics(recs, tax));
}
BENCHMARK(BM_LabelStatistics)->Unit(benchmark::kMillisecond);
