#include <benchmark/benchmark.h>

#include "relscope/featstore.hpp"
#include "relscope/pairgeom.hpp"
#include "relscope/proximity.hpp"
#include "relscope/random.hpp"

using namespace relscope;

static void BM_PoolProximity(benchmark::State& state) {
  Rng rng(3);
  ProximityTensor t{kProximityShape[0], kProximityShape[1], kProximityShape[2], {}};
  t.values.resize(static_cast<std::size_t>(t.channels) * t.height * t.width);
  for (auto& v : t.values) v = static_cast<float>(rng.normal());
  for (auto _ : state) benchmark::DoNotOptimize(pool_proximity(t));
  state.SetBytesProcessed(state.iterations() * static_cast<long>(t.values.size() * sizeof(float)));
}
BENCHMARK(BM_PoolProximity)->Unit(benchmark::kMicrosecond);

static void BM_GeomFeature(benchmark::State& state) {
  PersonPair p{"p", "ph", {"a", {120, 80, 40, 50}}, {"b", {300, 90, 35, 45}}, 640, 480};
  for (auto _ : state) {
    benchmark::DoNotOptimize(head_loc_scale_block(p));
    benchmark::DoNotOptimize(body_loc_scale_block(p));
  }
}
BENCHMARK(BM_GeomFeature);

static void BM_FuseAll(benchmark::State& state) {
  Rng rng(4);
  FeatureStore store(AttributeRegistry::full_scale());
  const std::size_t n = 64;
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < n; ++i) {
    ids.push_back("p" + std::to_string(i));
    for (auto k : all_kinds()) {
      std::vector<double> v(store.registry().dim(k));
      for (auto& x : v) x = rng.normal();
      store.put({ids.back(), k, std::move(v)});
    }
  }
  auto kinds = parse_kind_list("all");
  auto st = Standardizer::fit(store, ids, kinds);
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(fuse(store, ids[i++ % n], kinds, &st));
}
BENCHMARK(BM_FuseAll)->Unit(benchmark::kMicrosecond);
