#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "relscope/errors.hpp"
#include "relscope/featstore.hpp"
#include "relscope/random.hpp"

using namespace relscope;
namespace fs = std::filesystem;

namespace {
AttributeRegistry small_registry() {
  std::vector<KindSpec> specs;
  for (auto k : all_kinds()) specs.push_back({k, 2 + static_cast<std::size_t>(k) % 4, 0, "synthetic"});
  return AttributeRegistry(specs);
}

FeatureStore random_store(Rng& rng, int n_pairs) {
  FeatureStore store(small_registry());
  for (int i = 0; i < n_pairs; ++i)
    for (auto k : all_kinds()) {
      std::vector<double> v(store.registry().dim(k));
      for (auto& x : v) x = rng.uniform(-5, 20) + 3.0 * rng.normal();
      store.put({"p" + std::to_string(i), k, v});
    }
  return store;
}

std::vector<double> dist(std::initializer_list<double> v) { return v; }
std::vector<double> onehot_age(AgeClass c) {
  std::vector<double> v(kAgeClassCount, 0.0);
  v[static_cast<std::size_t>(c)] = 1.0;
  return v;
}
}  // namespace

TEST_CASE("kind names round trip") {
  for (auto k : all_kinds()) CHECK(parse_kind(kind_name(k)) == k);
  CHECK_THROWS_AS(parse_kind("haircut"), NameError);
  auto l = parse_kind_list("activity,head_age,activity");
  CHECK(l == std::vector<AttributeKind>{AttributeKind::head_age, AttributeKind::activity});
  CHECK(parse_kind_list("all").size() == kAttributeKindCount);
}

TEST_CASE("registry validation and full scale") {
  auto r = AttributeRegistry::full_scale();
  CHECK(r.dim(AttributeKind::head_loc_scale) == 14);
  CHECK(r.dim(AttributeKind::proximity) == 2500);
  CHECK(r.dim(AttributeKind::activity) == 1024);
  CHECK(r.dim(AttributeKind::head_age) == kPairAgeDim);
  CHECK(r.dim(AttributeKind::body_gender) == kPairGenderDim);
  CHECK(AttributeRegistry::from_json(r.to_json()).to_json() == r.to_json());
  CHECK_THROWS_AS(AttributeRegistry({{AttributeKind::head_age, 3, 0, "x"}}), SpecError);
}

TEST_CASE("derive_pair_age examples") {
  auto big = derive_pair_age(onehot_age(AgeClass::senior), onehot_age(AgeClass::child));
  REQUIRE(big.size() == kPairAgeDim);
  CHECK(big[12] == 0.0);
  CHECK(big[13] == 0.0);
  CHECK(big[14] == 1.0);
  auto small = derive_pair_age(onehot_age(AgeClass::young), onehot_age(AgeClass::young));
  CHECK(small[12] == 1.0);
  CHECK(small[14] == 0.0);
  auto mid = derive_pair_age(onehot_age(AgeClass::young), onehot_age(AgeClass::infant));
  CHECK(mid[13] == 1.0);
  auto unk = derive_pair_age(onehot_age(AgeClass::unknown), onehot_age(AgeClass::young));
  CHECK(unk[12] + unk[13] + unk[14] == 0.0);
  CHECK(std::equal(unk.begin(), unk.begin() + 6, onehot_age(AgeClass::unknown).begin()));
  CHECK_THROWS_AS(derive_pair_age(dist({0.5, 0.6, 0, 0, 0, 0}), onehot_age(AgeClass::young)), InputError);
  CHECK_THROWS_AS(derive_pair_age(dist({1, 0}), onehot_age(AgeClass::young)), InputError);
}

TEST_CASE("derive_pair_gender") {
  auto same = derive_pair_gender(dist({0.9, 0.1}), dist({0.7, 0.3}));
  REQUIRE(same.size() == kPairGenderDim);
  CHECK(same[4] == 1.0);
  CHECK(same[5] == 0.0);
  auto diff = derive_pair_gender(dist({0.9, 0.1}), dist({0.2, 0.8}));
  CHECK(diff[4] == 0.0);
  CHECK(diff[5] == 1.0);
  auto swapped = derive_pair_gender(dist({0.2, 0.8}), dist({0.9, 0.1}));
  CHECK(swapped[4] == diff[4]);
  CHECK(swapped[5] == diff[5]);
}

TEST_CASE("singleton fusion is exactly the standardized block") {
  Rng rng(44);
  auto store = random_store(rng, 10);
  std::vector<std::string> ids;
  for (int i = 0; i < 10; ++i) ids.push_back("p" + std::to_string(i));
  std::vector<AttributeKind> kinds{AttributeKind::body_age};
  auto st = Standardizer::fit(store, ids, kinds);
  auto f = fuse(store, "p3", kinds, &st);
  auto b = store.block("p3", AttributeKind::body_age);
  st.apply(AttributeKind::body_age, b);
  CHECK(f.values == b);
  auto all = parse_kind_list("all");
  CHECK(fuse(store, "p3", all).total_dim() == store.registry().total_dim(all));
}

TEST_CASE("store rejects bad blocks") {
  FeatureStore store(small_registry());
  auto dim = store.registry().dim(AttributeKind::clothing);
  CHECK_THROWS_AS(store.put({"p", AttributeKind::clothing, std::vector<double>(dim + 1)}), ShapeError);
  std::vector<double> v(dim, 0.0);
  v[0] = NAN;
  CHECK_THROWS_AS(store.put({"p", AttributeKind::clothing, v}), InputError);
  store.put({"p", AttributeKind::clothing, std::vector<double>(dim)});
  CHECK_THROWS_AS(store.put({"p", AttributeKind::clothing, std::vector<double>(dim)}), InputError);
  CHECK_THROWS_AS(store.block("q", AttributeKind::clothing), MissingFeatureError);
  try {
    store.block("q", AttributeKind::clothing);
  } catch (const MissingFeatureError& e) {
    std::string msg = e.what();
    CHECK(msg.find("q") != std::string::npos);
    CHECK(msg.find("clothing") != std::string::npos);
  }
}

TEST_CASE("standardized train features have zero mean and unit variance") {
  Rng rng(41);
  auto store = random_store(rng, 60);
  std::vector<std::string> train;
  for (int i = 0; i < 40; ++i) train.push_back("p" + std::to_string(i));
  auto kinds = parse_kind_list("all");
  auto st = Standardizer::fit(store, train, kinds);
  for (auto k : kinds) {
    auto dim = store.registry().dim(k);
    for (std::size_t d = 0; d < dim; ++d) {
      double sum = 0, sq = 0;
      for (const auto& id : train) {
        auto v = store.block(id, k);
        st.apply(k, v);
        sum += v[d];
        sq += v[d] * v[d];
      }
      double mean = sum / train.size();
      CHECK(std::abs(mean) < 1e-9);
      CHECK(std::abs(sq / train.size() - mean * mean - 1.0) < 1e-6);
    }
  }
  auto back = Standardizer::from_json(st.to_json());
  CHECK(back.to_json() == st.to_json());
}

TEST_CASE("constant dimensions pass through") {
  FeatureStore store(small_registry());
  auto dim = store.registry().dim(AttributeKind::activity);
  for (int i = 0; i < 5; ++i) store.put({"p" + std::to_string(i), AttributeKind::activity, std::vector<double>(dim, 7.0)});
  std::vector<std::string> ids{"p0", "p1", "p2", "p3", "p4"};
  std::vector<AttributeKind> kinds{AttributeKind::activity};
  auto st = Standardizer::fit(store, ids, kinds);
  std::vector<double> v(dim, 7.0);
  st.apply(AttributeKind::activity, v);
  CHECK(v == std::vector<double>(dim, 7.0));
}

TEST_CASE("fuse then slice recovers each block") {
  Rng rng(42);
  auto store = random_store(rng, 3);
  std::vector<AttributeKind> kinds{AttributeKind::proximity, AttributeKind::head_age, AttributeKind::clothing};
  auto f = fuse(store, "p1", kinds);
  CHECK(f.kinds == canonical_kinds(kinds));
  CHECK(f.total_dim() == store.registry().total_dim(kinds));
  CHECK(f.offsets.back() == f.values.size());
  for (auto k : kinds) {
    auto s = f.slice(k);
    const auto& b = store.block("p1", k);
    CHECK(std::equal(s.begin(), s.end(), b.begin(), b.end()));
  }
  CHECK_THROWS_AS(f.slice(AttributeKind::activity), MissingFeatureError);
  CHECK_THROWS_AS(fuse(store, "nope", kinds), MissingFeatureError);
}

TEST_CASE("store save and load round trip") {
  Rng rng(43);
  auto store = random_store(rng, 4);
  auto dir = fs::temp_directory_path() / "relscope-unit-store";
  fs::remove_all(dir);
  store.save(dir, true);
  auto back = FeatureStore::load(dir / "manifest.json");
  for (auto k : all_kinds())
    for (int i = 0; i < 4; ++i) {
      auto id = "p" + std::to_string(i);
      CHECK(back.block(id, k) == store.block(id, k));
    }
}
