#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <set>

#include "oracles.hpp"
#include "relscope/errors.hpp"
#include "relscope/splits.hpp"
#include "relscope/synthgen.hpp"

using namespace relscope;

namespace {
const Taxonomy& t() { return Taxonomy::builtin(); }

struct Corpus {
  SynthCorpus synth;
  std::vector<GroundTruth> truth;
};

Corpus corpus(std::uint64_t seed, std::size_t n_pairs = 400) {
  SynthSpec spec;
  spec.seed = seed;
  spec.n_pairs = n_pairs;
  spec.epsilon = 0.0;
  auto synth = generate(spec, t());
  auto truth = consistency_filter(compute_agreements(synth.annotations).results, 3, t());
  return {std::move(synth), std::move(truth)};
}

GroundTruth gt(const std::string& id, const char* rel) {
  auto r = t().parse_relation(rel);
  return {id, RelationSet{r}, r, t().domain_of(r), false, 5};
}
}  // namespace

TEST_CASE("AC split invariants and determinism") {
  auto c = corpus(3);
  auto m = make_ac_split(c.truth, c.synth.albums, c.synth.test_pairs, 8, 17);
  CHECK(oracle::check_ac(m, c.truth, c.synth.albums, c.synth.test_pairs, 8).empty());
  auto again = make_ac_split(c.truth, c.synth.albums, c.synth.test_pairs, 8, 17);
  CHECK(to_json(m, t()) == to_json(again, t()));
  CHECK(m.test == c.synth.test_pairs);
}

TEST_CASE("three-album corpus with one validation album") {
  std::vector<GroundTruth> truth;
  std::map<std::string, std::string> albums;
  const char* rels[] = {"friends", "colleagues", "siblings"};
  for (int i = 0; i < 12; ++i) {
    auto id = "p" + std::to_string(i);
    truth.push_back(gt(id, rels[i % 3]));
    albums[id] = "al" + std::to_string(i % 3);
  }
  std::vector<std::string> test{"p0", "p4"};
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto m = make_ac_split(truth, albums, test, 1, seed);
    CHECK(oracle::check_ac(m, truth, albums, test, 1).empty());
    std::set<std::string> val_albums;
    for (const auto& id : m.val) val_albums.insert(albums.at(id));
    CHECK(val_albums.size() == 1);
    std::size_t in_album = 0;
    for (const auto& [id, al] : albums)
      if (al == *val_albums.begin() && id != "p0" && id != "p4") ++in_album;
    CHECK(m.val.size() == in_album);
  }
}

TEST_CASE("AC split errors") {
  std::vector<GroundTruth> truth{gt("p1", "friends"), gt("p2", "friends")};
  std::map<std::string, std::string> albums{{"p1", "a"}, {"p2", "b"}};
  std::vector<std::string> none;
  CHECK_THROWS_AS(make_ac_split(truth, albums, none, 8, 0), SplitError);
  std::vector<std::string> unknown{"p9"};
  CHECK_THROWS_AS(make_ac_split(truth, albums, unknown, 1, 0), SplitError);
  std::map<std::string, std::string> partial{{"p1", "a"}};
  CHECK_THROWS_AS(make_ac_split(truth, partial, none, 1, 0), SplitError);
}

TEST_CASE("SR split invariants") {
  auto c = corpus(4);
  auto splits = make_sr_splits(c.truth, c.synth.pairs, t(), 5);
  CHECK(splits.size() == 15);
  CHECK(oracle::check_sr(splits, c.truth, c.synth.pairs, t()).empty());
  auto ts = t().parse_relation("teacher-student");
  auto it = std::find_if(splits.begin(), splits.end(),
                         [&](const SrSplit& s) { return s.manifest.held_out == ts; });
  REQUIRE(it != splits.end());
  std::set<std::string> test(it->manifest.test.begin(), it->manifest.test.end());
  for (const auto& g : c.truth) {
    CHECK((g.labels.contains(ts) == (test.count(g.pair_id) == 1)));
  }
  auto again = make_sr_splits(c.truth, c.synth.pairs, t(), 5);
  for (std::size_t i = 0; i < splits.size(); ++i)
    CHECK(to_json(splits[i].manifest, t()) == to_json(again[i].manifest, t()));
  for (const auto& s : splits) CHECK(s.manifest.name.rfind("sr-", 0) == 0);
}

TEST_CASE("SR split names a relation with no pairs") {
  auto c = corpus(5);
  auto lost = t().parse_relation("trainer-trainee");
  std::vector<GroundTruth> pruned;
  for (const auto& g : c.truth)
    if (!g.labels.contains(lost)) pruned.push_back(g);
  try {
    make_sr_splits(pruned, c.synth.pairs, t(), 0);
    FAIL("expected SplitError");
  } catch (const SplitError& e) {
    CHECK(std::string(e.what()).find("trainer-trainee") != std::string::npos);
  }
}

TEST_CASE("identity folds are balanced") {
  std::map<std::string, std::size_t> counts;
  for (int i = 0; i < 53; ++i) counts["id" + std::to_string(i)] = 1 + i % 7;
  auto folds = assign_identity_folds(counts, 10, 3);
  CHECK(folds.size() == counts.size());
  std::vector<std::size_t> sizes(10, 0);
  for (auto& [id, f] : folds) {
    REQUIRE(f < 10);
    ++sizes[f];
  }
  auto [lo, hi] = std::minmax_element(sizes.begin(), sizes.end());
  CHECK(*hi - *lo <= 1);
}

TEST_CASE("manifest JSON round trip") {
  auto c = corpus(6, 200);
  auto splits = make_sr_splits(c.truth, c.synth.pairs, t(), 1);
  auto path = std::filesystem::temp_directory_path() / "relscope-unit-manifest.json";
  save_manifest(path, splits[0].manifest, t());
  auto back = load_manifest(path, t());
  CHECK(to_json(back, t()) == to_json(splits[0].manifest, t()));
  CHECK(back.held_out == splits[0].manifest.held_out);
}
