#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "relscope/errors.hpp"
#include "relscope/pair.hpp"
#include "relscope/tsv.hpp"

using namespace relscope;
namespace fs = std::filesystem;

namespace {
PersonPair make(const std::string& id, BBox a = {10, 10, 20, 20}, BBox b = {50, 10, 20, 20}) {
  return {id, "photo", {"i1", a}, {"i2", b}, 200, 200};
}
fs::path tmp(const std::string& name) { return fs::temp_directory_path() / ("relscope-unit-" + name); }
}  // namespace

TEST_CASE("pair validation") {
  CHECK_NOTHROW(validate(make("p")));
  CHECK_THROWS_AS(validate(make("p", {10, 10, 0, 20})), InputError);
  CHECK_THROWS_AS(validate(make("p", {10, 10, 20, 20}, {250, 10, 20, 20})), InputError);
  auto same = make("p");
  same.b.identity_id = "i1";
  CHECK_THROWS_AS(validate(same), InputError);
  PairTable table;
  table.add(make("p"));
  CHECK_THROWS_AS(table.add(make("p")), InputError);
  CHECK(table.contains("p"));
  CHECK_THROWS(table.at("q"));
}

TEST_CASE("pair table round trip") {
  PairTable table;
  table.add(make("p1"));
  table.add(make("p2", {0, 0, 30, 40}, {100.5, 20.25, 10, 12}));
  write_pairs(tmp("pairs.tsv"), table);
  auto back = read_pairs(tmp("pairs.tsv"));
  REQUIRE(back.size() == 2);
  for (const auto& p : table) {
    const auto& q = back.at(p.pair_id);
    CHECK(q.a.head == p.a.head);
    CHECK(q.b.head == p.b.head);
    CHECK(q.a.identity_id == p.a.identity_id);
    CHECK(q.image_w == p.image_w);
  }
}

TEST_CASE("album index and id list round trip") {
  std::map<std::string, std::string> albums{{"ph1", "al1"}, {"ph2", "al1"}, {"ph3", "al2"}};
  write_album_index(tmp("albums.tsv"), albums);
  CHECK(read_album_index(tmp("albums.tsv")) == albums);
  std::vector<std::string> ids{"p3", "p1"};
  write_id_list(tmp("ids.txt"), ids);
  CHECK(read_id_list(tmp("ids.txt")) == ids);
}

TEST_CASE("missing files raise IoError and bad rows ParseError") {
  CHECK_THROWS_AS(read_pairs(tmp("does-not-exist.tsv")), IoError);
  std::ofstream(tmp("badpairs.tsv")) << "nonsense\theader\n1\t2\n";
  CHECK_THROWS_AS(read_pairs(tmp("badpairs.tsv")), ParseError);
}
