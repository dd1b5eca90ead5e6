#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "relscope/pipeline.hpp"

namespace fs = std::filesystem;

namespace {
struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::vector<const char*> argv{"relscope"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int code = relscope::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path fresh(const std::string& name) {
  auto p = fs::temp_directory_path() / ("relscope-unit-cli-" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::map<std::string, std::string> tree(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = slurp(e.path());
  return files;
}
}  // namespace

TEST_CASE("usage errors exit 1") {
  auto r = run({"--no-such-flag"});
  CHECK(r.code == 1);
  CHECK(r.err.find("error") != std::string::npos);
  CHECK(run({"frobnicate"}).code == 1);
  CHECK(run({"agree"}).code == 1);
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("missing input files exit 2") {
  auto out = fresh("missing");
  CHECK(run({"--out", out.string(), "agree", "--annotations", "/nonexistent/ann.tsv"}).code == 2);
  CHECK(run({"--out", out.string(), "--taxonomy", "/nonexistent/tax.json", "stats", "--annotations", "x"}).code == 2);
}

TEST_CASE("synth twice gives identical trees") {
  auto a = fresh("synth-a"), b = fresh("synth-b");
  REQUIRE(run({"--seed", "7", "--out", a.string(), "synth", "--n-pairs", "160"}).code == 0);
  REQUIRE(run({"--seed", "7", "--out", b.string(), "synth", "--n-pairs", "160"}).code == 0);
  CHECK(tree(a) == tree(b));
}

TEST_CASE("agree on a noise-free corpus retains every pair") {
  auto dir = fresh("agree");
  REQUIRE(run({"--seed", "3", "--out", dir.string(), "synth", "--n-pairs", "160", "--epsilon", "0"}).code == 0);
  auto r = run({"--out", dir.string(), "agree", "--annotations", (dir / "annotations.tsv").string(), "--threshold", "3"});
  REQUIRE(r.code == 0);
  std::ifstream in(dir / "agreement.json");
  auto j = nlohmann::json::parse(in);
  CHECK(j["retained_fraction"].get<double>() == 1.0);
  CHECK(r.out.find("retained fraction: 1.0000") != std::string::npos);
}

TEST_CASE("malformed annotation file exits 1 with the line number") {
  auto dir = fresh("badann");
  fs::create_directories(dir);
  std::ofstream(dir / "ann.tsv") << "annotator_id\tpair_id\tlabels\na\tp1\tboss\n";
  auto r = run({"--out", dir.string(), "agree", "--annotations", (dir / "ann.tsv").string()});
  CHECK(r.code == 1);
  CHECK(r.err.find("line 2") != std::string::npos);
}

TEST_CASE("contrib reproduces the normalized points") {
  auto dir = fresh("contrib");
  fs::create_directories(dir);
  std::ofstream(dir / "acc.tsv") << "attribute\trelation\tdomain\nall\t57.2\t67.8\nbody_age\t31.0\t57.4\n";
  auto r = run({"--out", dir.string(), "contrib", "--table", (dir / "acc.tsv").string(), "--percent"});
  REQUIRE(r.code == 0);
  auto text = slurp(dir / "reports" / "contributions.tsv");
  CHECK(text.find("body_age\t0.84") != std::string::npos);
}
