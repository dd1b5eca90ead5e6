#include <doctest.h>

#include <algorithm>
#include <set>

#include "relscope/errors.hpp"
#include "relscope/taxonomy.hpp"

using namespace relscope;

namespace {
const Taxonomy& t() { return Taxonomy::builtin(); }
std::string domain_of(const char* rel) { return t().domain_name(t().domain_of(t().parse_relation(rel))); }
}  // namespace

TEST_CASE("builtin taxonomy has 5 domains partitioning 16 relations") {
  CHECK(t().domain_count() == 5);
  CHECK(t().relation_count() == 16);
  std::set<int> seen;
  std::size_t total = 0;
  for (std::uint8_t d = 0; d < 5; ++d) {
    for (auto r : t().relations_of(DomainId{d})) {
      CHECK(seen.insert(r.index).second);
      CHECK(t().domain_of(r) == DomainId{d});
    }
    total += t().relations_of(DomainId{d}).size();
  }
  CHECK(total == 16);
  std::set<std::string> names(t().relation_names().begin(), t().relation_names().end());
  CHECK(names.size() == 16);
}

TEST_CASE("domain_of examples") {
  CHECK(domain_of("mother-child") == "Attachment");
  CHECK(domain_of("leader-subordinate") == "Hierarchical power");
  for (std::uint8_t r = 0; r < 16; ++r) {
    auto rs = t().relations_of(t().domain_of(RelationId{r}));
    CHECK(std::find(rs.begin(), rs.end(), RelationId{r}) != rs.end());
  }
}

TEST_CASE("relations_of examples") {
  auto mating = t().relations_of(t().parse_domain("Mating"));
  REQUIRE(mating.size() == 1);
  CHECK(t().relation_name(mating[0]) == "lovers/spouses");
  std::set<std::string> att;
  for (auto r : t().relations_of(t().parse_domain("attachment"))) att.insert(t().relation_name(r));
  for (const char* n : {"mother-child", "father-child", "grandma-grandchild"}) CHECK(att.count(n) == 1);
}

TEST_CASE("parse_relation normalizes and rejects") {
  CHECK(t().parse_relation("Mother-Child ") == t().parse_relation("mother-child"));
  CHECK(t().relation_name(t().parse_relation("  LOVERS/spouses")) == "lovers/spouses");
  CHECK_THROWS_AS(t().parse_relation("boss"), NameError);
  try {
    t().parse_relation("mother-chlid");
    FAIL("expected NameError");
  } catch (const NameError& e) {
    CHECK(std::string(e.what()).find("mother-child") != std::string::npos);
  }
  for (auto name : t().relation_names()) CHECK(t().relation_name(t().parse_relation(name)) == name);
}

TEST_CASE("sole relations and domains_of") {
  auto sole = t().sole_relations();
  REQUIRE(sole.size() == 1);
  CHECK(t().relation_name(sole[0]) == "lovers/spouses");
  RelationSet s{t().parse_relation("friends"), t().parse_relation("colleagues"), t().parse_relation("siblings")};
  CHECK(t().domains_of(s).size() == 2);
}

TEST_CASE("RelationSet ordering and members") {
  RelationSet a{RelationId{3}, RelationId{1}};
  CHECK(a.size() == 2);
  CHECK(a.lowest() == RelationId{1});
  CHECK(a.members() == std::vector<RelationId>{RelationId{1}, RelationId{3}});
  CHECK(RelationSet::lexicographic_less(RelationSet{RelationId{1}, RelationId{3}}, RelationSet{RelationId{2}}));
  CHECK(RelationSet::lexicographic_less(RelationSet{RelationId{1}}, RelationSet{RelationId{1}, RelationId{2}}));
  CHECK_FALSE(RelationSet::lexicographic_less(a, a));
}

TEST_CASE("taxonomy manifest round trip and validation") {
  auto j = t().to_json();
  auto back = Taxonomy::from_json(j);
  CHECK(back.to_json() == j);
  CHECK(back.relation_count() == 16);
  using Specs = std::vector<Taxonomy::DomainSpec>;
  CHECK_THROWS_AS(Taxonomy(Specs{{"A", {"x"}}, {"B", {"x"}}}), SpecError);
  CHECK_THROWS_AS(Taxonomy(Specs{{"A", {}}}), SpecError);
  Taxonomy custom(Specs{{"Work", {"boss-employee", "peers"}}, {"Home", {"partners"}}}, {{"boss", "boss-employee"}});
  CHECK(custom.relation_name(custom.parse_relation("Boss")) == "boss-employee");
}

TEST_CASE("normalize_label") {
  CHECK(normalize_label("  Dance   Team  members ") == "dance team members");
}
