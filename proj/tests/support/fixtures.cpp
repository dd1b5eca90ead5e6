#include "fixtures.hpp"

#include <cstdio>

namespace fixture {

using namespace relscope;

std::vector<AnnotatorRecord> table(const std::string& pair_id, const std::vector<Labels>& answers,
                                   const Taxonomy& taxonomy) {
  std::vector<AnnotatorRecord> out;
  for (std::size_t a = 0; a < answers.size(); ++a) {
    AnnotatorRecord r{"ann" + std::to_string(a + 1), pair_id, {}};
    for (const auto& name : answers[a]) r.labels.push_back({taxonomy.parse_relation(name), false});
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<Scenario> agreement_scenarios(const Taxonomy& t) {
  const Labels skip{};
  return {
      {"(a) family photo, all five say grandma-grandchild",
       table("fig2a", {{"grandma-grandchild"}, {"grandma-grandchild"}, {"grandma-grandchild"},
                       {"grandma-grandchild"}, {"grandma-grandchild"}}, t),
       5},
      {"(b) fourth annotator adds a second relation to colleagues",
       table("fig2b", {{"colleagues"}, {"colleagues"}, {"colleagues"}, {"colleagues", "friends"}, skip}, t),
       3},
      {"(c) ambiguous, five different answers",
       table("fig2c", {{"friends"}, {"siblings"}, {"colleagues"}, {"friends", "classmates"}, {"classmates"}}, t),
       1},
      {"(d) ambiguous, two annotators agree",
       table("fig2d", {{"friends"}, {"friends"}, {"lovers/spouses"}, {"siblings"}, {"friends", "siblings"}}, t),
       2},
  };
}

std::vector<AnnotatorRecord> published_marginals(const Taxonomy& t) {
  const Labels a{"friends"}, b{"siblings"}, c{"classmates"}, d{"colleagues"}, skip{};
  const Labels ab{"friends", "siblings"};
  const Labels abc{"friends", "siblings", "classmates"}, bcd{"siblings", "classmates", "colleagues"};
  struct Block {
    int count;
    std::vector<Labels> answers;
  };
  // Pair groups by number of distinct relations named:
  //   1 relation: 530 pairs, 2: 388, 3: 74, 4: 8.
  // agr: 5 -> 420, 4 -> 110 + 89 = 199, 3 -> 207, 2 -> the other 174.
  // Records: 4504 single, 364 double and 13 triple labels out of 4881.
  const std::vector<Block> blocks{
      {420, {a, a, a, a, a}},
      {110, {a, a, a, a, skip}},
      {89, {a, a, a, a, b}},
      {207, {a, a, a, b, ab}},
      {83, {a, a, b, b, ab}},
      {9, {a, a, b, b, skip}},
      {74, {a, b, c, a, {"siblings", "classmates"}}},
      {5, {abc, bcd, a, d, d}},
      {3, {abc, d, d, a, b}},
  };
  std::vector<AnnotatorRecord> out;
  int id = 0;
  for (const auto& blk : blocks)
    for (int k = 0; k < blk.count; ++k) {
      char name[16];
      std::snprintf(name, sizeof name, "m%04d", id++);
      auto recs = table(name, blk.answers, t);
      out.insert(out.end(), recs.begin(), recs.end());
    }
  return out;
}

}  // namespace fixture
