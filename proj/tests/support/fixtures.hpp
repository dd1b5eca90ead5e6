// Hand-built annotation tables shared by unit and acceptance tests.
#pragma once

#include <string>
#include <vector>

#include "relscope/annotations.hpp"
#include "relscope/taxonomy.hpp"

namespace fixture {

using Labels = std::vector<std::string>;  // empty = skip

std::vector<relscope::AnnotatorRecord> table(const std::string& pair_id,
                                             const std::vector<Labels>& answers,
                                             const relscope::Taxonomy& taxonomy);

/// The four photo scenarios of the agreement figure, expected agr 5, 3, 1, 2.
struct Scenario {
  std::string name;
  std::vector<relscope::AnnotatorRecord> records;
  int expected_agr;
};
std::vector<Scenario> agreement_scenarios(const relscope::Taxonomy& taxonomy);

/// 1000 pairs x 5 annotators built so that the labels-per-record,
/// relations-per-pair and agr marginals round to the published
/// 92.3/7.5/0.3, 53/38.8/7.4/0.8 and 42/19.9/20.7 percent.
std::vector<relscope::AnnotatorRecord> published_marginals(const relscope::Taxonomy& taxonomy);

}  // namespace fixture
