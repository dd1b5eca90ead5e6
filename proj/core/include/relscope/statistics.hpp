#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "relscope/annotations.hpp"

namespace relscope {

/// Label statistics over an annotation table. Counts are kept raw; the
/// fraction helpers define the denominators.
struct StatisticsReport {
  std::size_t n_records = 0;
  std::size_t n_labelled_records = 0;  // non-skipped
  std::size_t n_label_marks = 0;
  std::size_t n_maybe_marks = 0;
  std::size_t n_records_with_maybe = 0;
  std::size_t n_pairs = 0;          // pairs with at least one record
  std::size_t n_skipped_pairs = 0;  // every record a skip

  /// Labels per non-skipped record -> record count.
  std::map<int, std::size_t> labels_per_record;
  /// Distinct relations named across all annotators -> pair count (pairs
  /// with at least one non-skipped record).
  std::map<int, std::size_t> relations_per_pair;
  /// agr -> pair count.
  std::map<int, std::size_t> agr_counts;

  /// Per consistency level c (index c-1): pairs with agr >= c.
  struct Level {
    int consistency = 0;
    std::size_t pairs = 0;
    std::size_t photos = 0;      // zero unless a pair table was given
    std::size_t identities = 0;  // zero unless a pair table was given
    std::vector<std::size_t> relation_pairs;  // by primary relation
    std::vector<std::size_t> domain_pairs;    // sum over each domain's relations
  };
  std::vector<Level> levels;

  double labels_per_record_fraction(int k) const;
  double relations_per_pair_fraction(int k) const;
  /// Over all pairs, skipped ones included.
  double agr_fraction(int agr) const;
  double skipped_fraction() const;
  double maybe_fraction_of_marks() const;
  double maybe_fraction_of_records() const;
  /// Fraction of all pairs with agr >= threshold.
  double retained_fraction(int threshold) const;

  nlohmann::json to_json(const Taxonomy& taxonomy) const;
  /// Percentages printed with one decimal.
  std::string to_text(const Taxonomy& taxonomy) const;
};

/// `max_consistency` sets how many consistency levels are reported (the
/// annotator count, 5 for PIPA).
StatisticsReport label_statistics(std::span<const AnnotatorRecord> records,
                                  const Taxonomy& taxonomy, const PairTable* pairs = nullptr,
                                  int max_consistency = 5);

}  // namespace relscope
