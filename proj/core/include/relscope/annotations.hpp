#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "relscope/pair.hpp"
#include "relscope/taxonomy.hpp"

namespace relscope {

inline constexpr std::size_t kMaxLabelsPerRecord = 3;
inline constexpr int kDefaultConsistency = 3;

struct LabelMark {
  RelationId relation;
  bool maybe = false;
  friend bool operator==(const LabelMark&, const LabelMark&) = default;
};

/// One annotator's answer for one pair. An empty label list is a skip.
struct AnnotatorRecord {
  std::string annotator_id;
  std::string pair_id;
  std::vector<LabelMark> labels;

  bool skipped() const { return labels.empty(); }
  /// Relations named, with maybe flags dropped.
  RelationSet relation_set() const;
};

/// Throws InputError for more than kMaxLabelsPerRecord labels or a repeated
/// relation.
void validate(const AnnotatorRecord& record);

struct AgreementResult {
  std::string pair_id;
  /// Size of the largest group of annotators with identical relation sets.
  int agr = 0;
  /// The relation set of that largest group. When several groups tie for
  /// largest, the lexicographically smallest set is taken and `tied` is set.
  RelationSet majority;
  bool tied = false;
  /// `majority`, present iff agr reached the threshold used.
  std::optional<RelationSet> consensus;
  /// Non-skipped records that took part in grouping.
  int n_annotators = 0;
  /// All records for the pair, skips included.
  int n_records = 0;
};

/// Groups the non-skipped records by exact equality of their relation sets.
/// Returns nullopt when every record is a skip. All records must carry the
/// same pair_id (InputError otherwise); threshold must be >= 1.
std::optional<AgreementResult> compute_agreement(std::span<const AnnotatorRecord> records,
                                                 int threshold = kDefaultConsistency);

struct AgreementTable {
  std::vector<AgreementResult> results;  // ordered by pair_id
  std::vector<std::string> skipped;      // pairs skipped by every annotator
};

AgreementTable compute_agreements(std::span<const AnnotatorRecord> records,
                                  int threshold = kDefaultConsistency);

/// Records bucketed by pair_id, in pair_id order.
std::map<std::string, std::vector<AnnotatorRecord>> group_by_pair(
    std::span<const AnnotatorRecord> records);

struct GroundTruth {
  std::string pair_id;
  RelationSet labels;
  /// Lowest-index member of `labels`; the single-label training target.
  RelationId primary;
  DomainId domain;
  /// Set when `labels` spans more than one domain.
  bool cross_domain = false;
  int agr = 0;
};

/// Keeps the pairs with agr >= threshold. Throws InputError unless
/// threshold >= 1.
std::vector<GroundTruth> consistency_filter(std::span<const AgreementResult> results,
                                            int threshold, const Taxonomy& taxonomy);

/// Annotation TSV with header `annotator_id pair_id labels`; labels are
/// `;`-separated `relation[?]` entries, `?` marking maybe, empty for a skip.
/// When `pairs` is given, unknown pair ids are rejected. Every offending row
/// is reported in one ParseError.
std::vector<AnnotatorRecord> read_annotations(const std::filesystem::path& path,
                                              const Taxonomy& taxonomy,
                                              const PairTable* pairs = nullptr);
void write_annotations(const std::filesystem::path& path, std::span<const AnnotatorRecord> records,
                       const Taxonomy& taxonomy);
/// Parses one labels cell. Throws NameError / InputError.
std::vector<LabelMark> parse_label_cell(std::string_view cell, const Taxonomy& taxonomy);
std::string format_label_cell(std::span<const LabelMark> labels, const Taxonomy& taxonomy);

/// Ground-truth TSV: `pair_id agr labels primary domain cross_domain`.
void write_groundtruth(const std::filesystem::path& path, std::span<const GroundTruth> truth,
                       const Taxonomy& taxonomy);
std::vector<GroundTruth> read_groundtruth(const std::filesystem::path& path,
                                          const Taxonomy& taxonomy);

std::string format_relation_set(RelationSet s, const Taxonomy& taxonomy);

}  // namespace relscope
