#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace relscope {

/// The 12 attribute categories, in registry (fusion) order.
enum class AttributeKind : std::uint8_t {
  head_age,
  head_gender,
  head_loc_scale,
  head_appearance,
  head_pose,
  face_emotion,
  body_age,
  body_gender,
  body_loc_scale,
  clothing,
  proximity,
  activity,
};

inline constexpr std::size_t kAttributeKindCount = 12;

std::span<const AttributeKind> all_kinds();
std::string_view kind_name(AttributeKind kind);
/// Throws NameError for an unknown name.
AttributeKind parse_kind(std::string_view name);
/// Comma-separated list or "all". Result is in registry order, deduplicated.
std::vector<AttributeKind> parse_kind_list(std::string_view list);
/// Registry order, duplicates removed.
std::vector<AttributeKind> canonical_kinds(std::span<const AttributeKind> kinds);

struct KindSpec {
  AttributeKind kind;
  /// Width of one pair's block in feature files.
  std::size_t dim = 0;
  /// Width of one person's attribute vector for kinds stored person A then
  /// person B; zero for pair-level kinds.
  std::size_t person_dim = 0;
  /// External model name, "geometry", or "synthetic".
  std::string source;
};

/// Fixed dimension per kind for one dataset.
class AttributeRegistry {
 public:
  /// Full-size widths: per-person age (6) and gender (2) plus derived
  /// pair slots, 14-wide loc & scale, appearance 2x40, pose 2x5, emotion
  /// 2x7, clothing 2x8, proximity 2500, activity 1024.
  static AttributeRegistry full_scale();

  /// Throws SpecError unless `specs` covers each kind exactly once with a
  /// positive dim.
  explicit AttributeRegistry(std::vector<KindSpec> specs);

  const KindSpec& spec(AttributeKind kind) const { return specs_[static_cast<std::size_t>(kind)]; }
  std::size_t dim(AttributeKind kind) const { return spec(kind).dim; }
  std::size_t total_dim(std::span<const AttributeKind> kinds) const;

  nlohmann::json to_json() const;
  static AttributeRegistry from_json(const nlohmann::json& j);

 private:
  std::array<KindSpec, kAttributeKindCount> specs_;
};

/// One attribute category's vector for one pair.
struct FeatureBlock {
  std::string pair_id;
  AttributeKind kind;
  std::vector<double> values;
};

/// Feature TSV with header `pair_id v0 ... v{dim-1}`. Every bad row is
/// reported in one ParseError.
std::map<std::string, std::vector<double>> read_feature_file(const std::filesystem::path& path,
                                                             std::size_t dim);
void write_feature_file(const std::filesystem::path& path, std::size_t dim,
                        const std::map<std::string, std::vector<double>>& rows);

/// Feature blocks for every kind, keyed by pair id. Read-only once loaded.
class FeatureStore {
 public:
  explicit FeatureStore(AttributeRegistry registry);

  /// Throws ShapeError for a wrong length, InputError for non-finite values
  /// or a duplicate (pair, kind).
  void put(FeatureBlock block);

  bool has(std::string_view pair_id, AttributeKind kind) const;
  /// Throws MissingFeatureError naming the pair and kind.
  const std::vector<double>& block(std::string_view pair_id, AttributeKind kind) const;
  const AttributeRegistry& registry() const { return registry_; }
  std::size_t block_count(AttributeKind kind) const;

  /// Manifest JSON: `{ "kinds": [ {name, dim, person_dim, source, file} ],
  /// "synthetic": bool }`. Files are resolved relative to the manifest.
  /// Kinds without a file entry stay empty.
  static FeatureStore load(const std::filesystem::path& manifest);
  /// Writes `<dir>/manifest.json` and one `<kind>.tsv` per non-empty kind.
  void save(const std::filesystem::path& dir, bool synthetic) const;

 private:
  AttributeRegistry registry_;
  std::array<std::map<std::string, std::vector<double>, std::less<>>, kAttributeKindCount> blocks_;
};

enum class AgeClass : std::uint8_t { infant, child, young, middle_age, senior, unknown };
inline constexpr std::size_t kAgeClassCount = 6;
inline constexpr std::size_t kGenderClassCount = 2;  // male, female
inline constexpr std::size_t kPairAgeDim = 2 * kAgeClassCount + 3;
inline constexpr std::size_t kPairGenderDim = 2 * kGenderClassCount + 2;

/// `[age_a(6) age_b(6) smallAgeDiff middleAgeDiff largeAgeDiff]`. The
/// difference category comes from the ordinal gap of the two argmax
/// classes: 0-1 small, 2 middle, >=3 large; all three slots stay zero when
/// either argmax is `unknown`. Each distribution must be non-negative and
/// sum to 1 +- 1e-6 (InputError otherwise).
std::vector<double> derive_pair_age(std::span<const double> age_a, std::span<const double> age_b);

/// `[gender_a(2) gender_b(2) sameGender diffGender]`.
std::vector<double> derive_pair_gender(std::span<const double> gender_a,
                                       std::span<const double> gender_b);

/// Per-dimension z-score statistics fitted on the training split. Constant
/// dimensions are left untouched.
class Standardizer {
 public:
  struct Stats {
    std::vector<double> mean;
    std::vector<double> scale;
  };

  static Standardizer fit(const FeatureStore& store, std::span<const std::string> train_ids,
                          std::span<const AttributeKind> kinds);

  bool has(AttributeKind kind) const { return stats_[static_cast<std::size_t>(kind)].has_value(); }
  const Stats& stats(AttributeKind kind) const;
  void apply(AttributeKind kind, std::span<double> values) const;

  nlohmann::json to_json() const;
  static Standardizer from_json(const nlohmann::json& j);

 private:
  std::array<std::optional<Stats>, kAttributeKindCount> stats_;
};

struct FusedVector {
  std::string pair_id;
  std::vector<AttributeKind> kinds;
  std::vector<double> values;
  /// offsets[k] is where kinds[k] starts; offsets.back() == values.size().
  std::vector<std::size_t> offsets;

  std::size_t total_dim() const { return values.size(); }
  /// Throws MissingFeatureError when the kind was not fused.
  std::span<const double> slice(AttributeKind kind) const;
};

/// Concatenates the requested kinds in registry order, standardizing each
/// block when a standardizer is given (it must cover every requested kind).
FusedVector fuse(const FeatureStore& store, std::string_view pair_id,
                 std::span<const AttributeKind> kinds, const Standardizer* standardizer = nullptr);

}  // namespace relscope
