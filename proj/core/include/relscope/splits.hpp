#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "relscope/annotations.hpp"
#include "relscope/pair.hpp"
#include "relscope/taxonomy.hpp"

namespace relscope {

enum class SplitKind { ac, sr };

struct SplitManifest {
  std::string name;
  SplitKind kind = SplitKind::ac;
  std::optional<RelationId> held_out;  // SR only
  std::uint64_t seed = 0;
  std::vector<std::string> train;
  std::vector<std::string> val;
  std::vector<std::string> test;
  /// SR only: pairs dropped because their identities straddle train and val.
  std::vector<std::string> discarded;
};

/// `{name, kind, held_out, seed, train, val, test, discarded}`; held_out is
/// a relation name or null.
nlohmann::json to_json(const SplitManifest& m, const Taxonomy& taxonomy);
SplitManifest manifest_from_json(const nlohmann::json& j, const Taxonomy& taxonomy);
void save_manifest(const std::filesystem::path& path, const SplitManifest& m, const Taxonomy& taxonomy);
SplitManifest load_manifest(const std::filesystem::path& path, const Taxonomy& taxonomy);

inline constexpr std::size_t kDefaultValAlbums = 8;
inline constexpr std::size_t kDefaultFolds = 10;

/// All-class split. The test list is kept as given; the remaining ground
/// truth pairs are split by album: every pair of `n_val_albums` seed-chosen
/// albums goes to validation, the rest to training. Throws SplitError when
/// the test list is not a subset of the ground truth, a remaining pair has no
/// album, or fewer than `n_val_albums` albums remain.
SplitManifest make_ac_split(std::span<const GroundTruth> truth,
                            const std::map<std::string, std::string>& album_index,
                            std::span<const std::string> preserved_test,
                            std::size_t n_val_albums = kDefaultValAlbums, std::uint64_t seed = 0);

struct SrSplit {
  SplitManifest manifest;
  /// Distinct identities per fold, before discarding.
  std::vector<std::size_t> fold_identity_counts;
  std::size_t val_fold = 0;
};

/// Leave-one-relation-out splits, one per relation except those that are
/// alone in their domain (those always stay in training). For each held-out
/// relation r, pairs whose label set contains r form the test set. The
/// identities of the remaining pairs are dealt into `n_folds` folds (largest
/// pair count first, each to the fold with fewest identities); one
/// seed-chosen fold is validation. A pair whose identities fall on both
/// sides is discarded, as is any validation pair sharing an identity with a
/// training pair. Manifest k uses seed + k. Throws SplitError naming any
/// relation with no pairs.
std::vector<SrSplit> make_sr_splits(std::span<const GroundTruth> truth, const PairTable& pairs,
                                    const Taxonomy& taxonomy, std::uint64_t seed = 0,
                                    std::size_t n_folds = kDefaultFolds);

/// Greedy identity balancing, exposed for testing. Returns identity -> fold.
std::map<std::string, std::size_t> assign_identity_folds(
    const std::map<std::string, std::size_t>& identity_pair_counts, std::size_t n_folds,
    std::uint64_t seed);

}  // namespace relscope
