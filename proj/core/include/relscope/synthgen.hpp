#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "relscope/annotations.hpp"
#include "relscope/featstore.hpp"
#include "relscope/pair.hpp"
#include "relscope/taxonomy.hpp"

namespace relscope {

struct SynthSpec {
  std::size_t n_pairs = 800;
  std::size_t n_annotators = 5;
  std::size_t n_albums = 40;
  std::size_t photos_per_album = 10;
  std::size_t identities_per_album = 8;
  /// People visible in one photo, drawn from the album's identities.
  std::size_t persons_per_photo = 4;
  /// Albums whose pairs form the preserved test list.
  std::size_t n_test_albums = 10;
  double image_w = 640.0;
  double image_h = 480.0;
  /// Pair share per relation, in taxonomy order. Empty means balanced.
  std::vector<double> proportions;
  /// Probability that an annotator departs from the true relation. A noisy
  /// answer is a skip, a random other relation, or the true relation plus
  /// another, each with probability 1/3.
  double epsilon = 0.1;
  /// Probability that a reported label carries the maybe flag.
  double maybe_rate = 0.08;
  /// Minimum distance between relation prototypes in units of sigma.
  double delta = 10.0;
  double sigma = 1.0;
  /// Pair-level widths of the Gaussian kinds. The age, gender and loc &
  /// scale kinds keep their fixed widths.
  std::map<AttributeKind, std::size_t> dims{
      {AttributeKind::head_appearance, 16}, {AttributeKind::head_pose, 6},
      {AttributeKind::face_emotion, 8},     {AttributeKind::clothing, 12},
      {AttributeKind::proximity, 24},       {AttributeKind::activity, 24},
  };
  std::uint64_t seed = 0;

  /// Throws SpecError for an infeasible spec.
  void validate(const Taxonomy& taxonomy) const;

  nlohmann::json to_json() const;
  /// Missing keys keep their defaults.
  static SynthSpec from_json(const nlohmann::json& j);
};

/// Kinds drawn from relation prototypes, in registry order.
std::vector<AttributeKind> gaussian_kinds();

/// Registry for a synthetic corpus: fixed widths for age, gender and
/// geometry, `spec.dims` for the rest.
AttributeRegistry synth_registry(const SynthSpec& spec);

struct SynthCorpus {
  PairTable pairs;
  std::vector<AnnotatorRecord> annotations;
  std::map<std::string, std::string> albums;
  std::vector<std::string> test_pairs;
  FeatureStore features;
  /// True relation per pair, in pair order.
  std::vector<RelationId> relations;
  /// Every latent draw: spec, prototypes, per-pair relation, ages, genders,
  /// annotator outcomes.
  nlohmann::json truth;
};

SynthCorpus generate(const SynthSpec& spec, const Taxonomy& taxonomy);

struct CorpusPaths {
  std::filesystem::path pairs, annotations, albums, test_pairs, features, truth;
};

CorpusPaths corpus_paths(const std::filesystem::path& dir);

/// pairs.tsv, annotations.tsv, albums.tsv, test_pairs.tsv,
/// features/manifest.json with one TSV per kind, truth.json.
CorpusPaths write_corpus(const std::filesystem::path& dir, const SynthCorpus& corpus,
                         const Taxonomy& taxonomy);

}  // namespace relscope
