#pragma once

#include <bit>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace relscope {

struct DomainId {
  std::uint8_t index = 0;
  friend auto operator<=>(const DomainId&, const DomainId&) = default;
};

struct RelationId {
  std::uint8_t index = 0;
  friend auto operator<=>(const RelationId&, const RelationId&) = default;
};

/// Set of relations as a bitmask over relation indices.
class RelationSet {
 public:
  static constexpr std::size_t kCapacity = 64;

  RelationSet() = default;
  explicit RelationSet(std::uint64_t bits) : bits_(bits) {}
  RelationSet(std::initializer_list<RelationId> ids) {
    for (auto id : ids) insert(id);
  }

  void insert(RelationId r) { bits_ |= (std::uint64_t{1} << r.index); }
  bool contains(RelationId r) const { return (bits_ >> r.index) & 1U; }
  bool empty() const { return bits_ == 0; }
  std::size_t size() const { return static_cast<std::size_t>(std::popcount(bits_)); }
  std::uint64_t bits() const { return bits_; }

  /// Members in ascending index order.
  std::vector<RelationId> members() const;
  /// Lowest-index member; the set must be non-empty.
  RelationId lowest() const;

  RelationSet operator|(RelationSet o) const { return RelationSet(bits_ | o.bits_); }
  RelationSet operator&(RelationSet o) const { return RelationSet(bits_ & o.bits_); }
  friend bool operator==(const RelationSet&, const RelationSet&) = default;

  /// Orders sets by their ascending member lists, lexicographically.
  static bool lexicographic_less(RelationSet a, RelationSet b);

 private:
  std::uint64_t bits_ = 0;
};

/// Two-level label space: domains partition the relations. Relation indices
/// run domain by domain in manifest order. Immutable after construction.
class Taxonomy {
 public:
  struct DomainSpec {
    std::string name;
    std::vector<std::string> relations;
  };

  /// Throws SpecError when names repeat, a domain is empty, or the relation
  /// count exceeds RelationSet::kCapacity.
  Taxonomy(std::vector<DomainSpec> domains,
           std::map<std::string, std::string> aliases = {});

  /// The 5-domain, 16-relation label space used for PIPA.
  static const Taxonomy& builtin();

  /// `{ "domains": [ { "name": ..., "relations": [...] } ], "aliases": {...} }`
  /// The aliases object is optional.
  static Taxonomy from_json(const nlohmann::json& j);
  static Taxonomy load(const std::filesystem::path& path);
  nlohmann::json to_json() const;

  std::size_t domain_count() const { return domain_names_.size(); }
  std::size_t relation_count() const { return relation_names_.size(); }

  DomainId domain_of(RelationId r) const;
  std::span<const RelationId> relations_of(DomainId d) const;

  const std::string& relation_name(RelationId r) const;
  const std::string& domain_name(DomainId d) const;
  std::span<const std::string> relation_names() const { return relation_names_; }
  std::span<const std::string> domain_names() const { return domain_names_; }

  /// Case-insensitive, whitespace-tolerant lookup against canonical names and
  /// the alias table. Throws NameError naming the nearest candidates.
  RelationId parse_relation(std::string_view s) const;
  DomainId parse_domain(std::string_view s) const;

  /// Relations that are the only member of their domain. Leaving one out of
  /// training would leave its domain without examples.
  std::vector<RelationId> sole_relations() const;

  /// Distinct domains covered by a relation set.
  std::vector<DomainId> domains_of(RelationSet s) const;

  const std::map<std::string, std::string>& aliases() const { return aliases_; }

 private:
  std::vector<std::string> domain_names_;
  std::vector<std::string> relation_names_;
  std::vector<DomainId> relation_domain_;
  std::vector<std::vector<RelationId>> domain_relations_;
  std::map<std::string, std::string> aliases_;
  std::map<std::string, RelationId> lookup_;
};

/// Lowercase, trim, and collapse internal whitespace runs to one space.
std::string normalize_label(std::string_view s);

}  // namespace relscope
