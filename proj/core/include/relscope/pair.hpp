#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace relscope {

/// Axis-aligned box in pixels, top-left origin.
struct BBox {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  double area() const { return w * h; }
  double center_x() const { return x + 0.5 * w; }
  double center_y() const { return y + 0.5 * h; }
  friend bool operator==(const BBox&, const BBox&) = default;
};

struct PersonRef {
  std::string identity_id;
  BBox head;
};

struct PersonPair {
  std::string pair_id;
  std::string photo_id;
  PersonRef a;
  PersonRef b;
  double image_w = 0.0;
  double image_h = 0.0;
};

/// Throws InputError when identities coincide, a head has non-positive size,
/// or a head does not overlap the image.
void validate(const PersonPair& pair);

/// Pairs in file order with lookup by pair_id.
class PairTable {
 public:
  /// Validates the pair; duplicate pair ids throw InputError.
  void add(PersonPair pair);

  const PersonPair* find(std::string_view pair_id) const;
  const PersonPair& at(std::string_view pair_id) const;
  bool contains(std::string_view pair_id) const { return find(pair_id) != nullptr; }

  std::size_t size() const { return pairs_.size(); }
  bool empty() const { return pairs_.empty(); }
  auto begin() const { return pairs_.begin(); }
  auto end() const { return pairs_.end(); }

 private:
  std::vector<PersonPair> pairs_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Pairs TSV: `pair_id photo_id identity_a xa ya wa ha identity_b xb yb wb hb
/// image_w image_h`. All row errors are collected into one ParseError.
PairTable read_pairs(const std::filesystem::path& path);
void write_pairs(const std::filesystem::path& path, const PairTable& pairs);

/// Album index TSV: `pair_id album_id`.
std::map<std::string, std::string> read_album_index(const std::filesystem::path& path);
void write_album_index(const std::filesystem::path& path,
                       const std::map<std::string, std::string>& albums);

/// One-column id list TSV with header `pair_id`.
std::vector<std::string> read_id_list(const std::filesystem::path& path);
void write_id_list(const std::filesystem::path& path, const std::vector<std::string>& ids);

}  // namespace relscope
