#include "relscope/pair.hpp"

#include <array>
#include <set>
#include <sstream>

#include "relscope/errors.hpp"
#include "relscope/tsv.hpp"

namespace relscope {

namespace {

constexpr std::array<std::string_view, 14> kPairsColumns{
    "pair_id", "photo_id", "identity_a", "xa", "ya", "wa", "ha",
    "identity_b", "xb", "yb", "wb", "hb", "image_w", "image_h"};

void throw_collected(const std::filesystem::path& path, const std::vector<std::string>& errors) {
  std::ostringstream os;
  os << path.string() << ": " << errors.size() << " invalid row(s)";
  for (const auto& e : errors) os << "\n  " << e;
  throw ParseError(os.str());
}

void check_head(const BBox& head, double image_w, double image_h, const char* who) {
  if (!(head.w > 0.0) || !(head.h > 0.0))
    throw InputError(std::string("head of person ") + who + " has non-positive size");
  const bool overlaps = head.x < image_w && head.y < image_h && head.x + head.w > 0.0 &&
                        head.y + head.h > 0.0;
  if (!overlaps) throw InputError(std::string("head of person ") + who + " lies outside the image");
}

}  // namespace

void validate(const PersonPair& pair) {
  if (pair.pair_id.empty()) throw InputError("empty pair_id");
  if (pair.a.identity_id == pair.b.identity_id)
    throw InputError("pair " + pair.pair_id + " joins identity " + pair.a.identity_id + " with itself");
  if (!(pair.image_w > 0.0) || !(pair.image_h > 0.0))
    throw InputError("pair " + pair.pair_id + " has non-positive image size");
  try {
    check_head(pair.a.head, pair.image_w, pair.image_h, "a");
    check_head(pair.b.head, pair.image_w, pair.image_h, "b");
  } catch (const InputError& e) {
    throw InputError("pair " + pair.pair_id + ": " + e.what());
  }
}

void PairTable::add(PersonPair pair) {
  validate(pair);
  if (index_.contains(pair.pair_id)) throw InputError("duplicate pair_id " + pair.pair_id);
  index_.emplace(pair.pair_id, pairs_.size());
  pairs_.push_back(std::move(pair));
}

const PersonPair* PairTable::find(std::string_view pair_id) const {
  const auto it = index_.find(std::string(pair_id));
  return it == index_.end() ? nullptr : &pairs_[it->second];
}

const PersonPair& PairTable::at(std::string_view pair_id) const {
  if (const auto* p = find(pair_id)) return *p;
  throw InputError("unknown pair_id " + std::string(pair_id));
}

PairTable read_pairs(const std::filesystem::path& path) {
  TsvReader reader(path, kPairsColumns);
  PairTable table;
  std::vector<std::string> errors;
  while (reader.next()) {
    const auto& f = reader.fields();
    const auto where = "line " + std::to_string(reader.line_number()) + ": ";
    if (f.size() != kPairsColumns.size()) {
      errors.push_back(where + "expected " + std::to_string(kPairsColumns.size()) + " columns, got " +
                       std::to_string(f.size()));
      continue;
    }
    try {
      PersonPair p;
      p.pair_id = std::string(f[0]);
      p.photo_id = std::string(f[1]);
      p.a.identity_id = std::string(f[2]);
      p.a.head = {parse_double(f[3]), parse_double(f[4]), parse_double(f[5]), parse_double(f[6])};
      p.b.identity_id = std::string(f[7]);
      p.b.head = {parse_double(f[8]), parse_double(f[9]), parse_double(f[10]), parse_double(f[11])};
      p.image_w = parse_double(f[12]);
      p.image_h = parse_double(f[13]);
      table.add(std::move(p));
    } catch (const InputError& e) {
      errors.push_back(where + e.what());
    }
  }
  if (!errors.empty()) throw_collected(path, errors);
  return table;
}

void write_pairs(const std::filesystem::path& path, const PairTable& pairs) {
  OutputFile file(path);
  auto& os = file.stream();
  for (std::size_t i = 0; i < kPairsColumns.size(); ++i) os << (i ? "\t" : "") << kPairsColumns[i];
  os << '\n';
  const auto box = [&os](const BBox& b) {
    os << '\t' << format_double(b.x) << '\t' << format_double(b.y) << '\t' << format_double(b.w)
       << '\t' << format_double(b.h);
  };
  for (const auto& p : pairs) {
    os << p.pair_id << '\t' << p.photo_id << '\t' << p.a.identity_id;
    box(p.a.head);
    os << '\t' << p.b.identity_id;
    box(p.b.head);
    os << '\t' << format_double(p.image_w) << '\t' << format_double(p.image_h) << '\n';
  }
  file.close();
}

std::map<std::string, std::string> read_album_index(const std::filesystem::path& path) {
  constexpr std::array<std::string_view, 2> kHeader{"pair_id", "album_id"};
  TsvReader reader(path, kHeader);
  std::map<std::string, std::string> out;
  std::vector<std::string> errors;
  while (reader.next()) {
    const auto& f = reader.fields();
    const auto where = "line " + std::to_string(reader.line_number()) + ": ";
    if (f.size() != 2 || f[0].empty() || f[1].empty()) {
      errors.push_back(where + "expected `pair_id<TAB>album_id`");
      continue;
    }
    if (!out.emplace(std::string(f[0]), std::string(f[1])).second)
      errors.push_back(where + "duplicate pair_id " + std::string(f[0]));
  }
  if (!errors.empty()) throw_collected(path, errors);
  return out;
}

void write_album_index(const std::filesystem::path& path,
                       const std::map<std::string, std::string>& albums) {
  OutputFile file(path);
  file.stream() << "pair_id\talbum_id\n";
  for (const auto& [pair, album] : albums) file.stream() << pair << '\t' << album << '\n';
  file.close();
}

std::vector<std::string> read_id_list(const std::filesystem::path& path) {
  constexpr std::array<std::string_view, 1> kHeader{"pair_id"};
  TsvReader reader(path, kHeader);
  std::vector<std::string> out;
  std::set<std::string> seen;
  std::vector<std::string> errors;
  while (reader.next()) {
    const auto id = std::string(reader.fields()[0]);
    if (!seen.insert(id).second)
      errors.push_back("line " + std::to_string(reader.line_number()) + ": duplicate pair_id " + id);
    else
      out.push_back(id);
  }
  if (!errors.empty()) throw_collected(path, errors);
  return out;
}

void write_id_list(const std::filesystem::path& path, const std::vector<std::string>& ids) {
  OutputFile file(path);
  file.stream() << "pair_id\n";
  for (const auto& id : ids) file.stream() << id << '\n';
  file.close();
}

}  // namespace relscope
