#include "relscope/annotations.hpp"

#include <algorithm>
#include <array>
#include <set>
#include <sstream>

#include "relscope/errors.hpp"
#include "relscope/tsv.hpp"

namespace relscope {

RelationSet AnnotatorRecord::relation_set() const {
  RelationSet s;
  for (const auto& m : labels) s.insert(m.relation);
  return s;
}

void validate(const AnnotatorRecord& record) {
  if (record.labels.size() > kMaxLabelsPerRecord)
    throw InputError("annotator " + record.annotator_id + " gave " +
                     std::to_string(record.labels.size()) + " labels to pair " + record.pair_id +
                     " (at most " + std::to_string(kMaxLabelsPerRecord) + ")");
  if (record.relation_set().size() != record.labels.size())
    throw InputError("annotator " + record.annotator_id + " repeated a relation for pair " +
                     record.pair_id);
}

std::optional<AgreementResult> compute_agreement(std::span<const AnnotatorRecord> records,
                                                 int threshold) {
  if (threshold < 1) throw InputError("consistency threshold must be >= 1");
  if (records.empty()) return std::nullopt;

  AgreementResult result;
  result.pair_id = records.front().pair_id;
  result.n_records = static_cast<int>(records.size());

  // Equivalence classes keyed by the relation set; maybe flags do not count.
  std::vector<std::pair<RelationSet, int>> groups;
  for (const auto& r : records) {
    if (r.pair_id != result.pair_id)
      throw InputError("compute_agreement mixes pairs " + result.pair_id + " and " + r.pair_id);
    if (r.skipped()) continue;
    ++result.n_annotators;
    const auto set = r.relation_set();
    auto it = std::find_if(groups.begin(), groups.end(),
                           [&](const auto& g) { return g.first == set; });
    if (it == groups.end())
      groups.emplace_back(set, 1);
    else
      ++it->second;
  }
  if (groups.empty()) return std::nullopt;

  for (const auto& [set, count] : groups) {
    if (count > result.agr) {
      result.agr = count;
      result.majority = set;
      result.tied = false;
    } else if (count == result.agr) {
      result.tied = true;
      if (RelationSet::lexicographic_less(set, result.majority)) result.majority = set;
    }
  }
  if (result.agr >= threshold) result.consensus = result.majority;
  return result;
}

std::map<std::string, std::vector<AnnotatorRecord>> group_by_pair(
    std::span<const AnnotatorRecord> records) {
  std::map<std::string, std::vector<AnnotatorRecord>> out;
  for (const auto& r : records) out[r.pair_id].push_back(r);
  return out;
}

AgreementTable compute_agreements(std::span<const AnnotatorRecord> records, int threshold) {
  AgreementTable table;
  for (const auto& [pair_id, group] : group_by_pair(records)) {
    if (auto res = compute_agreement(group, threshold))
      table.results.push_back(std::move(*res));
    else
      table.skipped.push_back(pair_id);
  }
  return table;
}

std::vector<GroundTruth> consistency_filter(std::span<const AgreementResult> results, int threshold,
                                            const Taxonomy& taxonomy) {
  if (threshold < 1) throw InputError("consistency threshold must be >= 1");
  std::vector<GroundTruth> out;
  for (const auto& r : results) {
    if (r.agr < threshold) continue;
    GroundTruth gt;
    gt.pair_id = r.pair_id;
    gt.labels = r.majority;
    gt.primary = r.majority.lowest();
    gt.domain = taxonomy.domain_of(gt.primary);
    gt.cross_domain = taxonomy.domains_of(r.majority).size() > 1;
    gt.agr = r.agr;
    out.push_back(std::move(gt));
  }
  return out;
}

std::vector<LabelMark> parse_label_cell(std::string_view cell, const Taxonomy& taxonomy) {
  std::vector<LabelMark> out;
  if (normalize_label(cell).empty()) return out;
  std::size_t start = 0;
  while (start <= cell.size()) {
    auto end = cell.find(';', start);
    if (end == std::string_view::npos) end = cell.size();
    auto entry = normalize_label(cell.substr(start, end - start));
    if (entry.empty()) throw InputError("empty label entry in '" + std::string(cell) + "'");
    LabelMark mark;
    if (entry.back() == '?') {
      mark.maybe = true;
      entry.pop_back();
    }
    mark.relation = taxonomy.parse_relation(entry);
    out.push_back(mark);
    start = end + 1;
  }
  return out;
}

std::string format_label_cell(std::span<const LabelMark> labels, const Taxonomy& taxonomy) {
  std::string out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (i) out += ';';
    out += taxonomy.relation_name(labels[i].relation);
    if (labels[i].maybe) out += '?';
  }
  return out;
}

std::string format_relation_set(RelationSet s, const Taxonomy& taxonomy) {
  std::string out;
  for (auto r : s.members()) {
    if (!out.empty()) out += ';';
    out += taxonomy.relation_name(r);
  }
  return out;
}

namespace {

void throw_collected(const std::filesystem::path& path, const std::vector<std::string>& errors) {
  std::ostringstream os;
  os << path.string() << ": " << errors.size() << " invalid row(s)";
  for (const auto& e : errors) os << "\n  " << e;
  throw ParseError(os.str());
}

}  // namespace

std::vector<AnnotatorRecord> read_annotations(const std::filesystem::path& path,
                                              const Taxonomy& taxonomy, const PairTable* pairs) {
  constexpr std::array<std::string_view, 3> kHeader{"annotator_id", "pair_id", "labels"};
  TsvReader reader(path, kHeader);
  std::vector<AnnotatorRecord> records;
  std::set<std::pair<std::string, std::string>> seen;
  std::vector<std::string> errors;
  while (reader.next()) {
    const auto& f = reader.fields();
    const auto where = "line " + std::to_string(reader.line_number()) + ": ";
    if (f.size() < 2 || f.size() > 3) {
      errors.push_back(where + "expected 3 columns, got " + std::to_string(f.size()));
      continue;
    }
    AnnotatorRecord rec;
    rec.annotator_id = std::string(f[0]);
    rec.pair_id = std::string(f[1]);
    if (rec.annotator_id.empty() || rec.pair_id.empty()) {
      errors.push_back(where + "empty annotator_id or pair_id");
      continue;
    }
    if (pairs && !pairs->contains(rec.pair_id)) {
      errors.push_back(where + "unknown pair_id " + rec.pair_id);
      continue;
    }
    try {
      if (f.size() == 3) rec.labels = parse_label_cell(f[2], taxonomy);
      validate(rec);
    } catch (const Error& e) {
      errors.push_back(where + e.what());
      continue;
    }
    if (!seen.emplace(rec.annotator_id, rec.pair_id).second) {
      errors.push_back(where + "annotator " + rec.annotator_id + " labels pair " + rec.pair_id +
                       " twice");
      continue;
    }
    records.push_back(std::move(rec));
  }
  if (!errors.empty()) throw_collected(path, errors);
  return records;
}

void write_annotations(const std::filesystem::path& path, std::span<const AnnotatorRecord> records,
                       const Taxonomy& taxonomy) {
  OutputFile file(path);
  auto& os = file.stream();
  os << "annotator_id\tpair_id\tlabels\n";
  for (const auto& r : records)
    os << r.annotator_id << '\t' << r.pair_id << '\t' << format_label_cell(r.labels, taxonomy)
       << '\n';
  file.close();
}

void write_groundtruth(const std::filesystem::path& path, std::span<const GroundTruth> truth,
                       const Taxonomy& taxonomy) {
  OutputFile file(path);
  auto& os = file.stream();
  os << "pair_id\tagr\tlabels\tprimary\tdomain\tcross_domain\n";
  for (const auto& g : truth)
    os << g.pair_id << '\t' << g.agr << '\t' << format_relation_set(g.labels, taxonomy) << '\t'
       << taxonomy.relation_name(g.primary) << '\t' << taxonomy.domain_name(g.domain) << '\t'
       << (g.cross_domain ? 1 : 0) << '\n';
  file.close();
}

std::vector<GroundTruth> read_groundtruth(const std::filesystem::path& path,
                                          const Taxonomy& taxonomy) {
  constexpr std::array<std::string_view, 6> kHeader{"pair_id", "agr",    "labels",
                                                    "primary", "domain", "cross_domain"};
  TsvReader reader(path, kHeader);
  std::vector<GroundTruth> out;
  std::set<std::string> seen;
  std::vector<std::string> errors;
  while (reader.next()) {
    const auto& f = reader.fields();
    const auto where = "line " + std::to_string(reader.line_number()) + ": ";
    if (f.size() != 6) {
      errors.push_back(where + "expected 6 columns, got " + std::to_string(f.size()));
      continue;
    }
    try {
      GroundTruth g;
      g.pair_id = std::string(f[0]);
      g.agr = static_cast<int>(parse_int(f[1]));
      for (const auto& m : parse_label_cell(f[2], taxonomy)) g.labels.insert(m.relation);
      if (g.labels.empty()) throw InputError("empty label set");
      g.primary = taxonomy.parse_relation(f[3]);
      g.domain = taxonomy.parse_domain(f[4]);
      g.cross_domain = parse_int(f[5]) != 0;
      if (g.primary != g.labels.lowest() || g.domain != taxonomy.domain_of(g.primary))
        throw InputError("primary/domain columns disagree with the label set");
      if (!seen.insert(g.pair_id).second) throw InputError("duplicate pair_id " + g.pair_id);
      out.push_back(std::move(g));
    } catch (const Error& e) {
      errors.push_back(where + e.what());
    }
  }
  if (!errors.empty()) throw_collected(path, errors);
  return out;
}

}  // namespace relscope
