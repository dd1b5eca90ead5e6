#include "relscope/statistics.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>

namespace relscope {

namespace {

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

std::size_t lookup(const std::map<int, std::size_t>& m, int k) {
  const auto it = m.find(k);
  return it == m.end() ? 0 : it->second;
}

std::string percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f%%", 100.0 * fraction);
  return buf;
}

}  // namespace

double StatisticsReport::labels_per_record_fraction(int k) const {
  return ratio(lookup(labels_per_record, k), n_labelled_records);
}

double StatisticsReport::relations_per_pair_fraction(int k) const {
  return ratio(lookup(relations_per_pair, k), n_pairs - n_skipped_pairs);
}

double StatisticsReport::agr_fraction(int agr) const { return ratio(lookup(agr_counts, agr), n_pairs); }

double StatisticsReport::skipped_fraction() const { return ratio(n_skipped_pairs, n_pairs); }

double StatisticsReport::maybe_fraction_of_marks() const { return ratio(n_maybe_marks, n_label_marks); }

double StatisticsReport::maybe_fraction_of_records() const {
  return ratio(n_records_with_maybe, n_labelled_records);
}

double StatisticsReport::retained_fraction(int threshold) const {
  std::size_t kept = 0;
  for (const auto& [agr, count] : agr_counts)
    if (agr >= threshold) kept += count;
  return ratio(kept, n_pairs);
}

StatisticsReport label_statistics(std::span<const AnnotatorRecord> records,
                                  const Taxonomy& taxonomy, const PairTable* pairs,
                                  int max_consistency) {
  StatisticsReport rep;
  rep.n_records = records.size();
  for (const auto& r : records) {
    if (r.skipped()) continue;
    ++rep.n_labelled_records;
    ++rep.labels_per_record[static_cast<int>(r.labels.size())];
    rep.n_label_marks += r.labels.size();
    const auto maybes = static_cast<std::size_t>(
        std::count_if(r.labels.begin(), r.labels.end(), [](const LabelMark& m) { return m.maybe; }));
    rep.n_maybe_marks += maybes;
    if (maybes > 0) ++rep.n_records_with_maybe;
  }

  const auto grouped = group_by_pair(records);
  rep.n_pairs = grouped.size();

  int top_level = max_consistency;
  std::vector<AgreementResult> results;
  for (const auto& [pair_id, group] : grouped) {
    RelationSet uni;
    for (const auto& r : group) uni = uni | r.relation_set();
    auto res = compute_agreement(group, 1);
    if (!res) {
      ++rep.n_skipped_pairs;
      continue;
    }
    ++rep.relations_per_pair[static_cast<int>(uni.size())];
    ++rep.agr_counts[res->agr];
    top_level = std::max(top_level, res->agr);
    results.push_back(std::move(*res));
  }

  for (int c = 1; c <= top_level; ++c) {
    StatisticsReport::Level level;
    level.consistency = c;
    level.relation_pairs.assign(taxonomy.relation_count(), 0);
    level.domain_pairs.assign(taxonomy.domain_count(), 0);
    std::set<std::string> photos;
    std::set<std::string> identities;
    for (const auto& res : results) {
      if (res.agr < c) continue;
      ++level.pairs;
      const auto primary = res.majority.lowest();
      ++level.relation_pairs[primary.index];
      ++level.domain_pairs[taxonomy.domain_of(primary).index];
      if (pairs) {
        if (const auto* p = pairs->find(res.pair_id)) {
          photos.insert(p->photo_id);
          identities.insert(p->a.identity_id);
          identities.insert(p->b.identity_id);
        }
      }
    }
    level.photos = photos.size();
    level.identities = identities.size();
    rep.levels.push_back(std::move(level));
  }
  return rep;
}

nlohmann::json StatisticsReport::to_json(const Taxonomy& taxonomy) const {
  nlohmann::json j;
  j["records"] = n_records;
  j["labelled_records"] = n_labelled_records;
  j["pairs"] = n_pairs;
  j["skipped_pairs"] = n_skipped_pairs;
  j["label_marks"] = n_label_marks;
  j["maybe_marks"] = n_maybe_marks;
  j["maybe_fraction_of_marks"] = maybe_fraction_of_marks();
  j["maybe_fraction_of_records"] = maybe_fraction_of_records();
  for (const auto& [k, n] : labels_per_record)
    j["labels_per_record"][std::to_string(k)] = {{"count", n},
                                                 {"fraction", labels_per_record_fraction(k)}};
  for (const auto& [k, n] : relations_per_pair)
    j["relations_per_pair"][std::to_string(k)] = {{"count", n},
                                                  {"fraction", relations_per_pair_fraction(k)}};
  for (const auto& [k, n] : agr_counts)
    j["agr"][std::to_string(k)] = {{"count", n}, {"fraction", agr_fraction(k)}};
  j["skipped_fraction"] = skipped_fraction();
  nlohmann::json lv = nlohmann::json::array();
  for (const auto& level : levels) {
    nlohmann::json l{{"consistency", level.consistency},
                     {"pairs", level.pairs},
                     {"photos", level.photos},
                     {"identities", level.identities}};
    for (std::size_t r = 0; r < level.relation_pairs.size(); ++r)
      l["relations"][taxonomy.relation_name(RelationId{static_cast<std::uint8_t>(r)})] =
          level.relation_pairs[r];
    for (std::size_t d = 0; d < level.domain_pairs.size(); ++d)
      l["domains"][taxonomy.domain_name(DomainId{static_cast<std::uint8_t>(d)})] =
          level.domain_pairs[d];
    lv.push_back(std::move(l));
  }
  j["levels"] = std::move(lv);
  return j;
}

std::string StatisticsReport::to_text(const Taxonomy& taxonomy) const {
  std::ostringstream os;
  os << "records: " << n_records << " (" << n_labelled_records << " labelled)\n";
  os << "pairs: " << n_pairs << " (" << n_skipped_pairs << " skipped by all annotators)\n";
  os << "labels per record:";
  for (const auto& [k, n] : labels_per_record) os << "  " << k << ": " << percent(labels_per_record_fraction(k));
  os << "\nrelations per pair across annotators:";
  for (const auto& [k, n] : relations_per_pair)
    os << "  " << k << ": " << percent(relations_per_pair_fraction(k));
  os << "\nmaybe: " << percent(maybe_fraction_of_marks()) << " of label marks, "
     << percent(maybe_fraction_of_records()) << " of labelled records\n";
  os << "agreement:";
  for (auto it = agr_counts.rbegin(); it != agr_counts.rend(); ++it)
    os << "  agr=" << it->first << ": " << percent(agr_fraction(it->first));
  os << "  skipped: " << percent(skipped_fraction()) << '\n';

  if (!levels.empty()) {
    std::size_t width = 12;
    for (auto n : taxonomy.relation_names()) width = std::max(width, n.size() + 2);
    for (auto n : taxonomy.domain_names()) width = std::max(width, n.size() + 2);
    const auto pad = [&](const std::string& s) { return s + std::string(width - s.size(), ' '); };
    os << '\n' << pad("consistency");
    for (const auto& l : levels) os << "  c>=" << l.consistency;
    os << '\n';
    const auto row = [&](const std::string& name, auto value) {
      os << pad(name);
      for (const auto& l : levels) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "%6zu", static_cast<std::size_t>(value(l)));
        os << buf;
      }
      os << '\n';
    };
    row("pairs", [](const Level& l) { return l.pairs; });
    row("photos", [](const Level& l) { return l.photos; });
    row("identities", [](const Level& l) { return l.identities; });
    for (std::size_t r = 0; r < taxonomy.relation_count(); ++r)
      row(taxonomy.relation_name(RelationId{static_cast<std::uint8_t>(r)}),
          [r](const Level& l) { return l.relation_pairs[r]; });
    for (std::size_t d = 0; d < taxonomy.domain_count(); ++d)
      row(taxonomy.domain_name(DomainId{static_cast<std::uint8_t>(d)}),
          [d](const Level& l) { return l.domain_pairs[d]; });
  }
  return os.str();
}

}  // namespace relscope
