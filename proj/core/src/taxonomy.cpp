#include "relscope/taxonomy.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "relscope/errors.hpp"

namespace relscope {

std::vector<RelationId> RelationSet::members() const {
  std::vector<RelationId> out;
  out.reserve(size());
  for (std::uint64_t b = bits_; b != 0; b &= b - 1)
    out.push_back(RelationId{static_cast<std::uint8_t>(std::countr_zero(b))});
  return out;
}

RelationId RelationSet::lowest() const {
  if (bits_ == 0) throw InputError("lowest() of an empty relation set");
  return RelationId{static_cast<std::uint8_t>(std::countr_zero(bits_))};
}

bool RelationSet::lexicographic_less(RelationSet a, RelationSet b) {
  const auto ma = a.members();
  const auto mb = b.members();
  return std::lexicographical_compare(ma.begin(), ma.end(), mb.begin(), mb.end());
}

std::string normalize_label(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

namespace {

std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0U : 1U)});
      diag = up;
    }
  }
  return row[b.size()];
}

std::string nearest_candidates(std::string_view key, std::span<const std::string> names) {
  std::vector<std::pair<std::size_t, std::string>> scored;
  for (const auto& n : names) scored.emplace_back(edit_distance(key, n), n);
  std::stable_sort(scored.begin(), scored.end(),
                   [](const auto& x, const auto& y) { return x.first < y.first; });
  std::ostringstream os;
  for (std::size_t i = 0; i < std::min<std::size_t>(3, scored.size()); ++i)
    os << (i ? ", " : "") << '"' << scored[i].second << '"';
  return os.str();
}

}  // namespace

Taxonomy::Taxonomy(std::vector<DomainSpec> domains, std::map<std::string, std::string> aliases) {
  if (domains.empty()) throw SpecError("taxonomy has no domains");
  std::set<std::string> seen_domains;
  for (auto& d : domains) {
    if (d.relations.empty()) throw SpecError("domain '" + d.name + "' has no relations");
    if (!seen_domains.insert(normalize_label(d.name)).second)
      throw SpecError("duplicate domain name '" + d.name + "'");
    const DomainId did{static_cast<std::uint8_t>(domain_names_.size())};
    domain_names_.push_back(d.name);
    domain_relations_.emplace_back();
    for (auto& r : d.relations) {
      if (relation_names_.size() >= RelationSet::kCapacity)
        throw SpecError("taxonomy exceeds " + std::to_string(RelationSet::kCapacity) + " relations");
      const RelationId rid{static_cast<std::uint8_t>(relation_names_.size())};
      if (!lookup_.emplace(normalize_label(r), rid).second)
        throw SpecError("duplicate relation name '" + r + "'");
      relation_names_.push_back(r);
      relation_domain_.push_back(did);
      domain_relations_.back().push_back(rid);
    }
  }
  if (domain_names_.size() > 255) throw SpecError("too many domains");
  for (auto& [alias, canonical] : aliases) {
    const auto it = lookup_.find(normalize_label(canonical));
    if (it == lookup_.end())
      throw SpecError("alias '" + alias + "' targets unknown relation '" + canonical + "'");
    const auto key = normalize_label(alias);
    const auto [pos, inserted] = lookup_.emplace(key, it->second);
    if (!inserted && pos->second != it->second)
      throw SpecError("alias '" + alias + "' collides with another name");
    aliases_.emplace(key, relation_names_[it->second.index]);
  }
}

// Reconstructed from the domain panels; the flat list is not printed anywhere
// as a single table, so the strings here are this project's canonical forms.
const Taxonomy& Taxonomy::builtin() {
  static const Taxonomy kBuiltin(
      {
          {"Attachment", {"father-child", "mother-child", "grandpa-grandchild", "grandma-grandchild"}},
          {"Reciprocity", {"friends", "siblings", "classmates"}},
          {"Mating", {"lovers/spouses"}},
          {"Hierarchical power",
           {"presenter-audience", "teacher-student", "trainer-trainee", "leader-subordinate"}},
          {"Coalitional groups",
           {"band members", "dance team members", "sport team members", "colleagues"}},
      },
      {
          {"father child", "father-child"},
          {"mother child", "mother-child"},
          {"grandfather-grandchild", "grandpa-grandchild"},
          {"grandmother-grandchild", "grandma-grandchild"},
          {"friend", "friends"},
          {"sibling", "siblings"},
          {"classmate", "classmates"},
          {"lovers", "lovers/spouses"},
          {"spouses", "lovers/spouses"},
          {"lovers-spouses", "lovers/spouses"},
          {"couple", "lovers/spouses"},
          {"speaker-audience", "presenter-audience"},
          {"band member", "band members"},
          {"band-members", "band members"},
          {"band team members", "band members"},
          {"dance team member", "dance team members"},
          {"sport team member", "sport team members"},
          {"sports team members", "sport team members"},
          {"colleague", "colleagues"},
      });
  return kBuiltin;
}

Taxonomy Taxonomy::from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("domains") || !j.at("domains").is_array())
    throw SpecError("taxonomy manifest needs a \"domains\" array");
  std::vector<DomainSpec> domains;
  for (const auto& d : j.at("domains")) {
    DomainSpec spec;
    try {
      spec.name = d.at("name").get<std::string>();
      spec.relations = d.at("relations").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
      throw SpecError(std::string("malformed taxonomy domain entry: ") + e.what());
    }
    domains.push_back(std::move(spec));
  }
  std::map<std::string, std::string> aliases;
  if (j.contains("aliases")) aliases = j.at("aliases").get<std::map<std::string, std::string>>();
  return Taxonomy(std::move(domains), std::move(aliases));
}

Taxonomy Taxonomy::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open taxonomy manifest " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return from_json(j);
}

nlohmann::json Taxonomy::to_json() const {
  nlohmann::json domains = nlohmann::json::array();
  for (std::size_t d = 0; d < domain_names_.size(); ++d) {
    nlohmann::json rels = nlohmann::json::array();
    for (auto r : domain_relations_[d]) rels.push_back(relation_names_[r.index]);
    domains.push_back({{"name", domain_names_[d]}, {"relations", rels}});
  }
  nlohmann::json out{{"domains", domains}};
  if (!aliases_.empty()) out["aliases"] = aliases_;
  return out;
}

DomainId Taxonomy::domain_of(RelationId r) const {
  if (r.index >= relation_domain_.size())
    throw NameError("relation index " + std::to_string(r.index) + " out of range");
  return relation_domain_[r.index];
}

std::span<const RelationId> Taxonomy::relations_of(DomainId d) const {
  if (d.index >= domain_relations_.size())
    throw NameError("domain index " + std::to_string(d.index) + " out of range");
  return domain_relations_[d.index];
}

const std::string& Taxonomy::relation_name(RelationId r) const {
  if (r.index >= relation_names_.size())
    throw NameError("relation index " + std::to_string(r.index) + " out of range");
  return relation_names_[r.index];
}

const std::string& Taxonomy::domain_name(DomainId d) const {
  if (d.index >= domain_names_.size())
    throw NameError("domain index " + std::to_string(d.index) + " out of range");
  return domain_names_[d.index];
}

RelationId Taxonomy::parse_relation(std::string_view s) const {
  const auto key = normalize_label(s);
  if (const auto it = lookup_.find(key); it != lookup_.end()) return it->second;
  std::vector<std::string> names;
  for (const auto& [k, _] : lookup_) names.push_back(k);
  throw NameError("unknown relation '" + std::string(s) + "'; nearest: " +
                  nearest_candidates(key, names));
}

DomainId Taxonomy::parse_domain(std::string_view s) const {
  const auto key = normalize_label(s);
  for (std::size_t d = 0; d < domain_names_.size(); ++d)
    if (normalize_label(domain_names_[d]) == key) return DomainId{static_cast<std::uint8_t>(d)};
  throw NameError("unknown domain '" + std::string(s) + "'; nearest: " +
                  nearest_candidates(key, domain_names_));
}

std::vector<RelationId> Taxonomy::sole_relations() const {
  std::vector<RelationId> out;
  for (const auto& rels : domain_relations_)
    if (rels.size() == 1) out.push_back(rels.front());
  return out;
}

std::vector<DomainId> Taxonomy::domains_of(RelationSet s) const {
  std::vector<DomainId> out;
  for (auto r : s.members()) {
    const auto d = domain_of(r);
    if (std::find(out.begin(), out.end(), d) == out.end()) out.push_back(d);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace relscope
