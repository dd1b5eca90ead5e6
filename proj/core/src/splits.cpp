#include "relscope/splits.hpp"

#include <algorithm>
#include <cstdio>
#include <cctype>
#include <set>

#include "relscope/errors.hpp"
#include "relscope/random.hpp"
#include "relscope/tsv.hpp"

namespace relscope {

namespace {

std::string kind_text(SplitKind k) { return k == SplitKind::ac ? "AC" : "SR"; }

std::string slug(std::string_view name) {
  std::string out;
  for (char c : name) {
    const auto u = static_cast<unsigned char>(c);
    out.push_back(std::isalnum(u) ? static_cast<char>(std::tolower(u)) : '_');
  }
  return out;
}

}  // namespace

nlohmann::json to_json(const SplitManifest& m, const Taxonomy& taxonomy) {
  nlohmann::json j;
  j["name"] = m.name;
  j["kind"] = kind_text(m.kind);
  j["held_out"] = m.held_out ? nlohmann::json(taxonomy.relation_name(*m.held_out)) : nlohmann::json();
  j["seed"] = m.seed;
  j["train"] = m.train;
  j["val"] = m.val;
  j["test"] = m.test;
  if (m.kind == SplitKind::sr) j["discarded"] = m.discarded;
  return j;
}

SplitManifest manifest_from_json(const nlohmann::json& j, const Taxonomy& taxonomy) {
  SplitManifest m;
  try {
    m.name = j.at("name").get<std::string>();
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "AC")
      m.kind = SplitKind::ac;
    else if (kind == "SR")
      m.kind = SplitKind::sr;
    else
      throw ParseError("unknown split kind '" + kind + "'");
    if (!j.at("held_out").is_null()) m.held_out = taxonomy.parse_relation(j.at("held_out").get<std::string>());
    m.seed = j.at("seed").get<std::uint64_t>();
    m.train = j.at("train").get<std::vector<std::string>>();
    m.val = j.at("val").get<std::vector<std::string>>();
    m.test = j.at("test").get<std::vector<std::string>>();
    if (j.contains("discarded")) m.discarded = j.at("discarded").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed split manifest: ") + e.what());
  }
  if ((m.kind == SplitKind::sr) != m.held_out.has_value())
    throw ParseError("split manifest " + m.name + ": held_out must be set exactly for SR splits");
  return m;
}

void save_manifest(const std::filesystem::path& path, const SplitManifest& m, const Taxonomy& taxonomy) {
  OutputFile out(path);
  out.stream() << to_json(m, taxonomy).dump(2) << '\n';
  out.close();
}

SplitManifest load_manifest(const std::filesystem::path& path, const Taxonomy& taxonomy) {
  try {
    return manifest_from_json(nlohmann::json::parse(read_text_file(path)), taxonomy);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

SplitManifest make_ac_split(std::span<const GroundTruth> truth,
                            const std::map<std::string, std::string>& album_index,
                            std::span<const std::string> preserved_test, std::size_t n_val_albums,
                            std::uint64_t seed) {
  std::set<std::string> truth_ids;
  for (const auto& g : truth) truth_ids.insert(g.pair_id);
  std::set<std::string> test_ids;
  for (const auto& id : preserved_test) {
    if (!truth_ids.contains(id)) throw SplitError("preserved test pair " + id + " has no ground truth");
    test_ids.insert(id);
  }

  std::vector<std::string> remainder;
  std::set<std::string> albums;
  for (const auto& id : truth_ids) {
    if (test_ids.contains(id)) continue;
    const auto it = album_index.find(id);
    if (it == album_index.end()) throw SplitError("pair " + id + " has no album");
    albums.insert(it->second);
    remainder.push_back(id);
  }
  if (albums.size() < n_val_albums)
    throw SplitError("only " + std::to_string(albums.size()) + " albums outside the test split; " +
                     std::to_string(n_val_albums) + " needed for validation");

  std::vector<std::string> order(albums.begin(), albums.end());
  Rng rng(seed);
  rng.shuffle(std::span<std::string>(order));
  const std::set<std::string> val_albums(order.begin(),
                                         order.begin() + static_cast<std::ptrdiff_t>(n_val_albums));

  SplitManifest m;
  m.name = "ac";
  m.kind = SplitKind::ac;
  m.seed = seed;
  m.test.assign(preserved_test.begin(), preserved_test.end());
  for (const auto& id : remainder)
    (val_albums.contains(album_index.at(id)) ? m.val : m.train).push_back(id);
  return m;
}

std::map<std::string, std::size_t> assign_identity_folds(
    const std::map<std::string, std::size_t>& identity_pair_counts, std::size_t n_folds,
    std::uint64_t seed) {
  if (n_folds < 2) throw SplitError("need at least 2 folds");
  std::vector<std::pair<std::string, std::size_t>> order(identity_pair_counts.begin(),
                                                         identity_pair_counts.end());
  Rng rng(seed);
  rng.shuffle(std::span(order));
  std::stable_sort(order.begin(), order.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });

  std::vector<std::size_t> identities(n_folds, 0);
  std::vector<std::size_t> load(n_folds, 0);
  std::map<std::string, std::size_t> fold_of;
  for (const auto& [id, count] : order) {
    std::size_t best = 0;
    for (std::size_t f = 1; f < n_folds; ++f)
      if (identities[f] < identities[best] ||
          (identities[f] == identities[best] && load[f] < load[best]))
        best = f;
    ++identities[best];
    load[best] += count;
    fold_of.emplace(id, best);
  }
  return fold_of;
}

std::vector<SrSplit> make_sr_splits(std::span<const GroundTruth> truth, const PairTable& pairs,
                                    const Taxonomy& taxonomy, std::uint64_t seed,
                                    std::size_t n_folds) {
  for (std::size_t r = 0; r < taxonomy.relation_count(); ++r) {
    const RelationId rel{static_cast<std::uint8_t>(r)};
    const bool present = std::any_of(truth.begin(), truth.end(),
                                     [&](const GroundTruth& g) { return g.labels.contains(rel); });
    if (!present) throw SplitError("relation '" + taxonomy.relation_name(rel) + "' has no pairs");
  }
  for (const auto& g : truth)
    if (!pairs.contains(g.pair_id)) throw SplitError("ground-truth pair " + g.pair_id + " missing from pair table");

  RelationSet always_train;
  for (auto r : taxonomy.sole_relations()) always_train.insert(r);

  std::vector<const GroundTruth*> sorted;
  for (const auto& g : truth) sorted.push_back(&g);
  std::sort(sorted.begin(), sorted.end(),
            [](const GroundTruth* a, const GroundTruth* b) { return a->pair_id < b->pair_id; });

  std::vector<SrSplit> out;
  std::uint64_t k = 0;
  for (std::size_t r = 0; r < taxonomy.relation_count(); ++r) {
    const RelationId held{static_cast<std::uint8_t>(r)};
    if (always_train.contains(held)) continue;

    SrSplit split;
    auto& m = split.manifest;
    m.kind = SplitKind::sr;
    m.held_out = held;
    m.seed = seed + k;
    char num[16];
    std::snprintf(num, sizeof num, "%02zu", k);
    m.name = "sr-" + std::string(num) + "-" + slug(taxonomy.relation_name(held));
    ++k;

    std::vector<const GroundTruth*> candidates;
    std::map<std::string, std::size_t> identity_counts;
    for (const auto* g : sorted) {
      if (g->labels.contains(held)) {
        m.test.push_back(g->pair_id);
        continue;
      }
      candidates.push_back(g);
      const auto& p = pairs.at(g->pair_id);
      ++identity_counts[p.a.identity_id];
      ++identity_counts[p.b.identity_id];
    }

    const auto fold_of = assign_identity_folds(identity_counts, n_folds, Rng::mix(m.seed));
    Rng rng(m.seed);
    split.val_fold = static_cast<std::size_t>(rng.below(n_folds));
    split.fold_identity_counts.assign(n_folds, 0);
    for (const auto& [id, fold] : fold_of) ++split.fold_identity_counts[fold];

    std::vector<const GroundTruth*> val_side;
    std::set<std::string> train_identities;
    for (const auto* g : candidates) {
      const auto& p = pairs.at(g->pair_id);
      const bool a_val = fold_of.at(p.a.identity_id) == split.val_fold;
      const bool b_val = fold_of.at(p.b.identity_id) == split.val_fold;
      if ((g->labels & always_train) != RelationSet{} || (!a_val && !b_val)) {
        m.train.push_back(g->pair_id);
        train_identities.insert(p.a.identity_id);
        train_identities.insert(p.b.identity_id);
      } else if (a_val && b_val) {
        val_side.push_back(g);
      } else {
        m.discarded.push_back(g->pair_id);
      }
    }
    // Identities already in training (via always-train pairs) pull their
    // validation pairs out; the training side is kept.
    for (const auto* g : val_side) {
      const auto& p = pairs.at(g->pair_id);
      if (train_identities.contains(p.a.identity_id) || train_identities.contains(p.b.identity_id))
        m.discarded.push_back(g->pair_id);
      else
        m.val.push_back(g->pair_id);
    }
    std::sort(m.discarded.begin(), m.discarded.end());
    out.push_back(std::move(split));
  }
  return out;
}

}  // namespace relscope
