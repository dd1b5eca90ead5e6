#include "relscope/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "relscope/errors.hpp"
#include "relscope/pairgeom.hpp"
#include "relscope/random.hpp"
#include "relscope/tsv.hpp"

namespace relscope {

namespace {

constexpr std::array<AttributeKind, 6> kGaussianKinds{
    AttributeKind::head_appearance, AttributeKind::head_pose, AttributeKind::face_emotion,
    AttributeKind::clothing,        AttributeKind::proximity, AttributeKind::activity,
};

bool person_level(AttributeKind k) {
  return k == AttributeKind::head_appearance || k == AttributeKind::head_pose ||
         k == AttributeKind::face_emotion || k == AttributeKind::clothing;
}

// Relative informativeness of each Gaussian kind.
double strength(AttributeKind k) {
  switch (k) {
    case AttributeKind::activity: return 1.0;
    case AttributeKind::clothing: return 0.9;
    case AttributeKind::proximity: return 0.7;
    case AttributeKind::face_emotion: return 0.6;
    case AttributeKind::head_pose: return 0.5;
    default: return 0.4;
  }
}

constexpr double kRelationSpread = 0.4;  // relation offset scale vs. domain centre

// Independent child streams so that one stage's draws do not shift another's.
Rng stream(std::uint64_t seed, std::uint64_t tag) { return Rng(Rng::mix(seed) ^ Rng::mix(tag)); }

std::string numbered(const char* prefix, std::size_t i, int width) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s%0*zu", prefix, width, i);
  return buf;
}

std::vector<std::size_t> quotas(const std::vector<double>& p, std::size_t n) {
  std::vector<std::size_t> q(p.size());
  std::vector<std::pair<double, std::size_t>> rem;
  std::size_t used = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double exact = p[i] * static_cast<double>(n);
    q[i] = static_cast<std::size_t>(std::floor(exact));
    used += q[i];
    rem.push_back({exact - std::floor(exact), i});
  }
  std::stable_sort(rem.begin(), rem.end(), [](auto& a, auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; used < n; ++k, ++used) ++q[rem[k % rem.size()].second];
  return q;
}

double dist(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

std::vector<double> peaked(Rng& rng, std::size_t classes, std::size_t hot, double mass) {
  std::vector<double> v(classes);
  double s = 0.0;
  for (auto& x : v) s += (x = rng.uniform() + 1e-3);
  for (auto& x : v) x *= (1.0 - mass) / s;
  v[hot] += mass;
  return v;
}

}  // namespace

std::vector<AttributeKind> gaussian_kinds() { return {kGaussianKinds.begin(), kGaussianKinds.end()}; }

void SynthSpec::validate(const Taxonomy& taxonomy) const {
  auto fail = [](const std::string& m) { throw SpecError("synthetic spec: " + m); };
  if (n_pairs == 0) fail("n_pairs must be positive");
  if (n_annotators == 0) fail("n_annotators must be positive");
  if (!(epsilon >= 0.0 && epsilon < 1.0)) fail("epsilon must lie in [0, 1)");
  if (!(maybe_rate >= 0.0 && maybe_rate <= 1.0)) fail("maybe_rate must lie in [0, 1]");
  if (!(delta > 0.0) || !std::isfinite(delta)) fail("delta must be positive");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) fail("sigma must be positive");
  if (!(image_w > 0.0 && image_h > 0.0)) fail("image size must be positive");
  if (image_w < 100.0 || image_h < 100.0) fail("image must be at least 100x100");
  if (!proportions.empty()) {
    if (proportions.size() != taxonomy.relation_count())
      fail("proportions has " + std::to_string(proportions.size()) + " entries, taxonomy has " +
           std::to_string(taxonomy.relation_count()) + " relations");
    double s = 0.0;
    for (double p : proportions) {
      if (!(p >= 0.0) || !std::isfinite(p)) fail("proportions must be non-negative");
      s += p;
    }
    if (std::abs(s - 1.0) > 1e-9) fail("proportions sum to " + format_double(s) + ", not 1");
  }
  if (persons_per_photo < 2) fail("persons_per_photo must be at least 2");
  if (identities_per_album < persons_per_photo)
    fail("identities_per_album is smaller than persons_per_photo");
  if (photos_per_album == 0) fail("photos_per_album must be positive");
  if (n_test_albums >= n_albums) fail("n_test_albums must leave albums for training");
  const std::size_t photos = n_albums * photos_per_album;
  const std::size_t per_photo = persons_per_photo * (persons_per_photo - 1) / 2;
  if ((n_pairs + photos - 1) / photos > per_photo)
    fail(std::to_string(n_pairs) + " pairs do not fit into " + std::to_string(photos) +
         " photos of " + std::to_string(persons_per_photo) + " persons");
  for (auto k : kGaussianKinds) {
    auto it = dims.find(k);
    if (it == dims.end() || it->second == 0)
      fail("missing dim for " + std::string(kind_name(k)));
    if (person_level(k) && it->second % 2 != 0)
      fail(std::string(kind_name(k)) + " dim must be even (person A then B)");
  }
  for (const auto& [k, d] : dims)
    if (std::find(kGaussianKinds.begin(), kGaussianKinds.end(), k) == kGaussianKinds.end())
      fail(std::string(kind_name(k)) + " has a fixed width");
}

nlohmann::json SynthSpec::to_json() const {
  nlohmann::json d = nlohmann::json::object();
  for (const auto& [k, v] : dims) d[std::string(kind_name(k))] = v;
  return {{"n_pairs", n_pairs},
          {"n_annotators", n_annotators},
          {"n_albums", n_albums},
          {"photos_per_album", photos_per_album},
          {"identities_per_album", identities_per_album},
          {"persons_per_photo", persons_per_photo},
          {"n_test_albums", n_test_albums},
          {"image_w", image_w},
          {"image_h", image_h},
          {"proportions", proportions},
          {"epsilon", epsilon},
          {"maybe_rate", maybe_rate},
          {"delta", delta},
          {"sigma", sigma},
          {"dims", d},
          {"seed", seed}};
}

SynthSpec SynthSpec::from_json(const nlohmann::json& j) {
  SynthSpec s;
  try {
    s.n_pairs = j.value("n_pairs", s.n_pairs);
    s.n_annotators = j.value("n_annotators", s.n_annotators);
    s.n_albums = j.value("n_albums", s.n_albums);
    s.photos_per_album = j.value("photos_per_album", s.photos_per_album);
    s.identities_per_album = j.value("identities_per_album", s.identities_per_album);
    s.persons_per_photo = j.value("persons_per_photo", s.persons_per_photo);
    s.n_test_albums = j.value("n_test_albums", s.n_test_albums);
    s.image_w = j.value("image_w", s.image_w);
    s.image_h = j.value("image_h", s.image_h);
    s.proportions = j.value("proportions", s.proportions);
    s.epsilon = j.value("epsilon", s.epsilon);
    s.maybe_rate = j.value("maybe_rate", s.maybe_rate);
    s.delta = j.value("delta", s.delta);
    s.sigma = j.value("sigma", s.sigma);
    s.seed = j.value("seed", s.seed);
    if (j.contains("dims"))
      for (const auto& [name, v] : j.at("dims").items()) s.dims[parse_kind(name)] = v.get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw SpecError(std::string("synthetic spec: ") + e.what());
  }
  return s;
}

AttributeRegistry synth_registry(const SynthSpec& spec) {
  std::vector<KindSpec> specs{
      {AttributeKind::head_age, kPairAgeDim, kAgeClassCount, "synthetic"},
      {AttributeKind::head_gender, kPairGenderDim, kGenderClassCount, "synthetic"},
      {AttributeKind::head_loc_scale, kLocScaleDim, 0, "geometry"},
      {AttributeKind::body_age, kPairAgeDim, kAgeClassCount, "synthetic"},
      {AttributeKind::body_gender, kPairGenderDim, kGenderClassCount, "synthetic"},
      {AttributeKind::body_loc_scale, kLocScaleDim, 0, "geometry"},
  };
  for (auto k : kGaussianKinds) {
    auto it = spec.dims.find(k);
    if (it == spec.dims.end()) throw SpecError("synthetic spec: missing dim for " + std::string(kind_name(k)));
    specs.push_back({k, it->second, person_level(k) ? it->second / 2 : 0, "synthetic"});
  }
  return AttributeRegistry(std::move(specs));
}

CorpusPaths corpus_paths(const std::filesystem::path& dir) {
  return {dir / "pairs.tsv",      dir / "annotations.tsv",          dir / "albums.tsv",
          dir / "test_pairs.tsv", dir / "features" / "manifest.json", dir / "truth.json"};
}

SynthCorpus generate(const SynthSpec& spec, const Taxonomy& taxonomy) {
  spec.validate(taxonomy);
  const std::size_t n_rel = taxonomy.relation_count();
  const std::size_t n_dom = taxonomy.domain_count();
  nlohmann::json truth;
  truth["spec"] = spec.to_json();

  // Relation of every pair: exact quotas, then shuffled.
  auto props = spec.proportions;
  if (props.empty()) props.assign(n_rel, 1.0 / static_cast<double>(n_rel));
  std::vector<RelationId> rel;
  {
    auto q = quotas(props, spec.n_pairs);
    for (std::size_t r = 0; r < n_rel; ++r)
      rel.insert(rel.end(), q[r], RelationId{static_cast<std::uint8_t>(r)});
    auto rng = stream(spec.seed, 1);
    rng.shuffle(std::span<RelationId>(rel));
  }

  // Albums, photos, people and head boxes.
  struct Person {
    std::string identity;
    BBox head;
  };
  const std::size_t n_photos = spec.n_albums * spec.photos_per_album;
  std::vector<std::vector<Person>> photo_people(n_photos);
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> photo_slots(n_photos);
  {
    auto rng = stream(spec.seed, 2);
    std::vector<std::size_t> members(spec.identities_per_album);
    for (std::size_t ph = 0; ph < n_photos; ++ph) {
      const std::size_t album = ph / spec.photos_per_album;
      std::iota(members.begin(), members.end(), 0);
      rng.shuffle(std::span<std::size_t>(members));
      for (std::size_t k = 0; k < spec.persons_per_photo; ++k) {
        const double w = rng.uniform(0.05, 0.11) * spec.image_w;
        const double h = 1.25 * w;
        const double x = rng.uniform(0.0, spec.image_w - w);
        const double y = rng.uniform(0.0, std::max(1.0, 0.6 * spec.image_h - h));
        photo_people[ph].push_back(
            {numbered("id", album * spec.identities_per_album + members[k], 5), BBox{x, y, w, h}});
      }
      for (std::size_t i = 0; i < spec.persons_per_photo; ++i)
        for (std::size_t j = i + 1; j < spec.persons_per_photo; ++j) photo_slots[ph].push_back({i, j});
      rng.shuffle(std::span<std::pair<std::size_t, std::size_t>>(photo_slots[ph]));
    }
  }

  std::vector<std::size_t> album_order(spec.n_albums);
  std::iota(album_order.begin(), album_order.end(), 0);
  {
    auto rng = stream(spec.seed, 3);
    rng.shuffle(std::span<std::size_t>(album_order));
  }
  std::vector<bool> test_album(spec.n_albums, false);
  for (std::size_t k = 0; k < spec.n_test_albums; ++k) test_album[album_order[k]] = true;

  PairTable pairs;
  std::map<std::string, std::string> albums;
  std::vector<std::string> test_pairs;
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < spec.n_pairs; ++i) {
    const std::size_t ph = i % n_photos;
    const auto [ia, ib] = photo_slots[ph][i / n_photos];
    PersonPair p;
    p.pair_id = numbered("p", i, 5);
    p.photo_id = numbered("ph", ph, 5);
    p.a = {photo_people[ph][ia].identity, photo_people[ph][ia].head};
    p.b = {photo_people[ph][ib].identity, photo_people[ph][ib].head};
    p.image_w = spec.image_w;
    p.image_h = spec.image_h;
    const std::size_t album = ph / spec.photos_per_album;
    albums[p.pair_id] = numbered("album", album, 3);
    if (test_album[album]) test_pairs.push_back(p.pair_id);
    ids.push_back(p.pair_id);
    pairs.add(std::move(p));
  }

  // Annotators.
  std::vector<AnnotatorRecord> records;
  nlohmann::json noise = nlohmann::json::array();
  {
    auto rng = stream(spec.seed, 4);
    for (std::size_t i = 0; i < spec.n_pairs; ++i) {
      std::string outcomes;
      for (std::size_t a = 0; a < spec.n_annotators; ++a) {
        AnnotatorRecord rec{numbered("ann", a, 2), ids[i], {}};
        char outcome = 't';
        if (rng.bernoulli(spec.epsilon)) {
          const auto kind = rng.below(3);
          RelationId other{static_cast<std::uint8_t>(rng.below(n_rel - 1))};
          if (other.index >= rel[i].index) ++other.index;
          if (kind == 0) {
            outcome = 's';
          } else if (kind == 1) {
            outcome = 'o';
            rec.labels.push_back({other, false});
          } else {
            outcome = 'p';
            rec.labels.push_back({rel[i], false});
            rec.labels.push_back({other, false});
          }
        } else {
          rec.labels.push_back({rel[i], false});
        }
        for (auto& l : rec.labels) l.maybe = rng.bernoulli(spec.maybe_rate);
        outcomes.push_back(outcome);
        records.push_back(std::move(rec));
      }
      noise.push_back(outcomes);
    }
  }

  // Relation prototypes for the Gaussian kinds.
  const auto registry = synth_registry(spec);
  std::vector<std::vector<double>> proto(n_rel);  // concatenated over Gaussian kinds
  double scale = 1.0;
  {
    auto rng = stream(spec.seed, 5);
    std::size_t total = 0;
    for (auto k : kGaussianKinds) total += registry.dim(k);
    bool ok = false;
    for (int attempt = 0; attempt < 64 && !ok; ++attempt) {
      std::vector<std::vector<double>> centre(n_dom, std::vector<double>(total));
      for (auto& c : centre) {
        std::size_t off = 0;
        for (auto k : kGaussianKinds)
          for (std::size_t i = 0; i < registry.dim(k); ++i) c[off++] = strength(k) * rng.normal();
      }
      for (std::size_t r = 0; r < n_rel; ++r) {
        const auto d = taxonomy.domain_of(RelationId{static_cast<std::uint8_t>(r)}).index;
        proto[r] = centre[d];
        std::size_t off = 0;
        for (auto k : kGaussianKinds)
          for (std::size_t i = 0; i < registry.dim(k); ++i)
            proto[r][off++] += kRelationSpread * strength(k) * rng.normal();
      }
      double within = 0.0, across = INFINITY, closest = INFINITY;
      for (std::size_t r = 0; r < n_rel; ++r)
        for (std::size_t s = r + 1; s < n_rel; ++s) {
          const double dd = dist(proto[r], proto[s]);
          closest = std::min(closest, dd);
          const bool same = taxonomy.domain_of(RelationId{static_cast<std::uint8_t>(r)}) ==
                            taxonomy.domain_of(RelationId{static_cast<std::uint8_t>(s)});
          if (same) within = std::max(within, dd);
          else across = std::min(across, dd);
        }
      ok = within < across && closest > 0.0;
      if (ok) scale = spec.delta * spec.sigma / closest;
    }
    if (!ok) throw SpecError("synthetic spec: could not place prototypes with domain structure");
    for (auto& p : proto)
      for (auto& v : p) v *= scale;
  }

  // Latent ages and genders: a per-relation template, perturbed per pair.
  struct Template {
    std::size_t age_a, age_b;
    double male_a, male_b;
  };
  std::vector<Template> tmpl(n_rel);
  {
    auto rng = stream(spec.seed, 6);
    for (auto& t : tmpl) {
      t.age_a = rng.below(5);
      t.age_b = rng.below(5);
      t.male_a = rng.bernoulli(0.5) ? 0.8 : 0.2;
      t.male_b = rng.bernoulli(0.5) ? 0.8 : 0.2;
    }
  }

  FeatureStore store(registry);
  nlohmann::json latent = nlohmann::json::array();
  {
    auto rng = stream(spec.seed, 7);
    for (std::size_t i = 0; i < spec.n_pairs; ++i) {
      const auto& pair = pairs.at(ids[i]);
      const auto& t = tmpl[rel[i].index];
      const std::size_t age_a = rng.bernoulli(0.8) ? t.age_a : rng.below(5);
      const std::size_t age_b = rng.bernoulli(0.8) ? t.age_b : rng.below(5);
      const std::size_t g_a = rng.bernoulli(t.male_a) ? 0 : 1;
      const std::size_t g_b = rng.bernoulli(t.male_b) ? 0 : 1;

      auto put = [&](AttributeKind k, std::vector<double> v) { store.put({ids[i], k, std::move(v)}); };
      // Per-person slots follow the same orientation as the geometry blocks.
      const bool lead = a_leads(pair);
      auto oriented = [lead](auto derive, std::vector<double> a, std::vector<double> b) {
        return lead ? derive(a, b) : derive(b, a);
      };
      auto age = [](std::span<const double> a, std::span<const double> b) { return derive_pair_age(a, b); };
      auto gender = [](std::span<const double> a, std::span<const double> b) { return derive_pair_gender(a, b); };
      {
        auto a = peaked(rng, kAgeClassCount, age_a, 0.7);
        auto b = peaked(rng, kAgeClassCount, age_b, 0.7);
        put(AttributeKind::head_age, oriented(age, a, b));
        a = peaked(rng, kAgeClassCount, age_a, 0.5);
        b = peaked(rng, kAgeClassCount, age_b, 0.5);
        put(AttributeKind::body_age, oriented(age, a, b));
        a = peaked(rng, 2, g_a, rng.uniform(0.4, 0.9));
        b = peaked(rng, 2, g_b, rng.uniform(0.4, 0.9));
        put(AttributeKind::head_gender, oriented(gender, a, b));
        a = peaked(rng, 2, g_a, rng.uniform(0.2, 0.8));
        b = peaked(rng, 2, g_b, rng.uniform(0.2, 0.8));
        put(AttributeKind::body_gender, oriented(gender, a, b));
      }
      put(AttributeKind::head_loc_scale, head_loc_scale_block(pair));
      put(AttributeKind::body_loc_scale, body_loc_scale_block(pair));

      std::size_t off = 0;
      for (auto k : kGaussianKinds) {
        std::vector<double> v(registry.dim(k));
        for (auto& x : v) x = proto[rel[i].index][off++] + spec.sigma * rng.normal();
        put(k, std::move(v));
      }
      latent.push_back({{"pair_id", ids[i]},
                        {"relation", taxonomy.relation_name(rel[i])},
                        {"domain", taxonomy.domain_name(taxonomy.domain_of(rel[i]))},
                        {"album", albums[ids[i]]},
                        {"age", {age_a, age_b}},
                        {"gender", {g_a, g_b}},
                        {"annotators", noise[i]}});
    }
  }

  nlohmann::json protos = nlohmann::json::object();
  for (std::size_t r = 0; r < n_rel; ++r)
    protos[taxonomy.relation_name(RelationId{static_cast<std::uint8_t>(r)})] = proto[r];
  nlohmann::json kinds = nlohmann::json::array();
  for (auto k : kGaussianKinds) kinds.push_back(kind_name(k));
  truth["prototype_kinds"] = kinds;
  truth["prototype_scale"] = scale;
  truth["prototypes"] = protos;
  truth["test_albums"] = nlohmann::json::array();
  for (std::size_t a = 0; a < spec.n_albums; ++a)
    if (test_album[a]) truth["test_albums"].push_back(numbered("album", a, 3));
  truth["pairs"] = latent;
  truth["annotator_outcomes"] = "t: true relation, s: skip, o: other relation, p: true plus other";

  return SynthCorpus{std::move(pairs), std::move(records), std::move(albums), std::move(test_pairs),
                     std::move(store), std::move(rel), std::move(truth)};
}

CorpusPaths write_corpus(const std::filesystem::path& dir, const SynthCorpus& corpus,
                         const Taxonomy& taxonomy) {
  auto paths = corpus_paths(dir);
  write_pairs(paths.pairs, corpus.pairs);
  write_annotations(paths.annotations, corpus.annotations, taxonomy);
  write_album_index(paths.albums, corpus.albums);
  write_id_list(paths.test_pairs, corpus.test_pairs);
  corpus.features.save(paths.features.parent_path(), true);
  OutputFile out(paths.truth);
  out.stream() << corpus.truth.dump(1) << '\n';
  out.close();
  return paths;
}

}  // namespace relscope
