#include "relscope/featstore.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "relscope/errors.hpp"
#include "relscope/taxonomy.hpp"
#include "relscope/tsv.hpp"

namespace relscope {

namespace {

constexpr std::array<AttributeKind, kAttributeKindCount> kAllKinds{
    AttributeKind::head_age,        AttributeKind::head_gender,  AttributeKind::head_loc_scale,
    AttributeKind::head_appearance, AttributeKind::head_pose,    AttributeKind::face_emotion,
    AttributeKind::body_age,        AttributeKind::body_gender,  AttributeKind::body_loc_scale,
    AttributeKind::clothing,        AttributeKind::proximity,    AttributeKind::activity,
};

constexpr std::array<std::string_view, kAttributeKindCount> kKindNames{
    "head_age",  "head_gender", "head_loc_scale", "head_appearance", "head_pose", "face_emotion",
    "body_age",  "body_gender", "body_loc_scale", "clothing",        "proximity", "activity",
};

std::size_t idx(AttributeKind k) { return static_cast<std::size_t>(k); }

}  // namespace

std::span<const AttributeKind> all_kinds() { return kAllKinds; }

std::string_view kind_name(AttributeKind kind) { return kKindNames.at(idx(kind)); }

AttributeKind parse_kind(std::string_view name) {
  const auto key = normalize_label(name);
  for (std::size_t i = 0; i < kKindNames.size(); ++i)
    if (kKindNames[i] == key) return kAllKinds[i];
  throw NameError("unknown attribute kind '" + std::string(name) + "'");
}

std::vector<AttributeKind> canonical_kinds(std::span<const AttributeKind> kinds) {
  std::vector<AttributeKind> out(kinds.begin(), kinds.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<AttributeKind> parse_kind_list(std::string_view list) {
  if (normalize_label(list) == "all") return {kAllKinds.begin(), kAllKinds.end()};
  std::vector<AttributeKind> out;
  std::size_t start = 0;
  while (start <= list.size()) {
    auto end = list.find(',', start);
    if (end == std::string_view::npos) end = list.size();
    out.push_back(parse_kind(list.substr(start, end - start)));
    start = end + 1;
  }
  return canonical_kinds(out);
}

AttributeRegistry AttributeRegistry::full_scale() {
  return AttributeRegistry({
      {AttributeKind::head_age, kPairAgeDim, kAgeClassCount, "head age model"},
      {AttributeKind::head_gender, kPairGenderDim, kGenderClassCount, "head gender model"},
      {AttributeKind::head_loc_scale, 14, 0, "geometry"},
      {AttributeKind::head_appearance, 80, 40, "CelebA attribute model"},
      {AttributeKind::head_pose, 10, 5, "IMFDB pose model"},
      {AttributeKind::face_emotion, 14, 7, "IMFDB emotion model"},
      {AttributeKind::body_age, kPairAgeDim, kAgeClassCount, "body age model"},
      {AttributeKind::body_gender, kPairGenderDim, kGenderClassCount, "body gender model"},
      {AttributeKind::body_loc_scale, 14, 0, "geometry"},
      {AttributeKind::clothing, 16, 8, "Berkeley attribute model"},
      {AttributeKind::proximity, 2500, 0, "multi-task RNN proximity model"},
      {AttributeKind::activity, 1024, 0, "CNN-CRF activity model"},
  });
}

AttributeRegistry::AttributeRegistry(std::vector<KindSpec> specs) {
  std::array<bool, kAttributeKindCount> seen{};
  for (auto& s : specs) {
    const auto i = idx(s.kind);
    if (i >= kAttributeKindCount) throw SpecError("attribute kind out of range");
    if (seen[i]) throw SpecError("attribute kind " + std::string(kind_name(s.kind)) + " listed twice");
    if (s.dim == 0) throw SpecError("attribute kind " + std::string(kind_name(s.kind)) + " has dim 0");
    seen[i] = true;
    specs_[i] = std::move(s);
  }
  for (std::size_t i = 0; i < kAttributeKindCount; ++i)
    if (!seen[i]) throw SpecError("attribute registry lacks kind " + std::string(kKindNames[i]));
}

std::size_t AttributeRegistry::total_dim(std::span<const AttributeKind> kinds) const {
  std::size_t n = 0;
  for (auto k : canonical_kinds(kinds)) n += dim(k);
  return n;
}

nlohmann::json AttributeRegistry::to_json() const {
  nlohmann::json kinds = nlohmann::json::array();
  for (const auto& s : specs_)
    kinds.push_back({{"name", kind_name(s.kind)},
                     {"dim", s.dim},
                     {"person_dim", s.person_dim},
                     {"source", s.source}});
  return {{"kinds", kinds}};
}

AttributeRegistry AttributeRegistry::from_json(const nlohmann::json& j) {
  if (!j.contains("kinds") || !j.at("kinds").is_array())
    throw SpecError("feature manifest needs a \"kinds\" array");
  std::vector<KindSpec> specs;
  for (const auto& k : j.at("kinds")) {
    try {
      KindSpec s;
      s.kind = parse_kind(k.at("name").get<std::string>());
      s.dim = k.at("dim").get<std::size_t>();
      s.person_dim = k.value("person_dim", std::size_t{0});
      s.source = k.value("source", std::string{});
      specs.push_back(std::move(s));
    } catch (const nlohmann::json::exception& e) {
      throw SpecError(std::string("malformed feature manifest entry: ") + e.what());
    } catch (const NameError& e) {
      throw SpecError(e.what());
    }
  }
  return AttributeRegistry(std::move(specs));
}

std::map<std::string, std::vector<double>> read_feature_file(const std::filesystem::path& path,
                                                             std::size_t dim) {
  std::vector<std::string> names{"pair_id"};
  for (std::size_t i = 0; i < dim; ++i) names.push_back("v" + std::to_string(i));
  std::vector<std::string_view> header(names.begin(), names.end());
  TsvReader reader(path, header);
  if (reader.header().size() != dim + 1)
    throw ParseError(path.string() + ": header has " + std::to_string(reader.header().size() - 1) +
                     " value columns, expected " + std::to_string(dim));
  std::map<std::string, std::vector<double>> rows;
  std::vector<std::string> errors;
  while (reader.next()) {
    const auto& f = reader.fields();
    const auto where = "line " + std::to_string(reader.line_number()) + ": ";
    if (f.size() != dim + 1) {
      errors.push_back(where + "expected " + std::to_string(dim + 1) + " columns, got " +
                       std::to_string(f.size()));
      continue;
    }
    try {
      std::vector<double> v(dim);
      for (std::size_t i = 0; i < dim; ++i) v[i] = parse_double(f[i + 1]);
      if (!rows.emplace(std::string(f[0]), std::move(v)).second)
        throw InputError("duplicate pair_id " + std::string(f[0]));
    } catch (const InputError& e) {
      errors.push_back(where + e.what());
    }
  }
  if (!errors.empty()) {
    std::ostringstream os;
    os << path.string() << ": " << errors.size() << " invalid row(s)";
    for (const auto& e : errors) os << "\n  " << e;
    throw ParseError(os.str());
  }
  return rows;
}

void write_feature_file(const std::filesystem::path& path, std::size_t dim,
                        const std::map<std::string, std::vector<double>>& rows) {
  OutputFile file(path);
  auto& os = file.stream();
  os << "pair_id";
  for (std::size_t i = 0; i < dim; ++i) os << "\tv" << i;
  os << '\n';
  for (const auto& [pair_id, values] : rows) {
    if (values.size() != dim) throw ShapeError("feature row " + pair_id + " has wrong length");
    os << pair_id;
    for (double v : values) os << '\t' << format_double(v);
    os << '\n';
  }
  file.close();
}

FeatureStore::FeatureStore(AttributeRegistry registry) : registry_(std::move(registry)) {}

void FeatureStore::put(FeatureBlock block) {
  const auto dim = registry_.dim(block.kind);
  const auto name = std::string(kind_name(block.kind));
  if (block.values.size() != dim)
    throw ShapeError(name + " block for pair " + block.pair_id + " has " +
                     std::to_string(block.values.size()) + " values, expected " + std::to_string(dim));
  for (double v : block.values)
    if (!std::isfinite(v)) throw InputError(name + " block for pair " + block.pair_id + " is not finite");
  auto& table = blocks_[idx(block.kind)];
  if (table.contains(block.pair_id))
    throw InputError("duplicate " + name + " block for pair " + block.pair_id);
  table.emplace(std::move(block.pair_id), std::move(block.values));
}

bool FeatureStore::has(std::string_view pair_id, AttributeKind kind) const {
  return blocks_[idx(kind)].find(pair_id) != blocks_[idx(kind)].end();
}

const std::vector<double>& FeatureStore::block(std::string_view pair_id, AttributeKind kind) const {
  const auto& table = blocks_[idx(kind)];
  const auto it = table.find(pair_id);
  if (it == table.end())
    throw MissingFeatureError("no " + std::string(kind_name(kind)) + " features for pair " +
                              std::string(pair_id));
  return it->second;
}

std::size_t FeatureStore::block_count(AttributeKind kind) const { return blocks_[idx(kind)].size(); }

FeatureStore FeatureStore::load(const std::filesystem::path& manifest) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(manifest));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(manifest.string() + ": " + e.what());
  }
  FeatureStore store(AttributeRegistry::from_json(j));
  const auto dir = manifest.parent_path();
  for (const auto& k : j.at("kinds")) {
    if (!k.contains("file")) continue;
    const auto kind = parse_kind(k.at("name").get<std::string>());
    const auto rows = read_feature_file(dir / k.at("file").get<std::string>(), store.registry().dim(kind));
    for (const auto& [pair_id, values] : rows) store.put({pair_id, kind, values});
  }
  return store;
}

void FeatureStore::save(const std::filesystem::path& dir, bool synthetic) const {
  auto j = registry_.to_json();
  j["synthetic"] = synthetic;
  for (std::size_t i = 0; i < kAttributeKindCount; ++i) {
    if (blocks_[i].empty()) continue;
    const auto file = std::string(kKindNames[i]) + ".tsv";
    j["kinds"][i]["file"] = file;
    std::map<std::string, std::vector<double>> rows(blocks_[i].begin(), blocks_[i].end());
    write_feature_file(dir / file, registry_.dim(kAllKinds[i]), rows);
  }
  OutputFile out(dir / "manifest.json");
  out.stream() << j.dump(2) << '\n';
  out.close();
}

namespace {

void check_distribution(std::span<const double> p, std::size_t expected, const char* what) {
  if (p.size() != expected)
    throw InputError(std::string(what) + " distribution has " + std::to_string(p.size()) +
                     " entries, expected " + std::to_string(expected));
  double sum = 0.0;
  for (double v : p) {
    if (!std::isfinite(v) || v < 0.0)
      throw InputError(std::string(what) + " distribution has a negative or non-finite entry");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-6)
    throw InputError(std::string(what) + " distribution sums to " + format_double(sum));
}

std::size_t argmax(std::span<const double> p) {
  return static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
}

}  // namespace

std::vector<double> derive_pair_age(std::span<const double> age_a, std::span<const double> age_b) {
  check_distribution(age_a, kAgeClassCount, "age");
  check_distribution(age_b, kAgeClassCount, "age");
  std::vector<double> out(age_a.begin(), age_a.end());
  out.insert(out.end(), age_b.begin(), age_b.end());
  std::array<double, 3> diff{};
  const auto ca = argmax(age_a);
  const auto cb = argmax(age_b);
  constexpr auto unknown = static_cast<std::size_t>(AgeClass::unknown);
  if (ca != unknown && cb != unknown) {
    const auto gap = ca > cb ? ca - cb : cb - ca;
    diff[gap <= 1 ? 0 : gap == 2 ? 1 : 2] = 1.0;
  }
  out.insert(out.end(), diff.begin(), diff.end());
  return out;
}

std::vector<double> derive_pair_gender(std::span<const double> gender_a,
                                       std::span<const double> gender_b) {
  check_distribution(gender_a, kGenderClassCount, "gender");
  check_distribution(gender_b, kGenderClassCount, "gender");
  std::vector<double> out(gender_a.begin(), gender_a.end());
  out.insert(out.end(), gender_b.begin(), gender_b.end());
  const bool same = argmax(gender_a) == argmax(gender_b);
  out.push_back(same ? 1.0 : 0.0);
  out.push_back(same ? 0.0 : 1.0);
  return out;
}

Standardizer Standardizer::fit(const FeatureStore& store, std::span<const std::string> train_ids,
                               std::span<const AttributeKind> kinds) {
  if (train_ids.empty()) throw InputError("cannot fit standardization on an empty training split");
  Standardizer s;
  const double n = static_cast<double>(train_ids.size());
  for (auto kind : canonical_kinds(kinds)) {
    const auto dim = store.registry().dim(kind);
    Stats st{std::vector<double>(dim, 0.0), std::vector<double>(dim, 1.0)};
    for (const auto& id : train_ids) {
      const auto& v = store.block(id, kind);
      for (std::size_t d = 0; d < dim; ++d) st.mean[d] += v[d];
    }
    for (auto& m : st.mean) m /= n;
    std::vector<double> var(dim, 0.0);
    for (const auto& id : train_ids) {
      const auto& v = store.block(id, kind);
      for (std::size_t d = 0; d < dim; ++d) {
        const double e = v[d] - st.mean[d];
        var[d] += e * e;
      }
    }
    for (std::size_t d = 0; d < dim; ++d) {
      const double sd = std::sqrt(var[d] / n);
      if (sd > 1e-12 * std::max(1.0, std::abs(st.mean[d]))) {
        st.scale[d] = sd;
      } else {
        st.mean[d] = 0.0;
        st.scale[d] = 1.0;
      }
    }
    s.stats_[idx(kind)] = std::move(st);
  }
  return s;
}

const Standardizer::Stats& Standardizer::stats(AttributeKind kind) const {
  const auto& st = stats_[idx(kind)];
  if (!st) throw MissingFeatureError("no standardization statistics for " + std::string(kind_name(kind)));
  return *st;
}

void Standardizer::apply(AttributeKind kind, std::span<double> values) const {
  const auto& st = stats(kind);
  if (values.size() != st.mean.size())
    throw ShapeError("standardization of " + std::string(kind_name(kind)) + " expects " +
                     std::to_string(st.mean.size()) + " values");
  for (std::size_t d = 0; d < values.size(); ++d) values[d] = (values[d] - st.mean[d]) / st.scale[d];
}

nlohmann::json Standardizer::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  for (std::size_t i = 0; i < kAttributeKindCount; ++i) {
    if (!stats_[i]) continue;
    nlohmann::json mean = nlohmann::json::array();
    nlohmann::json scale = nlohmann::json::array();
    for (double v : stats_[i]->mean) mean.push_back(v);
    for (double v : stats_[i]->scale) scale.push_back(v);
    j[std::string(kKindNames[i])] = {{"mean", mean}, {"scale", scale}};
  }
  return j;
}

Standardizer Standardizer::from_json(const nlohmann::json& j) {
  Standardizer s;
  for (const auto& [name, body] : j.items()) {
    Stats st;
    for (const auto& v : body.at("mean")) st.mean.push_back(v.get<double>());
    for (const auto& v : body.at("scale")) st.scale.push_back(v.get<double>());
    if (st.mean.size() != st.scale.size()) throw ParseError("standardizer arrays differ in length");
    s.stats_[idx(parse_kind(name))] = std::move(st);
  }
  return s;
}

std::span<const double> FusedVector::slice(AttributeKind kind) const {
  for (std::size_t k = 0; k < kinds.size(); ++k)
    if (kinds[k] == kind)
      return std::span<const double>(values).subspan(offsets[k], offsets[k + 1] - offsets[k]);
  throw MissingFeatureError("kind " + std::string(kind_name(kind)) + " not fused for pair " + pair_id);
}

FusedVector fuse(const FeatureStore& store, std::string_view pair_id,
                 std::span<const AttributeKind> kinds, const Standardizer* standardizer) {
  FusedVector out;
  out.pair_id = std::string(pair_id);
  out.kinds = canonical_kinds(kinds);
  out.values.reserve(store.registry().total_dim(out.kinds));
  for (auto kind : out.kinds) {
    const auto& block = store.block(pair_id, kind);
    out.offsets.push_back(out.values.size());
    out.values.insert(out.values.end(), block.begin(), block.end());
    if (standardizer)
      standardizer->apply(kind, std::span<double>(out.values).subspan(out.offsets.back()));
  }
  out.offsets.push_back(out.values.size());
  return out;
}

}  // namespace relscope
