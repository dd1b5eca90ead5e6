#include "relscope/eval.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "relscope/errors.hpp"
#include "relscope/tsv.hpp"

namespace relscope {

std::string_view task_name(EvalTask task) {
  switch (task) {
    case EvalTask::relation: return "relation";
    case EvalTask::domain: return "domain";
    case EvalTask::generalization: return "generalization";
  }
  return "?";
}

std::string_view mode_name(EvalMode mode) {
  return mode == EvalMode::strict ? "strict" : "any-of-set";
}

EvalMode parse_mode(std::string_view s) {
  if (s == "strict") return EvalMode::strict;
  if (s == "any-of-set") return EvalMode::any_of_set;
  throw InputError("unknown eval mode '" + std::string(s) + "' (expected any-of-set or strict)");
}

namespace {

using TruthFn = std::function<int(const GroundTruth&, int predicted)>;

std::map<std::string, int> index_predictions(std::span<const LabeledPrediction> predictions,
                                             int n_classes) {
  std::map<std::string, int> out;
  for (const auto& p : predictions) {
    if (p.label < 0 || p.label >= n_classes)
      throw EvalError("prediction for pair '" + p.pair_id + "' has out-of-range label " +
                      std::to_string(p.label));
    if (!out.emplace(p.pair_id, p.label).second)
      throw EvalError("duplicate prediction for pair '" + p.pair_id + "'");
  }
  return out;
}

EvalReport tally(std::span<const LabeledPrediction> predictions, std::span<const GroundTruth> truth,
                 std::vector<std::string> class_names, EvalTask task, EvalMode mode,
                 const TruthFn& effective_truth) {
  const int k = static_cast<int>(class_names.size());
  auto pred = index_predictions(predictions, k);
  EvalReport r;
  r.task = task;
  r.mode = mode;
  r.class_names = std::move(class_names);
  r.confusion.assign(k, std::vector<std::size_t>(k, 0));
  std::map<std::string, bool> seen;
  for (const auto& g : truth) {
    auto it = pred.find(g.pair_id);
    if (it == pred.end()) throw EvalError("missing prediction for pair '" + g.pair_id + "'");
    if (!seen.emplace(g.pair_id, true).second)
      throw EvalError("duplicate ground truth for pair '" + g.pair_id + "'");
    int t = effective_truth(g, it->second);
    ++r.confusion[t][it->second];
  }
  for (const auto& [id, _] : pred)
    if (!seen.count(id)) throw EvalError("prediction for pair '" + id + "' has no ground truth");

  r.per_class_accuracy.assign(k, std::nan(""));
  r.per_class_count.assign(k, 0);
  double macro = 0.0;
  std::size_t present = 0;
  for (int c = 0; c < k; ++c) {
    std::size_t row = 0;
    for (auto v : r.confusion[c]) row += v;
    r.per_class_count[c] = row;
    r.n_test += row;
    r.n_correct += r.confusion[c][c];
    if (row > 0) {
      r.per_class_accuracy[c] = static_cast<double>(r.confusion[c][c]) / static_cast<double>(row);
      macro += r.per_class_accuracy[c];
      ++present;
    }
  }
  r.accuracy = r.n_test ? static_cast<double>(r.n_correct) / static_cast<double>(r.n_test) : 0.0;
  r.macro_accuracy = present ? macro / static_cast<double>(present) : 0.0;
  return r;
}

std::string pct(double v) {
  if (std::isnan(v)) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f%%", 100.0 * v);
  return buf;
}

}  // namespace

EvalReport evaluate_relations(std::span<const LabeledPrediction> predictions,
                              std::span<const GroundTruth> truth, const Taxonomy& taxonomy,
                              EvalMode mode) {
  auto names = taxonomy.relation_names();
  return tally(predictions, truth, {names.begin(), names.end()}, EvalTask::relation, mode,
               [mode](const GroundTruth& g, int p) {
                 if (mode == EvalMode::any_of_set &&
                     g.labels.contains(RelationId{static_cast<std::uint8_t>(p)}))
                   return p;
                 return static_cast<int>(g.primary.index);
               });
}

EvalReport evaluate_domains(std::span<const LabeledPrediction> predictions,
                            std::span<const GroundTruth> truth, const Taxonomy& taxonomy,
                            EvalMode mode, EvalTask task) {
  auto names = taxonomy.domain_names();
  return tally(predictions, truth, {names.begin(), names.end()}, task, mode,
               [mode, &taxonomy](const GroundTruth& g, int p) {
                 if (mode == EvalMode::any_of_set)
                   for (auto d : taxonomy.domains_of(g.labels))
                     if (d.index == p) return p;
                 return static_cast<int>(g.domain.index);
               });
}

std::vector<LabeledPrediction> coarsen(std::span<const LabeledPrediction> relation_predictions,
                                       const Taxonomy& taxonomy) {
  std::vector<LabeledPrediction> out;
  out.reserve(relation_predictions.size());
  for (const auto& p : relation_predictions) {
    if (p.label < 0 || static_cast<std::size_t>(p.label) >= taxonomy.relation_count())
      throw EvalError("prediction for pair '" + p.pair_id + "' has out-of-range relation " +
                      std::to_string(p.label));
    out.push_back({p.pair_id, taxonomy.domain_of(RelationId{static_cast<std::uint8_t>(p.label)}).index});
  }
  return out;
}

nlohmann::json EvalReport::to_json() const {
  nlohmann::json per = nlohmann::json::object();
  for (std::size_t c = 0; c < class_names.size(); ++c)
    per[class_names[c]] = {{"n", per_class_count[c]},
                           {"accuracy", std::isnan(per_class_accuracy[c])
                                            ? nlohmann::json(nullptr)
                                            : nlohmann::json(per_class_accuracy[c])}};
  return {{"task", task_name(task)},
          {"mode", mode_name(mode)},
          {"n_test", n_test},
          {"n_correct", n_correct},
          {"accuracy", accuracy},
          {"macro_accuracy", macro_accuracy},
          {"classes", class_names},
          {"per_class", per},
          {"confusion", confusion}};
}

std::string EvalReport::to_text() const {
  std::ostringstream os;
  os << task_name(task) << " accuracy (" << mode_name(mode) << "): " << pct(accuracy) << "  ("
     << n_correct << "/" << n_test << "), macro " << pct(macro_accuracy) << "\n";
  std::size_t w = 5;
  for (const auto& n : class_names) w = std::max(w, n.size());
  char line[256];
  for (std::size_t c = 0; c < class_names.size(); ++c) {
    std::snprintf(line, sizeof line, "  %-*s %6zu %7s\n", static_cast<int>(w), class_names[c].c_str(),
                  per_class_count[c], pct(per_class_accuracy[c]).c_str());
    os << line;
  }
  return os.str();
}

GeneralizationReport generalization_eval(std::span<const SplitManifest> manifests,
                                         std::span<const SvmModel> models,
                                         const FeatureLookup& features,
                                         std::span<const GroundTruth> truth, const Taxonomy& taxonomy,
                                         EvalMode mode) {
  if (manifests.size() != models.size())
    throw EvalError("got " + std::to_string(manifests.size()) + " manifests but " +
                    std::to_string(models.size()) + " models");
  if (manifests.empty()) throw EvalError("no generalization runs to evaluate");
  std::map<std::string, const GroundTruth*> by_id;
  for (const auto& g : truth) by_id[g.pair_id] = &g;

  GeneralizationReport rep;
  std::vector<LabeledPrediction> pooled_pred;
  std::vector<GroundTruth> pooled_truth;
  for (std::size_t k = 0; k < manifests.size(); ++k) {
    const auto& m = manifests[k];
    const auto& model = models[k];
    if (m.kind != SplitKind::sr || !m.held_out)
      throw EvalError("manifest '" + m.name + "' is not a single-relation split");
    auto split = model.metadata.value("split", std::string{});
    if (split != m.name)
      throw EvalError("model " + std::to_string(k) + " was trained on '" + split +
                      "', not on manifest '" + m.name + "'");
    if (model.metadata.value("task", std::string{}) != "domain")
      throw EvalError("model for '" + m.name + "' is not a domain model");

    std::vector<LabeledPrediction> pred;
    std::vector<GroundTruth> gt;
    for (const auto& id : m.test) {
      auto it = by_id.find(id);
      if (it == by_id.end()) throw EvalError("test pair '" + id + "' has no ground truth");
      auto x = features(k, id);
      pred.push_back({id + "@" + m.name, predict(model, x).label});
      GroundTruth g = *it->second;
      g.pair_id = pred.back().pair_id;
      gt.push_back(g);
    }
    auto r = evaluate_domains(pred, gt, taxonomy, mode, EvalTask::generalization);
    rep.per_relation.push_back({*m.held_out, m.name, r.n_test, r.n_correct, r.accuracy});
    pooled_pred.insert(pooled_pred.end(), pred.begin(), pred.end());
    pooled_truth.insert(pooled_truth.end(), gt.begin(), gt.end());
  }
  rep.pooled = evaluate_domains(pooled_pred, pooled_truth, taxonomy, mode, EvalTask::generalization);
  double sum = 0.0;
  for (const auto& h : rep.per_relation) sum += h.accuracy;
  rep.macro_accuracy = sum / static_cast<double>(rep.per_relation.size());
  return rep;
}

nlohmann::json GeneralizationReport::to_json(const Taxonomy& taxonomy) const {
  auto j = pooled.to_json();
  j["macro_accuracy"] = macro_accuracy;
  nlohmann::json per = nlohmann::json::array();
  for (const auto& h : per_relation)
    per.push_back({{"held_out", taxonomy.relation_name(h.relation)},
                   {"split", h.split},
                   {"n_test", h.n_test},
                   {"n_correct", h.n_correct},
                   {"accuracy", h.accuracy}});
  j["per_held_out"] = per;
  return j;
}

std::string GeneralizationReport::to_text(const Taxonomy& taxonomy) const {
  std::ostringstream os;
  os << "generalization accuracy (" << mode_name(pooled.mode) << "): " << pct(pooled.accuracy)
     << "  (" << pooled.n_correct << "/" << pooled.n_test << "), macro " << pct(macro_accuracy)
     << "\n";
  std::size_t w = 8;
  for (const auto& h : per_relation) w = std::max(w, taxonomy.relation_name(h.relation).size());
  char line[256];
  for (const auto& h : per_relation) {
    std::snprintf(line, sizeof line, "  %-*s %6zu %7s\n", static_cast<int>(w),
                  taxonomy.relation_name(h.relation).c_str(), h.n_test, pct(h.accuracy).c_str());
    os << line;
  }
  return os.str();
}

std::vector<ContributionPoint> contribution_points(
    std::span<const std::pair<AttributeKind, AccuracyPair>> single, AccuracyPair all) {
  auto check = [](double v, const std::string& what) {
    if (!(v > 0.0 && v <= 1.0))
      throw EvalError(what + " accuracy " + format_double(v) + " is outside (0, 1]");
  };
  check(all.relation, "all-attribute relation");
  check(all.domain, "all-attribute domain");
  std::vector<ContributionPoint> out;
  for (const auto& [kind, acc] : single) {
    std::string name(kind_name(kind));
    check(acc.relation, name + " relation");
    check(acc.domain, name + " domain");
    out.push_back({kind, acc.domain / all.domain, acc.relation / all.relation});
  }
  return out;
}

void write_contributions(const std::filesystem::path& path, std::span<const ContributionPoint> points) {
  OutputFile out(path);
  out.stream() << "attribute\tx\ty\n";
  for (const auto& p : points)
    out.stream() << kind_name(p.attribute) << '\t' << format_double(p.x) << '\t' << format_double(p.y)
                 << '\n';
  out.close();
}

}  // namespace relscope
