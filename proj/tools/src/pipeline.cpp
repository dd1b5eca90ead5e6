#include "relscope/pipeline.hpp"

#include <chrono>
#include <ostream>

#include "relscope/errors.hpp"
#include "relscope/pair.hpp"
#include "relscope/statistics.hpp"
#include "relscope/tsv.hpp"

namespace relscope::cli {

namespace fs = std::filesystem;

std::string_view task_name(Task t) { return t == Task::relation ? "relation" : "domain"; }

Task parse_task(std::string_view s) {
  if (s == "relation") return Task::relation;
  if (s == "domain") return Task::domain;
  throw InputError("unknown task '" + std::string(s) + "' (expected relation or domain)");
}

TruthIndex index_truth(std::span<const GroundTruth> truth) {
  TruthIndex out;
  for (const auto& g : truth) out.emplace(g.pair_id, g);
  return out;
}

std::vector<std::string> usable_ids(std::span<const std::string> ids, const TruthIndex& truth,
                                    bool include_cross_domain) {
  std::vector<std::string> out;
  for (const auto& id : ids) {
    auto it = truth.find(id);
    if (it == truth.end()) continue;
    if (it->second.cross_domain && !include_cross_domain) continue;
    out.push_back(id);
  }
  return out;
}

namespace {

int target(const GroundTruth& g, Task task) {
  return task == Task::relation ? g.primary.index : g.domain.index;
}

std::vector<AttributeKind> kinds_or_all(const std::vector<AttributeKind>& kinds) {
  if (kinds.empty()) return {all_kinds().begin(), all_kinds().end()};
  return canonical_kinds(kinds);
}

std::vector<AttributeKind> model_kinds(const SvmModel& model) {
  if (!model.metadata.contains("kinds")) throw InputError("model metadata lacks 'kinds'");
  std::vector<AttributeKind> kinds;
  for (const auto& k : model.metadata.at("kinds")) kinds.push_back(parse_kind(k.get<std::string>()));
  return kinds;
}

void fill(FeatureMatrix& x, std::vector<int>& y, const FeatureStore& store,
          std::span<const std::string> ids, const TruthIndex& truth, Task task,
          std::span<const AttributeKind> kinds, const Standardizer& std_) {
  for (const auto& id : ids) {
    auto v = fuse(store, id, kinds, &std_);
    x.push_row(v.values);
    y.push_back(target(truth.at(id), task));
  }
}

}  // namespace

TrainResult train_on_split(const FeatureStore& store, const SplitManifest& split,
                           const TruthIndex& truth, const TrainOptions& opts) {
  const auto kinds = kinds_or_all(opts.kinds);
  const auto train_ids = usable_ids(split.train, truth, opts.include_cross_domain);
  const auto val_ids = usable_ids(split.val, truth, opts.include_cross_domain);
  if (train_ids.empty()) throw TrainError("split '" + split.name + "' has no usable training pairs");

  const auto std_ = Standardizer::fit(store, train_ids, kinds);
  FeatureMatrix x_train, x_val;
  std::vector<int> y_train, y_val;
  fill(x_train, y_train, store, train_ids, truth, opts.task, kinds, std_);
  fill(x_val, y_val, store, val_ids, truth, opts.task, kinds, std_);

  TrainResult r;
  r.n_train = train_ids.size();
  r.n_val = val_ids.size();
  SvmConfig cfg = opts.svm;
  if (opts.lambda_grid.size() == 1) {
    cfg.lambda = opts.lambda_grid.front();
  } else if (opts.lambda_grid.size() > 1 && !val_ids.empty()) {
    r.selection = select_lambda(x_train, y_train, x_val, y_val, opts.lambda_grid, cfg);
    cfg.lambda = r.selection->lambda;
  }
  r.model = train(x_train, y_train, cfg);

  nlohmann::json names = nlohmann::json::array();
  for (auto k : kinds) names.push_back(kind_name(k));
  r.model.metadata = {{"task", task_name(opts.task)},
                      {"kinds", names},
                      {"standardizer", std_.to_json()},
                      {"split", split.name},
                      {"lambda", format_double17(cfg.lambda)},
                      {"include_cross_domain", opts.include_cross_domain},
                      {"n_train", r.n_train},
                      {"n_val", r.n_val}};
  if (r.selection) {
    nlohmann::json sel = nlohmann::json::array();
    for (std::size_t i = 0; i < r.selection->grid.size(); ++i)
      sel.push_back({{"lambda", format_double17(r.selection->grid[i])},
                     {"val_accuracy", r.selection->val_accuracy[i]}});
    r.model.metadata["lambda_selection"] = sel;
  }
  return r;
}

std::vector<double> model_features(const SvmModel& model, const FeatureStore& store,
                                   const std::string& pair_id) {
  const auto kinds = model_kinds(model);
  const auto std_ = Standardizer::from_json(model.metadata.at("standardizer"));
  return fuse(store, pair_id, kinds, &std_).values;
}

std::vector<LabeledPrediction> predict_pairs(const SvmModel& model, const FeatureStore& store,
                                             std::span<const std::string> ids) {
  const auto kinds = model_kinds(model);
  const auto std_ = Standardizer::from_json(model.metadata.at("standardizer"));
  std::vector<LabeledPrediction> out;
  out.reserve(ids.size());
  for (const auto& id : ids) out.push_back({id, predict(model, fuse(store, id, kinds, &std_).values).label});
  return out;
}

TestReports evaluate_model(const SvmModel& model, const FeatureStore& store,
                           const SplitManifest& split, const TruthIndex& truth,
                           const Taxonomy& taxonomy, EvalMode mode, bool include_cross_domain) {
  const auto task = parse_task(model.metadata.value("task", std::string{}));
  const auto ids = usable_ids(split.test, truth, include_cross_domain);
  if (ids.empty()) throw EvalError("split '" + split.name + "' has no usable test pairs");
  std::vector<GroundTruth> gt;
  for (const auto& id : ids) gt.push_back(truth.at(id));
  const auto pred = predict_pairs(model, store, ids);
  TestReports r;
  if (task == Task::relation) {
    r.primary = evaluate_relations(pred, gt, taxonomy, mode);
    r.coarsened = evaluate_domains(coarsen(pred, taxonomy), gt, taxonomy, mode);
  } else {
    r.primary = evaluate_domains(pred, gt, taxonomy, mode);
  }
  return r;
}

GeneralizationRun run_generalization(const FeatureStore& store,
                                     std::span<const SplitManifest> manifests,
                                     std::span<const GroundTruth> truth, const Taxonomy& taxonomy,
                                     const TrainOptions& opts, EvalMode mode) {
  const auto index = index_truth(truth);
  TrainOptions o = opts;
  o.task = Task::domain;
  GeneralizationRun run;
  std::vector<SplitManifest> filtered;
  for (const auto& m : manifests) {
    run.models.push_back(train_on_split(store, m, index, o).model);
    auto f = m;
    f.test = usable_ids(m.test, index, opts.include_cross_domain);
    filtered.push_back(std::move(f));
  }
  std::vector<std::vector<AttributeKind>> kinds;
  std::vector<Standardizer> standardizers;
  for (const auto& m : run.models) {
    kinds.push_back(model_kinds(m));
    standardizers.push_back(Standardizer::from_json(m.metadata.at("standardizer")));
  }
  FeatureLookup lookup = [&](std::size_t k, const std::string& id) {
    return fuse(store, id, kinds[k], &standardizers[k]).values;
  };
  std::vector<GroundTruth> gt(truth.begin(), truth.end());
  run.report = generalization_eval(filtered, run.models, lookup, gt, taxonomy, mode);
  return run;
}

namespace {

void write_json(const fs::path& path, const nlohmann::json& j) {
  OutputFile f(path);
  f.stream() << j.dump(2) << '\n';
  f.close();
}

void write_text(const fs::path& path, const std::string& text) {
  OutputFile f(path);
  f.stream() << text;
  f.close();
}

double seconds_since(std::chrono::steady_clock::time_point t) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

}  // namespace

RunAllResult run_all(const RunAllOptions& opts, const Taxonomy& taxonomy, const fs::path& out,
                     std::ostream& log) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto seed = opts.synth.seed;
  RunAllResult res;
  nlohmann::json summary;
  summary["seed"] = seed;
  summary["synth"] = opts.synth.to_json();

  auto corpus = generate(opts.synth, taxonomy);
  const auto paths = write_corpus(out / "synth", corpus, taxonomy);
  log << "[synth] " << corpus.pairs.size() << " pairs, " << corpus.annotations.size()
      << " annotator records -> " << (out / "synth").string() << "\n";

  const auto pairs = read_pairs(paths.pairs);
  const auto records = read_annotations(paths.annotations, taxonomy, &pairs);
  const auto table = compute_agreements(records, opts.threshold);
  const auto truth = consistency_filter(table.results, opts.threshold, taxonomy);
  write_groundtruth(out / "groundtruth.tsv", truth, taxonomy);
  const auto stats = label_statistics(records, taxonomy, &pairs,
                                      static_cast<int>(std::max<std::size_t>(opts.synth.n_annotators, 1)));
  write_json(out / "statistics.json", stats.to_json(taxonomy));
  write_text(out / "statistics.txt", stats.to_text(taxonomy));
  res.retained_fraction = stats.retained_fraction(opts.threshold);
  log << "[agree] " << truth.size() << " of " << stats.n_pairs << " pairs reach agr >= "
      << opts.threshold << "\n";

  const auto index = index_truth(truth);
  const auto albums = read_album_index(paths.albums);
  std::vector<std::string> test;
  for (const auto& id : read_id_list(paths.test_pairs))
    if (index.count(id)) test.push_back(id);
  const auto ac = make_ac_split(truth, albums, test, opts.val_albums, seed);
  save_manifest(out / "splits" / "ac.json", ac, taxonomy);
  const auto sr = make_sr_splits(truth, pairs, taxonomy, seed, opts.folds);
  std::vector<SplitManifest> sr_manifests;
  for (const auto& s : sr) {
    save_manifest(out / "splits" / "sr" / (s.manifest.name + ".json"), s.manifest, taxonomy);
    sr_manifests.push_back(s.manifest);
  }
  log << "[split] ac: " << ac.train.size() << "/" << ac.val.size() << "/" << ac.test.size()
      << " train/val/test; " << sr_manifests.size() << " single-relation splits\n";

  const auto store = FeatureStore::load(paths.features);
  {
    const auto kinds = kinds_or_all(opts.train.kinds);
    const auto train_ids = usable_ids(ac.train, index, opts.train.include_cross_domain);
    const auto std_ = Standardizer::fit(store, train_ids, kinds);
    std::map<std::string, std::vector<double>> rows;
    for (const auto* list : {&ac.train, &ac.val, &ac.test})
      for (const auto& id : *list) rows[id] = fuse(store, id, kinds, &std_).values;
    const auto dim = store.registry().total_dim(kinds);
    write_feature_file(out / "fused" / "ac.tsv", dim, rows);
    write_json(out / "fused" / "standardizer.json", std_.to_json());
    log << "[fuse] " << rows.size() << " pairs x " << dim << " dims\n";
  }

  TrainOptions rel_opts = opts.train;
  rel_opts.svm.seed = seed;
  rel_opts.task = Task::relation;
  TrainOptions dom_opts = rel_opts;
  dom_opts.task = Task::domain;
  const auto rel = train_on_split(store, ac, index, rel_opts);
  const auto dom = train_on_split(store, ac, index, dom_opts);
  save_model(out / "models" / "relation.model", rel.model);
  save_model(out / "models" / "domain.model", dom.model);
  log << "[train] relation lambda " << format_double(rel.model.config.lambda) << ", domain lambda "
      << format_double(dom.model.config.lambda) << "\n";

  const auto rel_rep = evaluate_model(rel.model, store, ac, index, taxonomy, opts.mode,
                                      opts.train.include_cross_domain);
  const auto dom_rep = evaluate_model(dom.model, store, ac, index, taxonomy, opts.mode,
                                      opts.train.include_cross_domain);
  write_json(out / "reports" / "relation.json", rel_rep.primary.to_json());
  write_text(out / "reports" / "relation.txt", rel_rep.primary.to_text());
  write_json(out / "reports" / "domain.json", dom_rep.primary.to_json());
  write_text(out / "reports" / "domain.txt", dom_rep.primary.to_text());
  write_json(out / "reports" / "domain_coarsened.json", rel_rep.coarsened->to_json());
  res.relation_accuracy = rel_rep.primary.accuracy;
  res.domain_accuracy = dom_rep.primary.accuracy;
  res.coarsened_domain_accuracy = rel_rep.coarsened->accuracy;
  log << "[eval] relation " << format_double(res.relation_accuracy) << ", domain "
      << format_double(res.domain_accuracy) << ", domain via relations "
      << format_double(res.coarsened_domain_accuracy) << "\n";

  if (opts.generalization) {
    auto gen = run_generalization(store, sr_manifests, truth, taxonomy, rel_opts, opts.mode);
    for (std::size_t k = 0; k < gen.models.size(); ++k)
      save_model(out / "models" / "sr" / (sr_manifests[k].name + ".model"), gen.models[k]);
    write_json(out / "reports" / "generalization.json", gen.report.to_json(taxonomy));
    write_text(out / "reports" / "generalization.txt", gen.report.to_text(taxonomy));
    res.generalization_accuracy = gen.report.pooled.accuracy;
    res.generalization_macro = gen.report.macro_accuracy;
    log << "[generalize] micro " << format_double(res.generalization_accuracy) << ", macro "
        << format_double(res.generalization_macro) << "\n";
  }

  if (opts.contributions) {
    std::vector<std::pair<AttributeKind, AccuracyPair>> single;
    OutputFile acc_file(out / "reports" / "contribution_accuracies.tsv");
    acc_file.stream() << "attribute\trelation\tdomain\n";
    for (auto kind : kinds_or_all(opts.train.kinds)) {
      auto ro = rel_opts;
      ro.kinds = {kind};
      auto d_o = dom_opts;
      d_o.kinds = {kind};
      const auto r = evaluate_model(train_on_split(store, ac, index, ro).model, store, ac, index,
                                    taxonomy, opts.mode, opts.train.include_cross_domain);
      const auto d = evaluate_model(train_on_split(store, ac, index, d_o).model, store, ac, index,
                                    taxonomy, opts.mode, opts.train.include_cross_domain);
      single.push_back({kind, {r.primary.accuracy, d.primary.accuracy}});
      acc_file.stream() << kind_name(kind) << '\t' << format_double(r.primary.accuracy) << '\t'
                        << format_double(d.primary.accuracy) << '\n';
    }
    acc_file.stream() << "all\t" << format_double(res.relation_accuracy) << '\t'
                      << format_double(res.domain_accuracy) << '\n';
    acc_file.close();
    res.contributions = contribution_points(single, {res.relation_accuracy, res.domain_accuracy});
    write_contributions(out / "reports" / "contributions.tsv", res.contributions);
    log << "[contrib] " << res.contributions.size() << " attribute points\n";
  }

  summary["retained_fraction"] = res.retained_fraction;
  summary["n_groundtruth"] = truth.size();
  summary["ac"] = {{"train", ac.train.size()}, {"val", ac.val.size()}, {"test", ac.test.size()}};
  summary["relation_accuracy"] = res.relation_accuracy;
  summary["domain_accuracy"] = res.domain_accuracy;
  summary["domain_accuracy_coarsened"] = res.coarsened_domain_accuracy;
  summary["eval_mode"] = mode_name(opts.mode);
  if (opts.generalization) {
    summary["generalization_accuracy"] = res.generalization_accuracy;
    summary["generalization_macro_accuracy"] = res.generalization_macro;
  }
  if (opts.contributions) {
    nlohmann::json pts = nlohmann::json::object();
    for (const auto& p : res.contributions) pts[std::string(kind_name(p.attribute))] = {p.x, p.y};
    summary["contributions"] = pts;
  }
  write_json(out / "summary.json", summary);
  res.summary = std::move(summary);
  log << "[done] " << format_double(seconds_since(t0)) << " s\n";
  return res;
}

}  // namespace relscope::cli
