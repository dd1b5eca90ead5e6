#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "relscope/errors.hpp"
#include "relscope/pair.hpp"
#include "relscope/pipeline.hpp"
#include "relscope/statistics.hpp"
#include "relscope/tsv.hpp"

namespace relscope::cli {

namespace fs = std::filesystem;

namespace {

// --config reads JSON: top-level keys are global options, nested objects
// are subcommand sections, e.g. {"seed": 7, "train": {"epochs": 50}}.
class JsonConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App* app, bool default_also, bool, std::string) const override {
    nlohmann::json j = nlohmann::json::object();
    for (const CLI::Option* opt : app->get_options({})) {
      if (!opt->get_configurable() || opt->get_lnames().empty()) continue;
      const auto& name = opt->get_lnames().front();
      if (opt->count() > 0) {
        auto res = opt->results();
        j[name] = res.size() == 1 ? nlohmann::json(res.front()) : nlohmann::json(res);
      } else if (default_also && !opt->get_default_str().empty()) {
        j[name] = opt->get_default_str();
      }
    }
    for (const CLI::App* sub : app->get_subcommands({})) {
      auto s = nlohmann::json::parse(to_config(sub, default_also, false, ""));
      if (!s.empty()) j[sub->get_name()] = s;
    }
    return j.dump(2);
  }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    nlohmann::json j;
    try {
      input >> j;
    } catch (const nlohmann::json::exception& e) {
      throw CLI::ConversionError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw CLI::ConversionError("config must be a JSON object");
    std::vector<CLI::ConfigItem> items;
    collect(j, {}, items);
    return items;
  }

 private:
  static void collect(const nlohmann::json& j, const std::vector<std::string>& parents,
                      std::vector<CLI::ConfigItem>& items) {
    for (const auto& [key, value] : j.items()) {
      if (value.is_object()) {
        auto p = parents;
        p.push_back(key);
        collect(value, p, items);
        continue;
      }
      CLI::ConfigItem item;
      item.parents = parents;
      item.name = key;
      auto scalar = [](const nlohmann::json& v) {
        if (v.is_string()) return v.get<std::string>();
        if (v.is_boolean()) return std::string(v.get<bool>() ? "true" : "false");
        if (v.is_number()) return v.dump();
        throw CLI::ConversionError("unsupported config value " + v.dump());
      };
      if (value.is_array())
        for (const auto& v : value) item.inputs.push_back(scalar(v));
      else
        item.inputs.push_back(scalar(value));
      items.push_back(std::move(item));
    }
  }
};

struct Globals {
  std::string out = "relscope-out";
  std::uint64_t seed = 0;
  std::string taxonomy;
};

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

std::vector<std::string> intersect_truth(const std::vector<std::string>& ids, const TruthIndex& truth) {
  std::vector<std::string> out;
  for (const auto& id : ids)
    if (truth.count(id)) out.push_back(id);
  return out;
}

struct SpecFlags {
  std::string spec_file;
  std::optional<std::size_t> n_pairs;
  std::optional<double> epsilon;
  std::optional<double> delta;
  std::optional<std::size_t> annotators;

  void add(CLI::App* app) {
    app->add_option("--spec", spec_file, "Synthetic spec JSON (missing keys keep defaults)")
        ;
    app->add_option("--n-pairs", n_pairs, "Number of pairs [800]");
    app->add_option("--epsilon", epsilon, "Annotator noise rate [0.1]");
    app->add_option("--delta", delta, "Minimum prototype distance in sigma units [10]");
    app->add_option("--annotators", annotators, "Annotators per pair [5]");
  }

  SynthSpec build(std::uint64_t seed) const {
    SynthSpec s;
    if (!spec_file.empty()) {
      try {
        s = SynthSpec::from_json(nlohmann::json::parse(read_text_file(spec_file)));
      } catch (const nlohmann::json::parse_error& e) {
        throw SpecError(spec_file + ": " + e.what());
      }
    }
    if (n_pairs) s.n_pairs = *n_pairs;
    if (epsilon) s.epsilon = *epsilon;
    if (delta) s.delta = *delta;
    if (annotators) s.n_annotators = *annotators;
    s.seed = seed;
    return s;
  }
};

struct TrainFlags {
  std::size_t epochs = 30;
  std::vector<double> lambdas;
  std::string kinds = "all";
  bool balance = false;
  bool include_cross_domain = false;

  void add(CLI::App* app) {
    app->add_option("--epochs", epochs, "SVM training epochs")->capture_default_str()->check(CLI::PositiveNumber);
    app->add_option("--lambda", lambdas,
                    "Regularization candidates; several are chosen between on the validation split "
                    "[1e-4 1e-3 1e-2 1e-1 1]");
    app->add_option("--kinds", kinds, "Attribute kinds to fuse: 'all' or a comma list")->capture_default_str();
    app->add_flag("--balance", balance, "Weight classes to equal mass in each binary problem");
    app->add_flag("--include-cross-domain", include_cross_domain,
                  "Keep pairs whose consensus set spans several domains");
  }

  TrainOptions build(Task task, std::uint64_t seed) const {
    TrainOptions o;
    o.task = task;
    o.kinds = parse_kind_list(kinds);
    o.svm.epochs = epochs;
    o.svm.seed = seed;
    o.svm.balance_classes = balance;
    if (!lambdas.empty()) o.lambda_grid = lambdas;
    for (double l : o.lambda_grid)
      if (!(l > 0.0)) throw InputError("lambda must be positive");
    o.include_cross_domain = include_cross_domain;
    return o;
  }
};

const CLI::IsMember kModes({"any-of-set", "strict"});
const CLI::IsMember kTasks({"relation", "domain"});

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Social relation benchmark pipeline: agreement, splits, fusion, SVM training, evaluation",
               "relscope"};
  app.config_formatter(std::make_shared<JsonConfig>());
  app.set_config("--config", "", "JSON config file");
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--out", g.out, "Output directory")->envname("RELSCOPE_OUT")->capture_default_str();
  app.add_option("--seed", g.seed, "Seed for every random draw")->capture_default_str();
  app.add_option("--taxonomy", g.taxonomy, "Taxonomy manifest JSON (built-in 5 domains / 16 relations otherwise)")
      ;

  std::string annotations, pairs_path, truth_path, albums_path, test_path, features, split_path,
      model_path, model_out, task = "relation", mode = "any-of-set", table_path;
  std::vector<std::string> split_paths;
  int threshold = kDefaultConsistency;
  int max_consistency = 5;
  std::size_t val_albums = kDefaultValAlbums, folds = kDefaultFolds;
  bool percent = false, no_contrib = false, no_generalize = false;
  TrainFlags train_flags;
  SpecFlags spec_flags;

  auto* agree = app.add_subcommand("agree", "Compute agreement and keep pairs reaching the threshold");
  agree->add_option("--annotations", annotations, "Annotation TSV")->required();
  agree->add_option("--pairs", pairs_path, "Pairs TSV, to reject unknown pair ids");
  agree->add_option("--threshold", threshold, "Consistency threshold")->capture_default_str()->check(CLI::Range(1, 5));

  auto* stats = app.add_subcommand("stats", "Label statistics of an annotation table");
  stats->add_option("--annotations", annotations, "Annotation TSV")->required();
  stats->add_option("--pairs", pairs_path, "Pairs TSV, for photo and identity counts");
  stats->add_option("--max-consistency", max_consistency, "Consistency levels to report")
      ->capture_default_str()->check(CLI::PositiveNumber);
  stats->add_option("--threshold", threshold, "Threshold for the retained fraction")
      ->capture_default_str()->check(CLI::Range(1, 5));

  auto* split_ac = app.add_subcommand("split-ac", "All-class train/val/test split");
  split_ac->add_option("--groundtruth", truth_path, "Ground truth TSV")->required();
  split_ac->add_option("--albums", albums_path, "Album index TSV")->required();
  split_ac->add_option("--test-list", test_path, "Preserved test pair list")->required();
  split_ac->add_option("--val-albums", val_albums, "Albums drawn for validation")->capture_default_str();

  auto* split_sr = app.add_subcommand("split-sr", "Leave-one-relation-out splits");
  split_sr->add_option("--groundtruth", truth_path, "Ground truth TSV")->required();
  split_sr->add_option("--pairs", pairs_path, "Pairs TSV")->required();
  split_sr->add_option("--folds", folds, "Identity folds")->capture_default_str()->check(CLI::Range(2, 1000));

  auto* fuse_cmd = app.add_subcommand("fuse", "Write standardized fused features of a split");
  fuse_cmd->add_option("--features", features, "Feature manifest JSON")->required();
  fuse_cmd->add_option("--split", split_path, "Split manifest JSON")->required();
  fuse_cmd->add_option("--kinds", train_flags.kinds, "Attribute kinds: 'all' or a comma list")->capture_default_str();

  auto* train_cmd = app.add_subcommand("train", "Train a one-vs-rest SVM on a split");
  train_cmd->add_option("--features", features, "Feature manifest JSON")->required();
  train_cmd->add_option("--split", split_path, "Split manifest JSON")->required();
  train_cmd->add_option("--groundtruth", truth_path, "Ground truth TSV")->required();
  train_cmd->add_option("--task", task, "relation or domain")->capture_default_str()->check(kTasks);
  train_cmd->add_option("--model-out", model_out, "Model path [<out>/models/<split>-<task>.model]");
  train_flags.add(train_cmd);

  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a model on a split's test pairs");
  eval_cmd->add_option("--model", model_path, "Model file")->required();
  eval_cmd->add_option("--features", features, "Feature manifest JSON")->required();
  eval_cmd->add_option("--split", split_path, "Split manifest JSON")->required();
  eval_cmd->add_option("--groundtruth", truth_path, "Ground truth TSV")->required();
  eval_cmd->add_option("--eval-mode", mode, "any-of-set or strict")->capture_default_str()->check(kModes);
  eval_cmd->add_flag("--include-cross-domain", train_flags.include_cross_domain,
                     "Keep pairs whose consensus set spans several domains");

  auto* gen_cmd = app.add_subcommand("generalize", "Train and evaluate domain models on single-relation splits");
  gen_cmd->add_option("--features", features, "Feature manifest JSON")->required();
  gen_cmd->add_option("--groundtruth", truth_path, "Ground truth TSV")->required();
  gen_cmd->add_option("--splits", split_paths, "Single-relation manifests, or a directory of them")
      ->required();
  gen_cmd->add_option("--eval-mode", mode, "any-of-set or strict")->capture_default_str()->check(kModes);
  train_flags.add(gen_cmd);

  auto* contrib = app.add_subcommand("contrib", "Normalized attribute contribution points");
  contrib->add_option("--table", table_path, "TSV `attribute relation domain` with an `all` row")
      ->required();
  contrib->add_flag("--percent", percent, "Table accuracies are percentages");

  auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus");
  spec_flags.add(synth);

  auto* run_all_cmd = app.add_subcommand("run-all", "synth, agree, split, fuse, train, eval, generalize, contrib");
  spec_flags.add(run_all_cmd);
  run_all_cmd->add_option("--threshold", threshold, "Consistency threshold")->capture_default_str()->check(CLI::Range(1, 5));
  run_all_cmd->add_option("--val-albums", val_albums, "Albums drawn for validation")->capture_default_str();
  run_all_cmd->add_option("--folds", folds, "Identity folds")->capture_default_str()->check(CLI::Range(2, 1000));
  run_all_cmd->add_option("--eval-mode", mode, "any-of-set or strict")->capture_default_str()->check(kModes);
  run_all_cmd->add_flag("--no-contrib", no_contrib, "Skip the single-attribute models");
  run_all_cmd->add_flag("--no-generalize", no_generalize, "Skip the single-relation splits");
  train_flags.add(run_all_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }

  try {
    const Taxonomy taxonomy = g.taxonomy.empty() ? Taxonomy::builtin() : Taxonomy::load(g.taxonomy);
    const fs::path outdir = g.out;

    if (agree->parsed()) {
      std::optional<PairTable> pairs;
      if (!pairs_path.empty()) pairs = read_pairs(pairs_path);
      const auto records = read_annotations(annotations, taxonomy, pairs ? &*pairs : nullptr);
      const auto table = compute_agreements(records, threshold);
      const auto truth = consistency_filter(table.results, threshold, taxonomy);
      write_groundtruth(outdir / "groundtruth.tsv", truth, taxonomy);
      const std::size_t total = table.results.size() + table.skipped.size();
      const double retained = total ? static_cast<double>(truth.size()) / static_cast<double>(total) : 0.0;
      nlohmann::json rows = nlohmann::json::array();
      for (const auto& r : table.results)
        rows.push_back({{"pair_id", r.pair_id},
                        {"agr", r.agr},
                        {"majority", format_relation_set(r.majority, taxonomy)},
                        {"tied", r.tied},
                        {"annotators", r.n_annotators}});
      write_json(outdir / "agreement.json", {{"threshold", threshold},
                                             {"n_pairs", total},
                                             {"n_skipped", table.skipped.size()},
                                             {"n_groundtruth", truth.size()},
                                             {"retained_fraction", retained},
                                             {"skipped", table.skipped},
                                             {"pairs", rows}});
      char buf[128];
      std::snprintf(buf, sizeof buf, "retained fraction: %.4f (%zu of %zu pairs with agr >= %d)\n", retained,
                    truth.size(), total, threshold);
      out << buf;
    } else if (stats->parsed()) {
      std::optional<PairTable> pairs;
      if (!pairs_path.empty()) pairs = read_pairs(pairs_path);
      const auto records = read_annotations(annotations, taxonomy, pairs ? &*pairs : nullptr);
      const auto report = label_statistics(records, taxonomy, pairs ? &*pairs : nullptr, max_consistency);
      auto j = report.to_json(taxonomy);
      j["retained_fraction"] = report.retained_fraction(threshold);
      write_json(outdir / "statistics.json", j);
      write_text(outdir / "statistics.txt", report.to_text(taxonomy));
      out << report.to_text(taxonomy);
    } else if (split_ac->parsed()) {
      const auto truth = read_groundtruth(truth_path, taxonomy);
      const auto index = index_truth(truth);
      const auto listed = read_id_list(test_path);
      const auto test = intersect_truth(listed, index);
      const auto m = make_ac_split(truth, read_album_index(albums_path), test, val_albums, g.seed);
      save_manifest(outdir / "splits" / "ac.json", m, taxonomy);
      out << "ac: " << m.train.size() << " train, " << m.val.size() << " val, " << m.test.size()
          << " test (" << listed.size() - test.size() << " listed test pairs lack ground truth)\n";
    } else if (split_sr->parsed()) {
      const auto truth = read_groundtruth(truth_path, taxonomy);
      const auto splits = make_sr_splits(truth, read_pairs(pairs_path), taxonomy, g.seed, folds);
      for (const auto& s : splits) {
        save_manifest(outdir / "splits" / "sr" / (s.manifest.name + ".json"), s.manifest, taxonomy);
        out << s.manifest.name << ": " << s.manifest.train.size() << " train, " << s.manifest.val.size()
            << " val, " << s.manifest.test.size() << " test, " << s.manifest.discarded.size()
            << " discarded\n";
      }
    } else if (fuse_cmd->parsed()) {
      const auto store = FeatureStore::load(features);
      const auto m = load_manifest(split_path, taxonomy);
      const auto kinds = parse_kind_list(train_flags.kinds);
      const auto std_ = Standardizer::fit(store, m.train, kinds);
      std::map<std::string, std::vector<double>> rows;
      for (const auto* list : {&m.train, &m.val, &m.test})
        for (const auto& id : *list) rows[id] = fuse(store, id, kinds, &std_).values;
      const auto dim = store.registry().total_dim(kinds);
      write_feature_file(outdir / "fused" / (m.name + ".tsv"), dim, rows);
      write_json(outdir / "fused" / (m.name + ".standardizer.json"), std_.to_json());
      out << "fused " << rows.size() << " pairs x " << dim << " dims\n";
    } else if (train_cmd->parsed()) {
      const auto store = FeatureStore::load(features);
      const auto m = load_manifest(split_path, taxonomy);
      const auto truth = read_groundtruth(truth_path, taxonomy);
      const auto r = train_on_split(store, m, index_truth(truth), train_flags.build(parse_task(task), g.seed));
      const fs::path path = model_out.empty() ? outdir / "models" / (m.name + "-" + task + ".model") : fs::path(model_out);
      save_model(path, r.model);
      out << "trained " << task << " model on " << r.n_train << " pairs (lambda "
          << format_double(r.model.config.lambda) << ") -> " << path.string() << "\n";
    } else if (eval_cmd->parsed()) {
      const auto model = load_model(model_path);
      const auto store = FeatureStore::load(features);
      const auto m = load_manifest(split_path, taxonomy);
      const auto truth = read_groundtruth(truth_path, taxonomy);
      const auto rep = evaluate_model(model, store, m, index_truth(truth), taxonomy, parse_mode(mode),
                                      train_flags.include_cross_domain);
      const auto stem = fs::path(model_path).stem().string();
      auto j = rep.primary.to_json();
      if (rep.coarsened) j["coarsened_domain"] = rep.coarsened->to_json();
      write_json(outdir / "reports" / (stem + ".json"), j);
      auto text = rep.primary.to_text();
      if (rep.coarsened) text += "coarsened " + rep.coarsened->to_text();
      write_text(outdir / "reports" / (stem + ".txt"), text);
      out << text;
    } else if (gen_cmd->parsed()) {
      std::vector<fs::path> files;
      for (const auto& p : split_paths) {
        if (fs::is_directory(p)) {
          std::vector<fs::path> in_dir;
          for (const auto& e : fs::directory_iterator(p))
            if (e.path().extension() == ".json") in_dir.push_back(e.path());
          std::sort(in_dir.begin(), in_dir.end());
          files.insert(files.end(), in_dir.begin(), in_dir.end());
        } else {
          files.emplace_back(p);
        }
      }
      std::vector<SplitManifest> manifests;
      for (const auto& f : files) manifests.push_back(load_manifest(f, taxonomy));
      const auto store = FeatureStore::load(features);
      const auto truth = read_groundtruth(truth_path, taxonomy);
      auto gen = run_generalization(store, manifests, truth, taxonomy,
                                    train_flags.build(Task::domain, g.seed), parse_mode(mode));
      for (std::size_t k = 0; k < gen.models.size(); ++k)
        save_model(outdir / "models" / "sr" / (manifests[k].name + ".model"), gen.models[k]);
      write_json(outdir / "reports" / "generalization.json", gen.report.to_json(taxonomy));
      write_text(outdir / "reports" / "generalization.txt", gen.report.to_text(taxonomy));
      out << gen.report.to_text(taxonomy);
    } else if (contrib->parsed()) {
      TsvReader reader(table_path, std::array<std::string_view, 3>{"attribute", "relation", "domain"});
      std::vector<std::pair<AttributeKind, AccuracyPair>> single;
      std::optional<AccuracyPair> all;
      const double div = percent ? 100.0 : 1.0;
      while (reader.next()) {
        const auto f = reader.fields();
        const AccuracyPair acc{parse_double(f[1]) / div, parse_double(f[2]) / div};
        if (normalize_label(f[0]) == "all") all = acc;
        else single.push_back({parse_kind(f[0]), acc});
      }
      if (!all) throw EvalError(table_path + ": no 'all' row");
      const auto points = contribution_points(single, *all);
      write_contributions(outdir / "reports" / "contributions.tsv", points);
      char buf[128];
      for (const auto& p : points) {
        std::snprintf(buf, sizeof buf, "%-16s %.3f %.3f\n", std::string(kind_name(p.attribute)).c_str(), p.x, p.y);
        out << buf;
      }
    } else if (synth->parsed()) {
      const auto spec = spec_flags.build(g.seed);
      const auto corpus = generate(spec, taxonomy);
      write_corpus(outdir, corpus, taxonomy);
      out << "wrote " << corpus.pairs.size() << " pairs and " << corpus.annotations.size()
          << " annotator records to " << outdir.string() << "\n";
    } else if (run_all_cmd->parsed()) {
      RunAllOptions o;
      o.synth = spec_flags.build(g.seed);
      o.threshold = threshold;
      o.val_albums = val_albums;
      o.folds = folds;
      o.train = train_flags.build(Task::relation, g.seed);
      o.mode = parse_mode(mode);
      o.contributions = !no_contrib;
      o.generalization = !no_generalize;
      run_all(o, taxonomy, outdir, out);
    }
    return 0;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace relscope::cli
