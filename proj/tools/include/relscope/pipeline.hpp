#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "relscope/annotations.hpp"
#include "relscope/eval.hpp"
#include "relscope/featstore.hpp"
#include "relscope/splits.hpp"
#include "relscope/svm.hpp"
#include "relscope/synthgen.hpp"
#include "relscope/taxonomy.hpp"

namespace relscope::cli {

enum class Task { relation, domain };

std::string_view task_name(Task t);
Task parse_task(std::string_view s);

struct TrainOptions {
  Task task = Task::relation;
  std::vector<AttributeKind> kinds;  // empty means all
  SvmConfig svm;
  /// Lambda candidates scored on the validation split. A single entry, or
  /// an empty validation split, trains at svm.lambda / that entry directly.
  std::vector<double> lambda_grid = kDefaultLambdaGrid;
  bool include_cross_domain = false;
};

struct TrainResult {
  SvmModel model;
  std::optional<LambdaSelection> selection;
  std::size_t n_train = 0;
  std::size_t n_val = 0;
};

/// Ground truth keyed by pair id.
using TruthIndex = std::map<std::string, GroundTruth>;
TruthIndex index_truth(std::span<const GroundTruth> truth);

/// Ids from `ids` that have ground truth, minus cross-domain pairs unless
/// they are requested.
std::vector<std::string> usable_ids(std::span<const std::string> ids, const TruthIndex& truth,
                                    bool include_cross_domain);

/// Fits the standardizer on the split's training pairs, selects lambda on
/// its validation pairs and trains on the training pairs. The model's
/// metadata records task, kinds, standardizer, split name and lambda.
TrainResult train_on_split(const FeatureStore& store, const SplitManifest& split,
                           const TruthIndex& truth, const TrainOptions& opts);

/// Fused, standardized features as recorded in the model metadata.
std::vector<double> model_features(const SvmModel& model, const FeatureStore& store,
                                   const std::string& pair_id);

std::vector<LabeledPrediction> predict_pairs(const SvmModel& model, const FeatureStore& store,
                                             std::span<const std::string> ids);

struct TestReports {
  EvalReport primary;
  /// Relation models only: predictions mapped to domains.
  std::optional<EvalReport> coarsened;
};

TestReports evaluate_model(const SvmModel& model, const FeatureStore& store,
                           const SplitManifest& split, const TruthIndex& truth,
                           const Taxonomy& taxonomy, EvalMode mode, bool include_cross_domain);

struct GeneralizationRun {
  std::vector<SvmModel> models;
  GeneralizationReport report;
};

GeneralizationRun run_generalization(const FeatureStore& store,
                                     std::span<const SplitManifest> manifests,
                                     std::span<const GroundTruth> truth, const Taxonomy& taxonomy,
                                     const TrainOptions& opts, EvalMode mode);

struct RunAllOptions {
  SynthSpec synth;
  int threshold = kDefaultConsistency;
  std::size_t val_albums = kDefaultValAlbums;
  std::size_t folds = kDefaultFolds;
  TrainOptions train;
  EvalMode mode = EvalMode::any_of_set;
  bool contributions = true;
  bool generalization = true;
};

struct RunAllResult {
  double retained_fraction = 0.0;
  double relation_accuracy = 0.0;
  double domain_accuracy = 0.0;
  double coarsened_domain_accuracy = 0.0;
  double generalization_accuracy = 0.0;
  double generalization_macro = 0.0;
  std::vector<ContributionPoint> contributions;
  nlohmann::json summary;
};

/// synth, agree, split-ac, split-sr, fuse, train, eval, generalize,
/// contrib; every artifact is written under `out`. Progress goes to `log`.
RunAllResult run_all(const RunAllOptions& opts, const Taxonomy& taxonomy,
                     const std::filesystem::path& out, std::ostream& log);

/// Entry point shared by the executable and the tests. Returns the process
/// exit code: 0 success, 1 validation error or bad usage, 2 I/O error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace relscope::cli
