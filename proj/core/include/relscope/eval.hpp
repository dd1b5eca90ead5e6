#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "relscope/annotations.hpp"
#include "relscope/featstore.hpp"
#include "relscope/splits.hpp"
#include "relscope/svm.hpp"
#include "relscope/taxonomy.hpp"

namespace relscope {

enum class EvalTask { relation, domain, generalization };
/// any_of_set: a prediction is correct when it is in the consensus set (or,
/// for domains, in the set's domains). strict: only the primary label counts.
enum class EvalMode { any_of_set, strict };

std::string_view task_name(EvalTask task);
std::string_view mode_name(EvalMode mode);
EvalMode parse_mode(std::string_view s);

/// Predicted class index (relation or domain index) for one pair.
struct LabeledPrediction {
  std::string pair_id;
  int label = 0;
};

struct EvalReport {
  EvalTask task = EvalTask::relation;
  EvalMode mode = EvalMode::any_of_set;
  std::size_t n_test = 0;
  std::size_t n_correct = 0;
  double accuracy = 0.0;
  std::vector<std::string> class_names;
  /// confusion[truth][predicted]. A hit is recorded on the diagonal of the
  /// predicted class; a miss in the primary label's row.
  std::vector<std::vector<std::size_t>> confusion;
  /// Diagonal over row sum; classes without test pairs are left out of the
  /// macro average and reported as null.
  std::vector<double> per_class_accuracy;
  std::vector<std::size_t> per_class_count;
  double macro_accuracy = 0.0;

  nlohmann::json to_json() const;
  std::string to_text() const;
};

/// Relation predictions against ground truth. Every ground-truth pair needs
/// exactly one prediction and vice versa (EvalError naming the pair).
EvalReport evaluate_relations(std::span<const LabeledPrediction> predictions,
                              std::span<const GroundTruth> truth, const Taxonomy& taxonomy,
                              EvalMode mode = EvalMode::any_of_set);

/// Domain predictions (domain indices) against ground truth.
EvalReport evaluate_domains(std::span<const LabeledPrediction> predictions,
                            std::span<const GroundTruth> truth, const Taxonomy& taxonomy,
                            EvalMode mode = EvalMode::any_of_set, EvalTask task = EvalTask::domain);

/// Maps relation predictions to their domains.
std::vector<LabeledPrediction> coarsen(std::span<const LabeledPrediction> relation_predictions,
                                       const Taxonomy& taxonomy);

struct HeldOutResult {
  RelationId relation;
  std::string split;
  std::size_t n_test = 0;
  std::size_t n_correct = 0;
  double accuracy = 0.0;
};

struct GeneralizationReport {
  /// Micro average over the pooled held-out test pairs of all splits.
  EvalReport pooled;
  std::vector<HeldOutResult> per_relation;
  /// Mean of the per-relation accuracies.
  double macro_accuracy = 0.0;

  nlohmann::json to_json(const Taxonomy& taxonomy) const;
  std::string to_text(const Taxonomy& taxonomy) const;
};

/// Features of a pair as seen by the model of run `run` (models may carry
/// different standardizers).
using FeatureLookup = std::function<std::vector<double>(std::size_t run, const std::string& pair_id)>;

/// Runs each domain model on its own SR manifest's test pairs and pools the
/// results. Model k must carry metadata "split" equal to manifest k's name
/// and metadata "task" == "domain" (EvalError otherwise).
GeneralizationReport generalization_eval(std::span<const SplitManifest> manifests,
                                         std::span<const SvmModel> models,
                                         const FeatureLookup& features,
                                         std::span<const GroundTruth> truth, const Taxonomy& taxonomy,
                                         EvalMode mode = EvalMode::any_of_set);

struct AccuracyPair {
  double relation = 0.0;
  double domain = 0.0;
};

/// Single-attribute accuracy normalized by the all-attribute accuracy:
/// x on the domain task, y on the relation task.
struct ContributionPoint {
  AttributeKind attribute;
  double x = 0.0;
  double y = 0.0;
};

/// Throws EvalError for accuracies outside (0, 1].
std::vector<ContributionPoint> contribution_points(
    std::span<const std::pair<AttributeKind, AccuracyPair>> single, AccuracyPair all);

/// TSV `attribute x y`.
void write_contributions(const std::filesystem::path& path, std::span<const ContributionPoint> points);

}  // namespace relscope
