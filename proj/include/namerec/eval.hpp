#pragma once

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "namerec/baselines.hpp"
#include "namerec/model.hpp"
#include "namerec/train.hpp"

namespace namerec {

using Prediction = ParsedResponse;
/// Anything that maps a prompt to a label (or an unparseable answer).
using Predictor = std::function<Prediction(const Prompt&)>;

/// Rows are gold labels, columns predicted labels, both indexed by
/// CategorySet::index_of (cultures, then NotAName). Unparseable predictions
/// are tallied per gold row outside the square table.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(CategorySet categories);

  void add(const Label& gold, const Prediction& predicted);

  const CategorySet& categories() const { return categories_; }
  std::size_t classes() const { return categories_.size() + 1; }
  long count(std::size_t gold, std::size_t predicted) const { return counts_[gold * classes() + predicted]; }
  long unparseable(std::size_t gold) const { return unparseable_[gold]; }
  long row_sum(std::size_t gold) const;
  long col_sum(std::size_t predicted) const;
  long trace() const;
  long total() const;

 private:
  CategorySet categories_;
  std::vector<long> counts_;
  std::vector<long> unparseable_;
};

/// Throws UnknownLabel for labels outside `categories`.
ConfusionMatrix confusion(const std::vector<std::pair<Label, Prediction>>& pairs, const CategorySet& categories);

/// Percentages. Macro averages run over culture classes with a non-zero row
/// sum; NotAName counts toward accuracy only.
struct Metrics {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct ClassScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Per-class scores as fractions in [0, 1].
ClassScores class_scores(const ConfusionMatrix& cm, std::size_t cls);

/// Throws EmptyMatrix.
Metrics metrics(const ConfusionMatrix& cm);

struct EvaluatedItem {
  Name name;
  Label gold;
  Prediction predicted;
};

std::vector<EvaluatedItem> run_predictor(const Predictor& predictor, const std::vector<LabeledName>& items,
                                         const ContextPolicy& policy, const KnowledgeGraph& graph);

/// Accuracy on the zero-shot set under an inference policy (Omit, Generic
/// or Forced). Throws EmptySet / IllegalPolicy.
double zero_shot_eval(const Predictor& predictor, const std::vector<LabeledName>& zero_shot,
                      const ContextPolicy& policy, const KnowledgeGraph& graph);

struct BucketAccuracy {
  double accuracy = 0.0;
  std::size_t count = 0;
};

/// Empty buckets are absent from the maps.
struct Breakdown {
  std::map<std::string, double> culture_f1;
  std::map<LengthBucket, BucketAccuracy> by_length;
  std::map<ComplexityBucket, BucketAccuracy> by_complexity;
};

Breakdown breakdown_reports(const std::vector<EvaluatedItem>& items, const CategorySet& categories);

std::vector<std::pair<Label, Prediction>> gold_predicted_pairs(const std::vector<EvaluatedItem>& items);

// Predictors

Predictor surrogate_predictor(const SurrogateModel<double>& model);
Predictor rule_predictor(RuleSet rules);
Predictor ngram_predictor(NgramClassifier classifier);

struct EfficiencyReport {
  std::size_t trainable = 0;
  std::size_t total = 0;
  double trainable_fraction = 0.0;
};

/// trainable = lora_param_count over the adapters; total = base entries +
/// trainable.
EfficiencyReport efficiency_report(const SurrogateModel<double>& model);

struct MethodResult {
  std::string method;
  Metrics test;
  double zero_shot_accuracy = 0.0;
  Breakdown breakdown;
};

/// Evaluates one predictor on the test and zero-shot sets.
MethodResult evaluate_method(const std::string& method, const Predictor& predictor, const SplitSet& splits,
                             const CategorySet& categories, const KnowledgeGraph& graph, const ContextPolicy& policy);

struct EvalReport {
  std::vector<MethodResult> methods;
  std::optional<EfficiencyReport> efficiency;
  std::optional<TrainReport> training;
};

enum class AblationVariant { Full, WithoutAugmentation, WithoutKnowledgeGraph, WithoutBoth };
inline constexpr std::array<AblationVariant, 4> kAblationVariants = {
    AblationVariant::Full, AblationVariant::WithoutAugmentation, AblationVariant::WithoutKnowledgeGraph,
    AblationVariant::WithoutBoth};
std::string_view to_string(AblationVariant v);

/// `full` with the documented switches applied: -ADA disables augmentation
/// and forces a constant lambda of 0; -CKGI trains with the Omit policy.
TrainConfig ablation_config(const TrainConfig& full, AblationVariant variant);

struct AblationRow {
  AblationVariant variant;
  TrainConfig config;
  double zero_shot_accuracy = 0.0;
  double test_accuracy = 0.0;
  int best_epoch = 0;
};

struct AblationReport {
  std::vector<AblationRow> rows;
};

/// Trains the four variants from the same frozen base and adapter seed.
AblationReport ablation_run(const SplitSet& splits, const KnowledgeGraph& graph, const SurrogateModel<double>& base,
                            const LoraConfig& lora, const TrainConfig& full_config);

nlohmann::json to_json(const Metrics& m);
nlohmann::json to_json(const Breakdown& b);
nlohmann::json to_json(const TrainReport& r);
nlohmann::json to_json(const EvalReport& r);
nlohmann::json to_json(const AblationReport& r);
std::string to_text(const EvalReport& r);
std::string to_text(const AblationReport& r);

}  // namespace namerec
