#include "namerec/eval.hpp"

#include <memory>
#include <sstream>

#include <fmt/format.h>

namespace namerec {

using nlohmann::json;

ConfusionMatrix::ConfusionMatrix(CategorySet categories)
    : categories_(std::move(categories)),
      counts_(classes() * classes(), 0),
      unparseable_(classes(), 0) {}

void ConfusionMatrix::add(const Label& gold, const Prediction& predicted) {
  const std::size_t g = categories_.index_of(gold);
  if (const auto* label = std::get_if<Label>(&predicted)) {
    ++counts_[g * classes() + categories_.index_of(*label)];
  } else {
    ++unparseable_[g];
  }
}

long ConfusionMatrix::row_sum(std::size_t gold) const {
  long s = unparseable_[gold];
  for (std::size_t p = 0; p < classes(); ++p) s += count(gold, p);
  return s;
}

long ConfusionMatrix::col_sum(std::size_t predicted) const {
  long s = 0;
  for (std::size_t g = 0; g < classes(); ++g) s += count(g, predicted);
  return s;
}

long ConfusionMatrix::trace() const {
  long s = 0;
  for (std::size_t c = 0; c < classes(); ++c) s += count(c, c);
  return s;
}

long ConfusionMatrix::total() const {
  long s = 0;
  for (std::size_t g = 0; g < classes(); ++g) s += row_sum(g);
  return s;
}

ConfusionMatrix confusion(const std::vector<std::pair<Label, Prediction>>& pairs, const CategorySet& categories) {
  ConfusionMatrix cm(categories);
  for (const auto& [gold, predicted] : pairs) cm.add(gold, predicted);
  return cm;
}

ClassScores class_scores(const ConfusionMatrix& cm, std::size_t cls) {
  const double tp = static_cast<double>(cm.count(cls, cls));
  const double col = static_cast<double>(cm.col_sum(cls));
  const double row = static_cast<double>(cm.row_sum(cls));
  ClassScores s;
  s.precision = col > 0 ? tp / col : 0.0;
  s.recall = row > 0 ? tp / row : 0.0;
  s.f1 = (s.precision + s.recall) > 0 ? 2 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
  return s;
}

Metrics metrics(const ConfusionMatrix& cm) {
  const long total = cm.total();
  if (total == 0) throw Error(ErrorCode::EmptyMatrix, "no evaluated items");
  Metrics m;
  m.accuracy = 100.0 * static_cast<double>(cm.trace()) / static_cast<double>(total);
  std::size_t n = 0;
  for (std::size_t c = 0; c < cm.categories().size(); ++c) {
    if (cm.row_sum(c) == 0) continue;
    const auto s = class_scores(cm, c);
    m.precision += s.precision;
    m.recall += s.recall;
    m.f1 += s.f1;
    ++n;
  }
  if (n > 0) {
    m.precision = 100.0 * m.precision / static_cast<double>(n);
    m.recall = 100.0 * m.recall / static_cast<double>(n);
    m.f1 = 100.0 * m.f1 / static_cast<double>(n);
  }
  return m;
}

std::vector<EvaluatedItem> run_predictor(const Predictor& predictor, const std::vector<LabeledName>& items,
                                         const ContextPolicy& policy, const KnowledgeGraph& graph) {
  if (policy.mode == ContextMode::GroundTruth) {
    throw Error(ErrorCode::IllegalPolicy, "inference cannot use ground-truth context");
  }
  std::vector<EvaluatedItem> out;
  out.reserve(items.size());
  for (const auto& item : items) {
    out.push_back({item.name, item.label, predictor(build_prompt(item.name, policy, std::nullopt, graph))});
  }
  return out;
}

std::vector<std::pair<Label, Prediction>> gold_predicted_pairs(const std::vector<EvaluatedItem>& items) {
  std::vector<std::pair<Label, Prediction>> out;
  out.reserve(items.size());
  for (const auto& i : items) out.emplace_back(i.gold, i.predicted);
  return out;
}

namespace {

bool is_correct(const EvaluatedItem& item) {
  const auto* label = std::get_if<Label>(&item.predicted);
  return label && *label == item.gold;
}

template <typename Key, typename KeyFn>
std::map<Key, BucketAccuracy> bucket_accuracy(const std::vector<EvaluatedItem>& items, KeyFn key) {
  std::map<Key, std::pair<std::size_t, std::size_t>> tally;  // correct, count
  for (const auto& item : items) {
    auto& t = tally[key(item.name)];
    t.first += is_correct(item) ? 1 : 0;
    ++t.second;
  }
  std::map<Key, BucketAccuracy> out;
  for (const auto& [k, t] : tally) {
    out[k] = {100.0 * static_cast<double>(t.first) / static_cast<double>(t.second), t.second};
  }
  return out;
}

}  // namespace

double zero_shot_eval(const Predictor& predictor, const std::vector<LabeledName>& zero_shot,
                      const ContextPolicy& policy, const KnowledgeGraph& graph) {
  if (zero_shot.empty()) throw Error(ErrorCode::EmptySet, "zero-shot set is empty");
  const auto items = run_predictor(predictor, zero_shot, policy, graph);
  std::size_t correct = 0;
  for (const auto& i : items) correct += is_correct(i) ? 1 : 0;
  return 100.0 * static_cast<double>(correct) / static_cast<double>(items.size());
}

Breakdown breakdown_reports(const std::vector<EvaluatedItem>& items, const CategorySet& categories) {
  Breakdown b;
  const auto cm = confusion(gold_predicted_pairs(items), categories);
  for (std::size_t c = 0; c < categories.size(); ++c) {
    if (cm.row_sum(c) == 0) continue;
    b.culture_f1[categories.names()[c]] = 100.0 * class_scores(cm, c).f1;
  }
  b.by_length = bucket_accuracy<LengthBucket>(items, [](const Name& n) { return length_bucket(n); });
  b.by_complexity = bucket_accuracy<ComplexityBucket>(items, [](const Name& n) { return complexity_bucket(n); });
  return b;
}

Predictor surrogate_predictor(const SurrogateModel<double>& model) {
  auto compiled = std::make_shared<const CompiledModel<double>>(model);
  auto categories = model.categories;
  return [compiled, categories](const Prompt& prompt) -> Prediction {
    return predict(*compiled, prompt, categories).front().label;
  };
}

Predictor rule_predictor(RuleSet rules) {
  return [rules = std::move(rules)](const Prompt& prompt) -> Prediction { return rule_based_predict(rules, prompt.name); };
}

Predictor ngram_predictor(NgramClassifier classifier) {
  return [c = std::move(classifier)](const Prompt& prompt) -> Prediction { return c.classify(prompt.name); };
}

EfficiencyReport efficiency_report(const SurrogateModel<double>& model) {
  EfficiencyReport r;
  std::vector<MatrixShape> shapes;
  int rank = 0;
  for (const auto& a : model.adapters) {
    // Adapters of one model may in principle differ in rank; sum per adapter.
    r.trainable += lora_param_count({{static_cast<long>(a.B.rows()), static_cast<long>(a.A.cols())}}, a.rank());
    rank = a.rank();
  }
  (void)rank;
  r.total = model.base.parameter_count() + r.trainable;
  r.trainable_fraction = r.total ? static_cast<double>(r.trainable) / static_cast<double>(r.total) : 0.0;
  return r;
}

MethodResult evaluate_method(const std::string& method, const Predictor& predictor, const SplitSet& splits,
                             const CategorySet& categories, const KnowledgeGraph& graph, const ContextPolicy& policy) {
  MethodResult r;
  r.method = method;
  const auto test_items = run_predictor(predictor, splits.test, policy, graph);
  r.test = metrics(confusion(gold_predicted_pairs(test_items), categories));
  r.breakdown = breakdown_reports(test_items, categories);
  r.zero_shot_accuracy = zero_shot_eval(predictor, splits.zero_shot, policy, graph);
  return r;
}

std::string_view to_string(AblationVariant v) {
  switch (v) {
    case AblationVariant::Full: return "Full";
    case AblationVariant::WithoutAugmentation: return "-ADA";
    case AblationVariant::WithoutKnowledgeGraph: return "-CKGI";
    case AblationVariant::WithoutBoth: return "-both";
  }
  return "";
}

TrainConfig ablation_config(const TrainConfig& full, AblationVariant variant) {
  TrainConfig c = full;
  const bool no_ada = variant == AblationVariant::WithoutAugmentation || variant == AblationVariant::WithoutBoth;
  const bool no_kg = variant == AblationVariant::WithoutKnowledgeGraph || variant == AblationVariant::WithoutBoth;
  if (no_ada) {
    c.augment_enabled = false;
    c.lambda = 0.0;
    c.lambda_schedule = LambdaSchedule::Constant;
  }
  if (no_kg) c.context_policy = ContextPolicy::omit();
  return c;
}

AblationReport ablation_run(const SplitSet& splits, const KnowledgeGraph& graph, const SurrogateModel<double>& base,
                            const LoraConfig& lora, const TrainConfig& full_config) {
  AblationReport report;
  const auto adapted = lora_attach(base, lora);
  for (AblationVariant v : kAblationVariants) {
    AblationRow row{v, ablation_config(full_config, v)};
    auto [tuned, train_report] = finetune(adapted, splits, graph, row.config);
    const auto predictor = surrogate_predictor(tuned);
    row.zero_shot_accuracy = zero_shot_eval(predictor, splits.zero_shot, row.config.eval_policy, graph);
    const auto test_items = run_predictor(predictor, splits.test, row.config.eval_policy, graph);
    row.test_accuracy = metrics(confusion(gold_predicted_pairs(test_items), tuned.categories)).accuracy;
    row.best_epoch = train_report.best_epoch;
    report.rows.push_back(std::move(row));
  }
  return report;
}

json to_json(const Metrics& m) {
  return {{"accuracy", m.accuracy}, {"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}};
}

json to_json(const Breakdown& b) {
  json j;
  j["culture_f1"] = b.culture_f1;
  json len = json::object();
  for (const auto& [k, v] : b.by_length) len[std::string(to_string(k))] = {{"accuracy", v.accuracy}, {"count", v.count}};
  json cx = json::object();
  for (const auto& [k, v] : b.by_complexity) cx[std::string(to_string(k))] = {{"accuracy", v.accuracy}, {"count", v.count}};
  j["by_length"] = len;
  j["by_complexity"] = cx;
  return j;
}

json to_json(const TrainReport& r) {
  return {{"train_loss", r.train_loss},
          {"validation_loss", r.validation_loss},
          {"validation_accuracy", r.validation_accuracy},
          {"best_epoch", r.best_epoch},
          {"stopped_early", r.stopped_early},
          {"steps", r.steps},
          {"trainable_parameters", r.trainable_parameters}};
}

json to_json(const EvalReport& r) {
  json j;
  json methods = json::array();
  for (const auto& m : r.methods) {
    methods.push_back({{"method", m.method},
                       {"test", to_json(m.test)},
                       {"zero_shot_accuracy", m.zero_shot_accuracy},
                       {"breakdown", to_json(m.breakdown)}});
  }
  j["methods"] = methods;
  if (r.efficiency) {
    j["efficiency"] = {{"trainable_parameters", r.efficiency->trainable},
                       {"total_parameters", r.efficiency->total},
                       {"trainable_fraction", r.efficiency->trainable_fraction}};
  }
  if (r.training) j["training"] = to_json(*r.training);
  return j;
}

json to_json(const AblationReport& r) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"variant", to_string(row.variant)},
                    {"zero_shot_accuracy", row.zero_shot_accuracy},
                    {"test_accuracy", row.test_accuracy},
                    {"best_epoch", row.best_epoch}});
  }
  return {{"ablation", rows}};
}

namespace {

std::string pct(double v) { return fmt::format("{:6.1f}", v); }

}  // namespace

std::string to_text(const EvalReport& r) {
  std::ostringstream out;
  out << "Overall performance on the test set\n";
  out << fmt::format("{:<16} {:>8} {:>9} {:>8} {:>8} {:>10}\n", "Method", "Acc(%)", "Prec(%)", "Rec(%)", "F1(%)",
                     "ZeroShot(%)");
  for (const auto& m : r.methods) {
    out << fmt::format("{:<16} {:>8} {:>9} {:>8} {:>8} {:>10}\n", m.method, pct(m.test.accuracy),
                       pct(m.test.precision), pct(m.test.recall), pct(m.test.f1), pct(m.zero_shot_accuracy));
  }
  out << "\nPer-culture F1 (%)\n";
  if (!r.methods.empty()) {
    out << fmt::format("{:<16}", "Culture");
    for (const auto& m : r.methods) out << fmt::format(" {:>12}", m.method);
    out << '\n';
    for (const auto& [culture, _] : r.methods.back().breakdown.culture_f1) {
      out << fmt::format("{:<16}", culture);
      for (const auto& m : r.methods) {
        auto it = m.breakdown.culture_f1.find(culture);
        out << fmt::format(" {:>12}", it == m.breakdown.culture_f1.end() ? std::string("-") : pct(it->second));
      }
      out << '\n';
    }
    auto bucket_table = [&](const char* title, auto member, auto buckets) {
      out << '\n' << title << '\n' << fmt::format("{:<16}", "Bucket");
      for (const auto& m : r.methods) out << fmt::format(" {:>12}", m.method);
      out << fmt::format(" {:>7}\n", "n");
      for (auto b : buckets) {
        const auto& first = (r.methods.back().breakdown.*member);
        auto fit = first.find(b);
        if (fit == first.end()) continue;
        out << fmt::format("{:<16}", to_string(b));
        for (const auto& m : r.methods) {
          const auto& table = (m.breakdown.*member);
          auto it = table.find(b);
          out << fmt::format(" {:>12}", it == table.end() ? std::string("-") : pct(it->second.accuracy));
        }
        out << fmt::format(" {:>7}\n", fit->second.count);
      }
    };
    bucket_table("Accuracy by name length (%)", &Breakdown::by_length,
                 std::array{LengthBucket::Short, LengthBucket::Medium, LengthBucket::Long});
    bucket_table("Accuracy by name complexity (%)", &Breakdown::by_complexity,
                 std::array{ComplexityBucket::Simple, ComplexityBucket::Moderate, ComplexityBucket::High});
  }
  if (r.efficiency) {
    out << "\nTrainable parameters\n";
    out << fmt::format("  trainable {}  total {}  fraction {:.4f}\n", r.efficiency->trainable, r.efficiency->total,
                       r.efficiency->trainable_fraction);
  }
  return out.str();
}

std::string to_text(const AblationReport& r) {
  std::ostringstream out;
  out << "Ablation (accuracy on the zero-shot set)\n";
  out << fmt::format("{:<12} {:>12} {:>10}\n", "Variant", "ZeroShot(%)", "Test(%)");
  for (const auto& row : r.rows) {
    out << fmt::format("{:<12} {:>12} {:>10}\n", to_string(row.variant), pct(row.zero_shot_accuracy),
                       pct(row.test_accuracy));
  }
  return out.str();
}

}  // namespace namerec
