#include <gtest/gtest.h>

#include "namerec/eval.hpp"
#include "namerec/synth.hpp"

using namespace namerec;

namespace {

const CategorySet kAB({"A", "B"});

std::vector<std::pair<Label, Prediction>> tally(std::initializer_list<std::tuple<const char*, const char*, int>> cells) {
  std::vector<std::pair<Label, Prediction>> out;
  for (const auto& [g, p, n] : cells)
    for (int i = 0; i < n; ++i) out.emplace_back(Label::culture(g), Prediction{Label::culture(p)});
  return out;
}

std::vector<LabeledName> items_of(std::initializer_list<std::pair<const char*, const char*>> list) {
  std::vector<LabeledName> out;
  for (const auto& [n, c] : list) out.push_back({normalize_name(n), Label::culture(c)});
  return out;
}

}  // namespace

TEST(Confusion, EmptyAndTally) {
  auto empty = confusion({}, kAB);
  EXPECT_EQ(empty.total(), 0);
  EXPECT_THROW(metrics(empty), Error);

  auto cm = confusion(tally({{"A", "A", 1}, {"A", "B", 1}, {"B", "B", 1}}), kAB);
  EXPECT_EQ(cm.count(0, 0), 1);
  EXPECT_EQ(cm.count(1, 1), 1);
  EXPECT_EQ(cm.count(0, 1), 1);
  EXPECT_EQ(cm.count(1, 0), 0);
  EXPECT_EQ(cm.trace(), 2);
}

TEST(Confusion, UnknownLabelAndUnparseable) {
  std::vector<std::pair<Label, Prediction>> bad = {{Label::culture("Z"), Prediction{Label::culture("A")}}};
  EXPECT_THROW(confusion(bad, kAB), Error);

  std::vector<std::pair<Label, Prediction>> mixed = {{Label::culture("A"), Prediction{Unparseable{"??"}}},
                                                     {Label::culture("A"), Prediction{Label::culture("A")}}};
  auto cm = confusion(mixed, kAB);
  EXPECT_EQ(cm.unparseable(0), 1);
  EXPECT_EQ(cm.row_sum(0), 2);
  EXPECT_DOUBLE_EQ(metrics(cm).accuracy, 50.0);
}

TEST(Metrics, PerfectDiagonal) {
  auto m = metrics(confusion(tally({{"A", "A", 4}, {"B", "B", 6}}), kAB));
  EXPECT_DOUBLE_EQ(m.accuracy, 100.0);
  EXPECT_DOUBLE_EQ(m.precision, 100.0);
  EXPECT_DOUBLE_EQ(m.recall, 100.0);
  EXPECT_DOUBLE_EQ(m.f1, 100.0);
}

TEST(Metrics, TwoClassByHand) {
  auto cm = confusion(tally({{"A", "A", 8}, {"A", "B", 2}, {"B", "A", 3}, {"B", "B", 7}}), kAB);
  const double p0 = 8.0 / 11, r0 = 8.0 / 10, p1 = 7.0 / 9, r1 = 7.0 / 10;
  const double f0 = 2 * p0 * r0 / (p0 + r0), f1 = 2 * p1 * r1 / (p1 + r1);
  auto m = metrics(cm);
  EXPECT_NEAR(m.accuracy, 75.0, 1e-9);
  EXPECT_NEAR(m.precision, 50 * (p0 + p1), 1e-9);
  EXPECT_NEAR(m.recall, 50 * (r0 + r1), 1e-9);
  EXPECT_NEAR(m.f1, 50 * (f0 + f1), 1e-9);
  EXPECT_NEAR(class_scores(cm, 0).precision, p0, 1e-12);
  EXPECT_NEAR(class_scores(cm, 1).recall, r1, 1e-12);
}

TEST(Metrics, NotANameCountsTowardAccuracyOnly) {
  std::vector<std::pair<Label, Prediction>> pairs = {{Label::culture("A"), Prediction{Label::culture("A")}},
                                                     {Label::not_a_name(), Prediction{Label::culture("A")}}};
  auto m = metrics(confusion(pairs, kAB));
  EXPECT_DOUBLE_EQ(m.accuracy, 50.0);
  // Only class A has a row: precision 1/2, recall 1.
  EXPECT_NEAR(m.precision, 50.0, 1e-12);
  EXPECT_NEAR(m.recall, 100.0, 1e-12);
}

TEST(ZeroShot, StubPredictors) {
  const auto items = items_of({{"Ana", "A"}, {"Bo", "B"}, {"Cy", "A"}});
  KnowledgeGraph g(kAB);
  std::map<std::string, Label> gold;
  for (const auto& it : items) gold.emplace(it.name.text(), it.label);
  Predictor oracle = [&](const Prompt& p) -> Prediction { return gold.at(p.name.text()); };
  Predictor wrong = [](const Prompt&) -> Prediction { return Label::not_a_name(); };
  EXPECT_DOUBLE_EQ(zero_shot_eval(oracle, items, ContextPolicy::omit(), g), 100.0);
  EXPECT_DOUBLE_EQ(zero_shot_eval(wrong, items, ContextPolicy::generic(), g), 0.0);
  try {
    zero_shot_eval(oracle, items, ContextPolicy::ground_truth(), g);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IllegalPolicy);
  }
  try {
    zero_shot_eval(oracle, {}, ContextPolicy::omit(), g);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptySet);
  }
}

TEST(Breakdown, BucketsAndPerfectF1) {
  const auto items = items_of({{"Ana", "A"}, {"Bo", "B"}, {"Cyd", "A"}});
  KnowledgeGraph g(kAB);
  Predictor oracle = [&](const Prompt& p) -> Prediction {
    return p.name.text() == "Bo" ? Label::culture("B") : Label::culture("A");
  };
  auto evaluated = run_predictor(oracle, items, ContextPolicy::omit(), g);
  auto b = breakdown_reports(evaluated, kAB);
  EXPECT_EQ(b.by_length.size(), 1u);
  EXPECT_EQ(b.by_length.at(LengthBucket::Short).count, 3u);
  EXPECT_DOUBLE_EQ(b.by_length.at(LengthBucket::Short).accuracy, 100.0);
  EXPECT_EQ(b.by_complexity.size(), 1u);
  EXPECT_DOUBLE_EQ(b.culture_f1.at("A"), 100.0);
  EXPECT_DOUBLE_EQ(b.culture_f1.at("B"), 100.0);
}

TEST(Efficiency, AdapterCounts) {
  std::mt19937_64 rng(1);
  SurrogateModel<double> m;
  m.base = ModelParameters<double>::random(ModelDims{}, rng);
  auto none = efficiency_report(m);
  EXPECT_EQ(none.trainable, 0u);
  EXPECT_EQ(none.total, m.base.parameter_count());

  auto one = lora_attach(m, {MatrixId::Recurrent}, 4, 0.1, rng);
  auto r = efficiency_report(one);
  EXPECT_EQ(r.trainable, 512u);
  EXPECT_EQ(r.total, m.base.parameter_count() + 512u);
  EXPECT_DOUBLE_EQ(r.trainable_fraction, 512.0 / static_cast<double>(r.total));
}

TEST(Ablation, ConfigSwitches) {
  TrainConfig full;
  full.augment.fusion_enabled = true;
  EXPECT_EQ(to_string(AblationVariant::Full), "Full");
  EXPECT_EQ(to_string(AblationVariant::WithoutAugmentation), "-ADA");
  EXPECT_EQ(to_string(AblationVariant::WithoutKnowledgeGraph), "-CKGI");
  EXPECT_EQ(to_string(AblationVariant::WithoutBoth), "-both");

  auto f = ablation_config(full, AblationVariant::Full);
  EXPECT_TRUE(f.augment_enabled);
  EXPECT_EQ(f.context_policy, ContextPolicy::ground_truth());

  auto ada = ablation_config(full, AblationVariant::WithoutAugmentation);
  EXPECT_FALSE(ada.augment_enabled);
  EXPECT_EQ(ada.lambda, 0.0);
  EXPECT_EQ(ada.lambda_schedule, LambdaSchedule::Constant);
  EXPECT_EQ(ada.context_policy, full.context_policy);

  auto kg = ablation_config(full, AblationVariant::WithoutKnowledgeGraph);
  EXPECT_TRUE(kg.augment_enabled);
  EXPECT_EQ(kg.lambda, full.lambda);
  EXPECT_EQ(kg.context_policy.mode, ContextMode::Omit);

  auto both = ablation_config(full, AblationVariant::WithoutBoth);
  EXPECT_FALSE(both.augment_enabled);
  EXPECT_EQ(both.context_policy.mode, ContextMode::Omit);
  EXPECT_EQ(both.eval_policy, full.eval_policy);
}

TEST(Reports, JsonAndText) {
  EvalReport r;
  MethodResult mr;
  mr.method = "Rule-based";
  mr.test = {75, 70, 65, 60};
  mr.zero_shot_accuracy = 50;
  r.methods.push_back(mr);
  auto j = to_json(r);
  EXPECT_EQ(j["methods"][0]["method"], "Rule-based");
  const auto text = to_text(r);
  EXPECT_NE(text.find("Rule-based"), std::string::npos);
  EXPECT_NE(text.find("75.0"), std::string::npos);
}
