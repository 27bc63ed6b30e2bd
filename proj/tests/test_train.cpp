#include <gtest/gtest.h>

#include <cmath>

#include "namerec/synth.hpp"
#include "namerec/train.hpp"

using namespace namerec;

namespace {

const ModelDims kSmall{16, 8, 256, Tokenizer{}.size()};

struct World {
  SplitSet splits;
  KnowledgeGraph graph;
  CategorySet categories;
};

const World& world() {
  static const World w = [] {
    World out;
    out.categories = default_categories();
    out.graph = default_graph();
    SplitOptions opt;
    opt.seed = 5;
    out.splits = make_splits(gen_corpus(default_culture_specs(), 30, 30, 11), opt);
    return out;
  }();
  return w;
}

SurrogateModel<double> random_model(std::uint64_t seed, const ModelDims& dims = kSmall) {
  std::mt19937_64 rng(seed);
  SurrogateModel<double> m;
  m.base = ModelParameters<double>::random(dims, rng);
  m.categories = world().categories;
  m.frozen = true;
  return m;
}

std::vector<TrainingPair> pairs(std::size_t from, std::size_t count) {
  const auto& w = world();
  std::vector<LabeledName> items(w.splits.train.begin() + from, w.splits.train.begin() + from + count);
  return make_pairs(items, ContextPolicy::ground_truth(), w.graph);
}

// Adapters with non-zero B so every factor receives gradient.
SurrogateModel<double> adapted(std::uint64_t seed) {
  auto m = random_model(seed);
  std::mt19937_64 rng(seed + 100);
  m = lora_attach(m, {MatrixId::Encoder, MatrixId::Recurrent, MatrixId::Input, MatrixId::Output}, 2, 0.3, rng);
  std::normal_distribution<double> n(0.0, 0.3);
  for (auto& a : m.adapters)
    for (Eigen::Index i = 0; i < a.B.size(); ++i) a.B.data()[i] = n(rng);
  return m;
}

}  // namespace

TEST(Loss, UniformModel) {
  SurrogateModel<double> m;
  m.base = ModelParameters<double>::zeros(kSmall);
  m.categories = world().categories;
  auto batch = pairs(0, 1);
  const double M = batch[0].target.length();
  EXPECT_NEAR(nll_loss(m, batch), (M + 1) * std::log(static_cast<double>(kSmall.vocab)), 1e-12);
}

TEST(Loss, CombinedIdentities) {
  auto m = random_model(1);
  auto orig = pairs(0, 5);
  auto aug = pairs(5, 3);
  const double base = nll_loss(m, orig);
  EXPECT_EQ(combined_loss(m, orig, aug, 0.0), base);
  EXPECT_EQ(combined_loss(m, orig, {}, 0.7), base);
  EXPECT_NEAR(combined_loss(m, orig, orig, 1.0), 2 * base, 1e-12);
  EXPECT_NEAR(combined_loss(m, orig, aug, 0.5), base + 0.5 * nll_loss(m, aug), 1e-12);
  EXPECT_THROW(nll_loss(m, {}), Error);
}

TEST(Gradients, MatchFiniteDifferences) {
  auto m = adapted(2);
  std::mt19937_64 rng(3);
  auto r = grad_check(m, pairs(0, 4), pairs(4, 2), 0.5, 1e-5, 60, rng);
  EXPECT_EQ(r.entries_checked, 60u);
  EXPECT_LT(r.max_relative_error, 1e-4);
}

TEST(Gradients, LargeEpsilonDegrades) {
  auto m = adapted(2);
  std::mt19937_64 r1(3), r2(3);
  auto fine = grad_check(m, pairs(0, 4), {}, 0.5, 1e-5, 40, r1);
  auto coarse = grad_check(m, pairs(0, 4), {}, 0.5, 1e-1, 40, r2);
  EXPECT_GT(coarse.max_relative_error, fine.max_relative_error);
}

TEST(Gradients, NoAdapters) {
  auto m = random_model(4);
  try {
    backprop_adapters(m, pairs(0, 2), {}, 0.5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoAdapters);
  }
}

TEST(Gradients, SgdStepLowersLossAndKeepsBase) {
  auto m = adapted(6);
  const auto digest = base_digest(m.base);
  const auto batch = encode_batch(m, pairs(0, 8));
  const double before = adapter_sgd_step(m, batch, {}, 0.0, 0.05);
  const CompiledModel<double> c(m);
  const double after = batch_nll<double>(c.weights, batch, 1.0, nullptr);
  EXPECT_LT(after, before);
  EXPECT_EQ(base_digest(m.base), digest);
}

TEST(Schedule, LambdaAt) {
  TrainConfig c;
  EXPECT_EQ(c.lambda_at(1), 0.5);
  EXPECT_EQ(c.lambda_at(7), 0.5);
  c.lambda_schedule = LambdaSchedule::LinearRamp;
  c.max_epochs = 5;
  EXPECT_DOUBLE_EQ(c.lambda_at(1), 0.0);
  EXPECT_DOUBLE_EQ(c.lambda_at(5), 1.0);
  EXPECT_DOUBLE_EQ(c.lambda_at(3), 0.5);
}

TEST(TrainConfig, Validation) {
  TrainConfig c;
  EXPECT_NO_THROW(c.validate());
  c.learning_rate = -1;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.batch_size = 0;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.context_policy = ContextPolicy::generic();
  c.eval_policy = ContextPolicy::ground_truth();
  EXPECT_THROW(c.validate(), Error);
}

TEST(Pretrain, DeterministicAndImproves) {
  const auto& w = world();
  auto cfg = pretrain_defaults();
  cfg.max_epochs = 3;
  cfg.seed = 9;
  auto a = pretrain_base(w.splits.train, w.splits.validation, w.categories, kSmall, cfg);
  auto b = pretrain_base(w.splits.train, w.splits.validation, w.categories, kSmall, cfg);
  EXPECT_EQ(base_digest(a.parameters), base_digest(b.parameters));
  EXPECT_EQ(a.report.validation_loss, b.report.validation_loss);
  ASSERT_EQ(a.report.validation_loss.size(), 4u);
  EXPECT_LT(a.report.validation_loss[a.report.best_epoch], a.report.validation_loss[0]);
  EXPECT_THROW(pretrain_base({}, w.splits.validation, w.categories, kSmall, cfg), Error);
  EXPECT_THROW(pretrain_base(w.splits.train, {}, w.categories, kSmall, cfg), Error);
}

TEST(Pretrain, MemorizesTinySet) {
  std::vector<LabeledName> items = {{normalize_name("Marie"), Label::culture("French")},
                                    {normalize_name("Suzuki"), Label::culture("Japanese")},
                                    {normalize_name("Xqzt"), Label::not_a_name()}};
  CategorySet cats({"French", "Japanese"});
  auto cfg = pretrain_defaults();
  cfg.max_epochs = 400;
  cfg.patience = 400;
  cfg.batch_size = 3;
  cfg.learning_rate = 0.2;
  cfg.seed = 1;
  auto r = pretrain_base(items, items, cats, kSmall, cfg);
  EXPECT_LT(r.report.validation_loss[r.report.best_epoch], 0.1);
}

TEST(Finetune, FrozenBaseAndEarlyStop) {
  const auto& w = world();
  auto m = lora_attach(random_model(7), LoraConfig{});
  const auto digest = base_digest(m.base);

  TrainConfig cfg;
  // Steps far below one ulp of the weights: validation loss stays flat.
  cfg.learning_rate = 1e-300;
  cfg.patience = 2;
  cfg.max_epochs = 10;
  cfg.seed = 3;
  auto [tuned, report] = finetune(m, w.splits, w.graph, cfg);
  EXPECT_EQ(base_digest(tuned.base), digest);
  EXPECT_TRUE(report.stopped_early);
  EXPECT_EQ(report.best_epoch, 0);
  EXPECT_EQ(report.validation_loss.size(), 3u);

  cfg.learning_rate = 0.005;
  cfg.max_epochs = 1;
  auto [moved, r2] = finetune(m, w.splits, w.graph, cfg);
  EXPECT_EQ(base_digest(moved.base), digest);
  EXPECT_GT(r2.steps, 0u);
  EXPECT_EQ(r2.trainable_parameters, m.trainable_parameter_count());
}

TEST(Finetune, RequiresAdapters) {
  const auto& w = world();
  try {
    finetune(random_model(8), w.splits, w.graph, TrainConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoAdapters);
  }
}

TEST(Finetune, Deterministic) {
  const auto& w = world();
  auto m = lora_attach(random_model(9), LoraConfig{});
  TrainConfig cfg;
  cfg.max_epochs = 1;
  cfg.seed = 4;
  auto a = finetune(m, w.splits, w.graph, cfg);
  auto b = finetune(m, w.splits, w.graph, cfg);
  ASSERT_EQ(a.first.adapters.size(), b.first.adapters.size());
  for (std::size_t i = 0; i < a.first.adapters.size(); ++i) {
    EXPECT_TRUE((a.first.adapters[i].B.array() == b.first.adapters[i].B.array()).all());
  }
  EXPECT_EQ(a.second.validation_loss, b.second.validation_loss);
}
