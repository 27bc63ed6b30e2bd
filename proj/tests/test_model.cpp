#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "namerec/baselines.hpp"
#include "namerec/model.hpp"
#include "namerec/synth.hpp"

using namespace namerec;

namespace {

const CategorySet kCats({"French", "Italian", "Japanese", "West African"});

SurrogateModel<double> random_model(std::uint64_t seed, ModelDims dims = {}) {
  std::mt19937_64 rng(seed);
  SurrogateModel<double> m;
  m.base = ModelParameters<double>::random(dims, rng);
  m.categories = kCats;
  return m;
}

Prompt omit_prompt(const char* text) {
  return build_prompt(normalize_name(text), ContextPolicy::omit(), std::nullopt, KnowledgeGraph(kCats));
}

}  // namespace

TEST(Tokenizer, EncodeAppendsEos) {
  Tokenizer t;
  EXPECT_EQ(t.size(), 98);
  auto ids = t.encode({"Ab"});
  ASSERT_EQ(ids.size(), 3u);
  EXPECT_EQ(ids[0], Tokenizer::kFirstChar + ('A' - 0x20));
  EXPECT_EQ(ids[2], Tokenizer::kEos);
  EXPECT_EQ(t.id(U'é'), Tokenizer::kUnk);
}

TEST(Features, UnitSumSortedUnique) {
  auto phi = prompt_features("Identify Jean-Pierre", 2048);
  double sum = 0;
  for (double v : phi.value) sum += v;
  EXPECT_NEAR(sum, 1.0, 1e-12);
  for (std::size_t i = 1; i < phi.index.size(); ++i) EXPECT_LT(phi.index[i - 1], phi.index[i]);
}

TEST(Features, OneCharacterChangeTouchesFewSlots) {
  // A substitution changes at most the three trigrams covering it: three
  // slots lose counts and three gain them.
  const std::string a = "Identify the cultural origin of the following name: Marie.";
  const std::string b = "Identify the cultural origin of the following name: Maria.";
  auto count_of = [](const std::string& text) {
    const auto u = to_u32(text);
    std::map<int, int> c;
    for (std::size_t i = 0; i + 3 <= u.size(); ++i) ++c[trigram_slot(u.substr(i, 3), 2048)];
    return c;
  };
  auto ca = count_of(a), cb = count_of(b);
  std::set<int> differing;
  for (const auto& [k, v] : ca)
    if (cb[k] != v) differing.insert(k);
  for (const auto& [k, v] : cb)
    if (ca[k] != v) differing.insert(k);
  EXPECT_LE(differing.size(), 6u);

  auto pa = prompt_features(a, 2048), pb = prompt_features(b, 2048);
  std::set<int> sa(pa.index.begin(), pa.index.end()), sb(pb.index.begin(), pb.index.end());
  for (int k : sa) {
    if (!sb.count(k)) {
      EXPECT_TRUE(differing.count(k));
    }
  }
}

TEST(Encode, DeterministicAndZero) {
  auto m = random_model(1);
  const auto p = omit_prompt("Marie");
  const auto h1 = encode_prompt(m, p);
  const auto h2 = encode_prompt(m, p);
  EXPECT_TRUE((h1.array() == h2.array()).all());

  m.base.encoder.setZero();
  EXPECT_TRUE(encode_prompt(m, p).isZero(0.0));
}

TEST(ResponseLogprob, UniformModel) {
  SurrogateModel<double> m;
  m.base = ModelParameters<double>::zeros(ModelDims{});
  m.categories = kCats;
  const double V = m.dims().vocab;
  for (const char* r : {"French", "Not a Name", "X"}) {
    const double M = std::string(r).size();
    EXPECT_NEAR(response_logprob(m, omit_prompt("Ana"), {r}), (M + 1) * std::log(1.0 / V), 1e-12);
  }
}

TEST(Predict, UniformModelRanksByLength) {
  SurrogateModel<double> m;
  m.base = ModelParameters<double>::zeros(ModelDims{});
  CategorySet cats({"Zulu", "Thai", "French", "Italian"});
  auto ranking = predict(m, omit_prompt("Ana"), cats);
  ASSERT_EQ(ranking.size(), 5u);
  // Equal-length "Thai" and "Zulu" tie; the smaller display name comes first.
  EXPECT_EQ(ranking[0].label.display(), "Thai");
  EXPECT_EQ(ranking[1].label.display(), "Zulu");
  EXPECT_EQ(ranking[2].label.display(), "French");
  EXPECT_EQ(ranking[3].label.display(), "Italian");
  EXPECT_EQ(ranking[4].label.display(), "Not a Name");
  EXPECT_EQ(ranking[0].logprob, ranking[1].logprob);
}

TEST(Predict, MatchesExhaustiveScoring) {
  auto m = random_model(2);
  for (const char* name : {"Marie", "Suzuki", "Xq"}) {
    const auto p = omit_prompt(name);
    auto ranking = predict(m, p, kCats);
    std::vector<ScoredLabel<double>> oracle;
    for (const auto& l : kCats.labels_with_not_a_name())
      oracle.push_back({l, response_logprob(m, p, target_response(l))});
    std::sort(oracle.begin(), oracle.end(), [](const auto& a, const auto& b) {
      return a.logprob != b.logprob ? a.logprob > b.logprob : a.label.display() < b.label.display();
    });
    ASSERT_EQ(ranking.size(), oracle.size());
    for (std::size_t i = 0; i < ranking.size(); ++i) {
      EXPECT_EQ(ranking[i].label, oracle[i].label);
      EXPECT_EQ(ranking[i].logprob, oracle[i].logprob);
    }
  }
  EXPECT_THROW(predict(m, omit_prompt("Ana"), CategorySet{}), Error);
}

TEST(Lora, ParamCount) {
  EXPECT_EQ(lora_param_count({{64, 64}}, 4), 512u);
  EXPECT_EQ(lora_param_count({{64, 64}, {32, 64}, {64, 96}}, 4), 512u + 128u + 256u + 256u + 384u);
  EXPECT_EQ(lora_param_count({}, 4), 0u);
}

TEST(Lora, EffectiveWeightByHand) {
  ModelDims d{2, 2, 2, Tokenizer{}.size()};
  SurrogateModel<double> m;
  m.base = ModelParameters<double>::zeros(d);
  m.base.recurrent << 1, 2, 3, 4;
  LoraAdapter<double> a;
  a.target = MatrixId::Recurrent;
  a.A.resize(1, 2);
  a.A << 5, 6;
  a.B.resize(2, 1);
  a.B << 7, 8;
  m.adapters.push_back(a);
  Eigen::MatrixXd expected(2, 2);
  // [1 2; 3 4] + [7; 8] [5 6]
  expected << 36, 44, 43, 52;
  EXPECT_TRUE(m.effective(MatrixId::Recurrent).isApprox(expected, 0.0));
  EXPECT_EQ(m.trainable_parameter_count(), 4u);
}

TEST(Lora, AttachIsIdentityAndFreezes) {
  auto m = random_model(3);
  LoraConfig cfg;
  cfg.seed = 9;
  auto a = lora_attach(m, cfg);
  EXPECT_TRUE(a.frozen);
  EXPECT_EQ(a.adapters.size(), 3u);
  for (const auto& ad : a.adapters) {
    EXPECT_TRUE(ad.B.isZero(0.0));
    EXPECT_FALSE(ad.A.isZero(0.0));
    EXPECT_TRUE((a.effective(ad.target).array() == m.base.get(ad.target).array()).all());
  }
  EXPECT_EQ(base_digest(a.base), base_digest(m.base));
}

TEST(Lora, AttachValidation) {
  auto m = random_model(4);
  std::mt19937_64 rng(1);
  try {
    lora_attach(m, {MatrixId::Recurrent}, 64, 0.1, rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::RankTooLarge);
  }
  EXPECT_THROW(lora_attach(m, {MatrixId::Recurrent, MatrixId::Recurrent}, 4, 0.1, rng), Error);
  EXPECT_THROW(lora_attach(m, {MatrixId::Recurrent}, 0, 0.1, rng), Error);
  try {
    parse_matrix_ids({"W_q"});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownMatrix);
  }
}

TEST(Persistence, SaveLoadRoundTrip) {
  auto m = lora_attach(random_model(5), LoraConfig{});
  m.adapters[0].B.setConstant(0.25);
  const auto path = (std::filesystem::temp_directory_path() / "namerec_model_rt.model").string();
  save_model(path, m);
  auto back = load_model(path);
  EXPECT_EQ(base_digest(back.base), base_digest(m.base));
  EXPECT_EQ(back.categories.names(), m.categories.names());
  ASSERT_EQ(back.adapters.size(), m.adapters.size());
  for (std::size_t i = 0; i < m.adapters.size(); ++i) {
    EXPECT_EQ(back.adapters[i].target, m.adapters[i].target);
    EXPECT_TRUE((back.adapters[i].A.array() == m.adapters[i].A.array()).all());
    EXPECT_TRUE((back.adapters[i].B.array() == m.adapters[i].B.array()).all());
  }
  EXPECT_EQ(back.frozen, m.frozen);
  std::filesystem::remove(path);
  EXPECT_THROW(load_model(path), Error);
}

TEST(RuleBaseline, Matching) {
  RuleSet rules;
  rules.rules.push_back({PatternKind::Suffix, "escu", Label::culture("Romanian")});
  EXPECT_EQ(rule_based_predict(rules, normalize_name("Ionescu")), Label::culture("Romanian"));
  EXPECT_EQ(rule_based_predict(RuleSet{}, normalize_name("Ionescu")), Label::not_a_name());

  RuleSet ordered;
  ordered.rules.push_back({PatternKind::Prefix, "O'", Label::culture("Irish")});
  ordered.rules.push_back({PatternKind::Suffix, "son", Label::culture("Scandinavian")});
  EXPECT_EQ(rule_based_predict(ordered, normalize_name("O'Larsson")), Label::culture("Irish"));
  EXPECT_EQ(rule_based_predict(ordered, normalize_name("Larsson")), Label::culture("Scandinavian"));

  EXPECT_TRUE(rule_matches({PatternKind::Substring, "AN", Label::culture("X")}, normalize_name("Joanna")));
  EXPECT_TRUE(rule_matches({PatternKind::Charset, "Aabn", Label::culture("X")}, normalize_name("Anna")));
  EXPECT_FALSE(rule_matches({PatternKind::Charset, "abn", Label::culture("X")}, normalize_name("Annie")));
}

TEST(NgramBaseline, SingleCultureAndTies) {
  std::vector<LabeledName> data;
  for (const char* n : {"Marie", "Maria", "Mario", "Marion"}) data.push_back({normalize_name(n), Label::culture("A")});
  auto one = NgramClassifier::train(data);
  EXPECT_EQ(one.classify(normalize_name("Marie")), Label::culture("A"));

  std::vector<LabeledName> twins = data;
  for (const char* n : {"Marie", "Maria", "Mario", "Marion"}) twins.push_back({normalize_name(n), Label::culture("B")});
  auto two = NgramClassifier::train(twins);
  EXPECT_EQ(two.classify(normalize_name("Mario")), Label::culture("A"));

  std::vector<LabeledName> negatives_only = {{normalize_name("Xq"), Label::not_a_name()}};
  EXPECT_THROW(NgramClassifier::train(negatives_only), Error);
}
