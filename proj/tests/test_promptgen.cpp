#include <gtest/gtest.h>

#include "namerec/promptgen.hpp"
#include "namerec/synth.hpp"

using namespace namerec;

namespace {

const CategorySet kCats({"French", "East Asian", "Italian"});

KnowledgeGraph french_graph() {
  return parse_graph(R"({"French": ["often feature hyphens and silent final consonants"]})", kCats);
}

const std::string kAnaOmit =
    "Identify the cultural origin of the following name: Ana. If it's a recognized name, output its specific "
    "cultural category; otherwise, state 'Not a Name'.";

}  // namespace

TEST(BuildPrompt, FrenchGroundTruth) {
  auto p = build_prompt(normalize_name("Jean-Pierre"), ContextPolicy::ground_truth(), Label::culture("French"),
                        french_graph());
  EXPECT_EQ(p.text,
            "Identify the cultural origin of the following name: Cultural context: French names often feature "
            "hyphens and silent final consonants. Jean-Pierre. If it's a recognized name, output its specific "
            "cultural category; otherwise, state 'Not a Name'.");
}

TEST(BuildPrompt, OmitAndEmptyContextCollapse) {
  const auto g = french_graph();
  const auto ana = normalize_name("Ana");
  EXPECT_EQ(build_prompt(ana, ContextPolicy::omit(), std::nullopt, g).text, kAnaOmit);
  EXPECT_EQ(build_prompt(ana, ContextPolicy::ground_truth(), Label::culture("Italian"), g).text, kAnaOmit);
  EXPECT_EQ(build_prompt(ana, ContextPolicy::ground_truth(), Label::not_a_name(), g).text, kAnaOmit);
}

TEST(BuildPrompt, GroundTruthNeedsLabel) {
  try {
    build_prompt(normalize_name("Ana"), ContextPolicy::ground_truth(), std::nullopt, french_graph());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingLabel);
  }
}

TEST(BuildPrompt, GenericAndForced) {
  const auto g = french_graph();
  auto generic = build_prompt(normalize_name("Ana"), ContextPolicy::generic(), std::nullopt, g);
  EXPECT_NE(generic.text.find(std::string(kDefaultGenericContext) + " Ana."), std::string::npos);
  auto forced = build_prompt(normalize_name("Ana"), ContextPolicy::forced("French"), std::nullopt, g);
  EXPECT_EQ(forced.context_used.text,
            "Cultural context: French names often feature hyphens and silent final consonants.");
}

TEST(TargetResponse, DisplayNames) {
  EXPECT_EQ(target_response(Label::culture("French")).text, "French");
  EXPECT_EQ(target_response(Label::not_a_name()).text, "Not a Name");
  EXPECT_EQ(target_response(Label::culture("East Asian")).text, "East Asian");
}

TEST(ParseResponse, Cases) {
  EXPECT_EQ(std::get<Label>(parse_response("french", kCats)), Label::culture("French"));
  EXPECT_EQ(std::get<Label>(parse_response(" Not a Name.", kCats)), Label::not_a_name());
  EXPECT_EQ(std::get<Label>(parse_response("EAST ASIAN!", kCats)), Label::culture("East Asian"));
  EXPECT_TRUE(std::holds_alternative<Unparseable>(parse_response("Possibly French or Breton", kCats)));
  EXPECT_TRUE(std::holds_alternative<Unparseable>(parse_response("", kCats)));
}

TEST(ParseResponse, RoundTripsDefaultCategories) {
  const auto cats = default_categories();
  for (const auto& label : cats.labels_with_not_a_name()) {
    auto parsed = parse_response(target_response(label).text, cats);
    ASSERT_TRUE(std::holds_alternative<Label>(parsed)) << label.display();
    EXPECT_EQ(std::get<Label>(parsed), label);
  }
}

TEST(ContextPolicyNames, Parse) {
  EXPECT_EQ(parse_context_mode("truth"), ContextMode::GroundTruth);
  EXPECT_EQ(parse_context_mode("ground_truth"), ContextMode::GroundTruth);
  EXPECT_EQ(parse_context_mode("omit"), ContextMode::Omit);
  EXPECT_THROW(parse_context_mode("sometimes"), Error);
}

TEST(MaxResponseLength, LongestPlusTwo) {
  // "East Asian" and "Not a Name" are both 10 characters.
  EXPECT_EQ(max_response_length(kCats), 12u);
}
