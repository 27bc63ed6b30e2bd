#include "namerec/promptgen.hpp"

#include <algorithm>

#include <unicode/uchar.h>

namespace namerec {

std::string_view to_string(ContextMode mode) {
  switch (mode) {
    case ContextMode::GroundTruth: return "truth";
    case ContextMode::Omit: return "omit";
    case ContextMode::Generic: return "generic";
    case ContextMode::Forced: return "forced";
  }
  return "";
}

ContextMode parse_context_mode(std::string_view text) {
  if (text == "truth" || text == "ground_truth") return ContextMode::GroundTruth;
  if (text == "omit") return ContextMode::Omit;
  if (text == "generic") return ContextMode::Generic;
  if (text == "forced") return ContextMode::Forced;
  throw Error(ErrorCode::InvalidConfig, "unknown context policy '" + std::string(text) + "'");
}

Prompt build_prompt(const Name& name, const ContextPolicy& policy, const std::optional<Label>& label,
                    const KnowledgeGraph& graph) {
  ContextSnippet context;
  switch (policy.mode) {
    case ContextMode::GroundTruth:
      if (!label) throw Error(ErrorCode::MissingLabel, "ground-truth context needs a label for '" + name.text() + "'");
      if (label->is_culture()) context = render_context(graph, label->culture_name(), policy.max_facts);
      break;
    case ContextMode::Omit:
      break;
    case ContextMode::Generic:
      context.text = policy.generic_text;
      break;
    case ContextMode::Forced:
      context = render_context(graph, policy.forced_culture, policy.max_facts);
      break;
  }
  std::string text(kTaskPrefix);
  if (!context.empty()) {
    text += context.text;
    text += ' ';
  }
  text += name.text();
  text += kInstructionSuffix;
  return Prompt{std::move(text), name, std::move(context)};
}

ResponseText target_response(const Label& label) { return ResponseText{label.display()}; }

ParsedResponse parse_response(std::string_view text, const CategorySet& categories) {
  std::u32string chars = to_u32(text);
  auto is_space = [](char32_t c) { return u_isUWhiteSpace(static_cast<UChar32>(c)); };
  while (!chars.empty() && is_space(chars.front())) chars.erase(chars.begin());
  while (!chars.empty() && (is_space(chars.back()) || u_ispunct(static_cast<UChar32>(chars.back())))) {
    chars.pop_back();
  }
  const std::string key = casefold(to_utf8(chars));
  if (key == casefold(kNotANameText)) return Label::not_a_name();
  for (const auto& culture : categories.names()) {
    if (casefold(culture) == key) return Label::culture(culture);
  }
  return Unparseable{std::string(text)};
}

std::size_t max_response_length(const CategorySet& categories) {
  std::size_t longest = kNotANameText.size();
  for (const auto& c : categories.names()) longest = std::max(longest, c.size());
  return longest + 2;
}

}  // namespace namerec
