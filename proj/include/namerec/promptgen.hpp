#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "namerec/core.hpp"
#include "namerec/kgraph.hpp"

namespace namerec {

inline constexpr std::string_view kTaskPrefix = "Identify the cultural origin of the following name: ";
inline constexpr std::string_view kInstructionSuffix =
    ". If it's a recognized name, output its specific cultural category; otherwise, state 'Not a Name'.";
inline constexpr std::string_view kDefaultGenericContext = "Cultural context: names vary widely across cultures.";

enum class ContextMode { GroundTruth, Omit, Generic, Forced };

struct ContextPolicy {
  ContextMode mode = ContextMode::Omit;
  /// Culture rendered under Forced.
  std::string forced_culture;
  /// Sentence used under Generic.
  std::string generic_text = std::string(kDefaultGenericContext);
  std::size_t max_facts = kDefaultMaxFacts;

  static ContextPolicy with_mode(ContextMode m) {
    ContextPolicy p;
    p.mode = m;
    return p;
  }
  static ContextPolicy ground_truth() { return with_mode(ContextMode::GroundTruth); }
  static ContextPolicy omit() { return with_mode(ContextMode::Omit); }
  static ContextPolicy generic() { return with_mode(ContextMode::Generic); }
  static ContextPolicy forced(std::string culture) {
    ContextPolicy p = with_mode(ContextMode::Forced);
    p.forced_culture = std::move(culture);
    return p;
  }

  friend bool operator==(const ContextPolicy&, const ContextPolicy&) = default;
};

std::string_view to_string(ContextMode mode);
/// Accepts "truth"/"ground_truth", "omit", "generic".
ContextMode parse_context_mode(std::string_view text);

struct Prompt {
  std::string text;
  Name name;
  ContextSnippet context_used;
};

/// Target response string; one token per character.
struct ResponseText {
  std::string text;
  std::size_t length() const { return text.size(); }
  friend bool operator==(const ResponseText&, const ResponseText&) = default;
};

Prompt build_prompt(const Name& name, const ContextPolicy& policy, const std::optional<Label>& label,
                    const KnowledgeGraph& graph);

ResponseText target_response(const Label& label);

struct Unparseable {
  std::string text;
  friend bool operator==(const Unparseable&, const Unparseable&) = default;
};
using ParsedResponse = std::variant<Label, Unparseable>;

/// Trim, strip trailing punctuation, case-insensitive exact match.
ParsedResponse parse_response(std::string_view text, const CategorySet& categories);

/// Longest display name (including "Not a Name") plus two.
std::size_t max_response_length(const CategorySet& categories);

}  // namespace namerec
