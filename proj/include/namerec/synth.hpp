#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "namerec/augment.hpp"
#include "namerec/baselines.hpp"
#include "namerec/core.hpp"
#include "namerec/kgraph.hpp"

namespace namerec {

/// Generative description of one culture's names. A word is an optional
/// prefix, min..max syllables and an optional suffix; quirks then join,
/// extend or decorate words.
struct CultureSpec {
  std::string culture;
  std::vector<std::string> syllables;
  std::vector<std::string> prefixes;
  std::vector<std::string> suffixes;
  int min_syllables = 1;
  int max_syllables = 3;
  double prefix_prob = 0.3;
  double suffix_prob = 0.5;
  double hyphen_prob = 0.0;      // second word joined with '-'
  double apostrophe_prob = 0.0;  // "X'" + word, X from apostrophe_heads
  std::vector<std::string> apostrophe_heads = {"O"};
  double multipart_prob = 0.0;   // extra space-separated word
  std::vector<std::string> particles;  // optional words before the extra part
  double diacritic_prob = 0.0;   // per eligible character
  std::map<std::string, std::string> diacritics;

  /// Throws InvalidConfig for empty inventories or probabilities outside [0,1].
  void validate() const;
};

std::vector<CultureSpec> default_culture_specs();
CategorySet default_categories();
KnowledgeGraph default_graph();
RuleSet default_rules();

/// One name drawn from `spec`, already normalized.
Name sample_name(const CultureSpec& spec, Rng& rng);

/// per_culture names for every spec plus `not_a_name_count` random-string
/// negatives that fall below every culture's plausibility floor. Globally
/// unique by text. Throws SpecExhausted.
std::vector<LabeledName> gen_corpus(const std::vector<CultureSpec>& specs, std::size_t per_culture,
                                    std::size_t not_a_name_count, std::uint64_t seed);

/// Percentile of a culture model's own training scores below which the
/// generator treats a string as foreign to that culture.
inline constexpr double kNegativeFloorPercentile = 1.0;

}  // namespace namerec
