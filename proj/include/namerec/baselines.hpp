#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "namerec/core.hpp"
#include "namerec/plausibility.hpp"

namespace namerec {

enum class PatternKind { Prefix, Suffix, Substring, Charset };

std::string_view to_string(PatternKind kind);
PatternKind parse_pattern_kind(std::string_view text);

struct Rule {
  PatternKind kind = PatternKind::Suffix;
  std::string pattern;
  Label label;
};

/// Ordered rules; the first match wins, otherwise `fallback`.
struct RuleSet {
  std::vector<Rule> rules;
  Label fallback = Label::not_a_name();
};

/// Prefix/suffix/substring compare case-folded text with the case-folded
/// pattern; a charset rule matches when every character of the name occurs in
/// the pattern.
bool rule_matches(const Rule& rule, const Name& name);
Label rule_based_predict(const RuleSet& rules, const Name& name);

/// JSON array of {"kind", "pattern", "culture"}; culture may be "Not a Name".
RuleSet load_rules(const std::filesystem::path& path, const CategorySet& categories);
void save_rules(const std::filesystem::path& path, const RuleSet& rules);

/// Character-sequence baseline: one plausibility model per culture over a
/// shared alphabet, argmax of mean log-probability, NotAName below a floor.
class NgramClassifier {
 public:
  /// Floor = `floor_percentile` of each training name's score under its own
  /// culture's model. Throws EmptyCorpus when there are no culture names.
  static NgramClassifier train(const std::vector<LabeledName>& data, int order = 3, double smoothing = 0.1,
                               double floor_percentile = 1.0);

  /// Per-culture scores in culture order.
  std::map<std::string, double> scores(const Name& name) const;
  Label classify(const Name& name) const;

  double floor() const { return floor_; }
  const std::map<std::string, PlausibilityModel>& models() const { return models_; }

 private:
  std::map<std::string, PlausibilityModel> models_;
  double floor_ = 0.0;
};

}  // namespace namerec
