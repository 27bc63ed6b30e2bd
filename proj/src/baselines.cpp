#include "namerec/baselines.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace namerec {

using nlohmann::json;

std::string_view to_string(PatternKind kind) {
  switch (kind) {
    case PatternKind::Prefix: return "prefix";
    case PatternKind::Suffix: return "suffix";
    case PatternKind::Substring: return "substring";
    case PatternKind::Charset: return "charset";
  }
  return "";
}

PatternKind parse_pattern_kind(std::string_view text) {
  for (auto k : {PatternKind::Prefix, PatternKind::Suffix, PatternKind::Substring, PatternKind::Charset})
    if (to_string(k) == text) return k;
  throw Error(ErrorCode::ParseError, "unknown rule kind '" + std::string(text) + "'");
}

bool rule_matches(const Rule& rule, const Name& name) {
  if (rule.kind == PatternKind::Charset) {
    const std::u32string set = to_u32(rule.pattern);
    return std::all_of(name.chars().begin(), name.chars().end(),
                       [&](char32_t c) { return set.find(c) != std::u32string::npos; });
  }
  const std::string text = casefold(name.text());
  const std::string pat = casefold(rule.pattern);
  switch (rule.kind) {
    case PatternKind::Prefix: return text.starts_with(pat);
    case PatternKind::Suffix: return text.ends_with(pat);
    case PatternKind::Substring: return text.find(pat) != std::string::npos;
    case PatternKind::Charset: break;
  }
  return false;
}

Label rule_based_predict(const RuleSet& rules, const Name& name) {
  for (const auto& r : rules.rules)
    if (rule_matches(r, name)) return r.label;
  return rules.fallback;
}

RuleSet load_rules(const std::filesystem::path& path, const CategorySet& categories) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open rules " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  RuleSet out;
  try {
    const json j = json::parse(ss.str());
    if (!j.is_array()) throw Error(ErrorCode::ParseError, "rule file must be a JSON array");
    for (const auto& r : j) {
      Rule rule{parse_pattern_kind(r.at("kind").get<std::string>()), r.at("pattern").get<std::string>(),
                Label::not_a_name()};
      if (rule.pattern.empty()) throw Error(ErrorCode::ParseError, "empty rule pattern");
      const auto culture = r.at("culture").get<std::string>();
      if (culture != kNotANameText) {
        if (!categories.contains(culture)) throw Error(ErrorCode::UnknownCulture, culture);
        rule.label = Label::culture(culture);
      }
      out.rules.push_back(std::move(rule));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
  return out;
}

void save_rules(const std::filesystem::path& path, const RuleSet& rules) {
  json j = json::array();
  for (const auto& r : rules.rules) {
    j.push_back({{"kind", to_string(r.kind)}, {"pattern", r.pattern}, {"culture", r.label.display()}});
  }
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

NgramClassifier NgramClassifier::train(const std::vector<LabeledName>& data, int order, double smoothing,
                                       double floor_percentile) {
  std::map<std::string, std::vector<Name>> by_culture;
  std::u32string alphabet;
  {
    std::set<char32_t> chars;
    for (const auto& item : data) chars.insert(item.name.chars().begin(), item.name.chars().end());
    alphabet.assign(chars.begin(), chars.end());
  }
  for (const auto& item : data)
    if (item.label.is_culture()) by_culture[item.label.culture_name()].push_back(item.name);
  if (by_culture.empty()) throw Error(ErrorCode::EmptyCorpus, "n-gram baseline needs culture-labeled names");

  NgramClassifier c;
  std::vector<double> own_scores;
  for (const auto& [culture, names] : by_culture) {
    auto model = train_plausibility(names, order, smoothing, alphabet);
    for (const auto& n : names) own_scores.push_back(plausibility_score(model, n));
    c.models_.emplace(culture, std::move(model));
  }
  c.floor_ = percentile_of(std::move(own_scores), floor_percentile);
  return c;
}

std::map<std::string, double> NgramClassifier::scores(const Name& name) const {
  std::map<std::string, double> out;
  for (const auto& [culture, model] : models_) out[culture] = plausibility_score(model, name);
  return out;
}

Label NgramClassifier::classify(const Name& name) const {
  const std::string* best = nullptr;
  double best_score = 0.0;
  // std::map iterates cultures in ascending order, so strict '>' keeps the
  // lexicographically first culture on ties.
  for (const auto& [culture, model] : models_) {
    const double s = plausibility_score(model, name);
    if (!best || s > best_score) {
      best = &culture;
      best_score = s;
    }
  }
  if (best_score < floor_) return Label::not_a_name();
  return Label::culture(*best);
}

}  // namespace namerec
