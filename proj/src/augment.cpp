#include "namerec/augment.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <unicode/uchar.h>

namespace namerec {

void AugmentConfig::validate() const {
  for (double p : {p_insert, p_delete, p_substitute, p_transpose, fusion_rate}) {
    if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::InvalidConfig, "augmentation probabilities must lie in [0, 1]");
  }
  if (max_edits < 1) throw Error(ErrorCode::InvalidConfig, "max_edits must be at least 1");
  // Infinite thresholds are the degenerate accept-all / reject-all settings.
  if (std::isnan(tau)) throw Error(ErrorCode::InvalidConfig, "tau is NaN");
  if (per_name_budget < 0) throw Error(ErrorCode::InvalidConfig, "per_name_budget must be non-negative");
  if (attempts_per_member < 1) throw Error(ErrorCode::InvalidConfig, "attempts_per_member must be at least 1");
}

std::u32string apply_edit(std::u32string chars, EditOp op, std::size_t pos, char32_t c) {
  switch (op) {
    case EditOp::Insert:
      chars.insert(chars.begin() + static_cast<std::ptrdiff_t>(pos), c);
      break;
    case EditOp::Delete:
      chars.erase(chars.begin() + static_cast<std::ptrdiff_t>(pos));
      break;
    case EditOp::Substitute:
      chars[pos] = c;
      break;
    case EditOp::Transpose:
      std::swap(chars[pos], chars[pos + 1]);
      break;
  }
  return chars;
}

namespace {

bool is_sampleable(char32_t c) {
  return c != PlausibilityModel::kBoundary && c != PlausibilityModel::kUnknown &&
         !u_isUWhiteSpace(static_cast<UChar32>(c));
}

// Draws a printable character from the model's next-symbol distribution at
// `pos`, excluding `avoid`. Returns 0 when no character qualifies.
char32_t sample_char(const PlausibilityModel& model, const std::u32string& chars, std::size_t pos, char32_t avoid,
                     Rng& rng) {
  const auto dist = model.distribution(model.history_at(chars, pos));
  const auto& symbols = model.symbols();
  std::vector<double> weights(symbols.size(), 0.0);
  bool any = false;
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    if (is_sampleable(symbols[i]) && symbols[i] != avoid) {
      weights[i] = dist[i];
      any = true;
    }
  }
  if (!any) return 0;
  std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
  return symbols[pick(rng)];
}

bool is_canonical(const std::u32string& chars) {
  if (chars.empty()) return false;
  try {
    const std::string text = to_utf8(chars);
    return normalize_name(text).text() == text;
  } catch (const Error&) {
    return false;
  }
}

// One random edit; returns false when the drawn operation is impossible.
bool random_edit(std::u32string& chars, const AugmentConfig& config, const PlausibilityModel& model, Rng& rng) {
  std::discrete_distribution<int> op_pick(
      {config.p_insert, config.p_delete, config.p_substitute, config.p_transpose});
  const auto op = static_cast<EditOp>(op_pick(rng));
  const std::size_t len = chars.size();
  switch (op) {
    case EditOp::Insert: {
      const auto pos = std::uniform_int_distribution<std::size_t>(0, len)(rng);
      const char32_t c = sample_char(model, chars, pos, 0, rng);
      if (!c) return false;
      chars = apply_edit(std::move(chars), op, pos, c);
      return true;
    }
    case EditOp::Delete: {
      if (len < 2) return false;
      const auto pos = std::uniform_int_distribution<std::size_t>(0, len - 1)(rng);
      chars = apply_edit(std::move(chars), op, pos);
      return true;
    }
    case EditOp::Substitute: {
      const auto pos = std::uniform_int_distribution<std::size_t>(0, len - 1)(rng);
      const char32_t c = sample_char(model, chars, pos, chars[pos], rng);
      if (!c) return false;
      chars = apply_edit(std::move(chars), op, pos, c);
      return true;
    }
    case EditOp::Transpose: {
      if (len < 2) return false;
      const auto pos = std::uniform_int_distribution<std::size_t>(0, len - 2)(rng);
      if (chars[pos] == chars[pos + 1]) return false;
      chars = apply_edit(std::move(chars), op, pos);
      return true;
    }
  }
  return false;
}

constexpr int kPerturbAttempts = 16;

}  // namespace

Name perturb(const Name& name, const AugmentConfig& config, const PlausibilityModel& model, Rng& rng) {
  const auto& original = name.chars();
  if (config.p_insert + config.p_delete + config.p_substitute + config.p_transpose > 0) {
    for (int attempt = 0; attempt < kPerturbAttempts; ++attempt) {
      std::u32string chars = original;
      const int edits = std::uniform_int_distribution<int>(1, config.max_edits)(rng);
      for (int e = 0; e < edits; ++e) {
        // Impossible draws (deleting from one character, ...) are skipped and
        // count against the edit budget.
        random_edit(chars, config, model, rng);
      }
      if (chars != original && is_canonical(chars)) return Name::from_normalized(to_utf8(chars));
    }
  }
  // Forced single substitution of a non-space character.
  std::vector<std::size_t> positions;
  for (std::size_t i = 0; i < original.size(); ++i)
    if (original[i] != U' ') positions.push_back(i);
  const std::size_t pos = positions[std::uniform_int_distribution<std::size_t>(0, positions.size() - 1)(rng)];
  char32_t c = sample_char(model, original, pos, original[pos], rng);
  if (!c) c = original[pos] == U'x' ? U'y' : U'x';
  return Name::from_normalized(to_utf8(apply_edit(original, EditOp::Substitute, pos, c)));
}

LabeledName fuse_at(const LabeledName& a, const LabeledName& b, std::size_t a_split, std::size_t b_split) {
  if (!a.label.is_culture() || !b.label.is_culture()) {
    throw Error(ErrorCode::UnlabeledInput, "fusion needs two culture-labeled names");
  }
  const auto& ca = a.name.chars();
  const auto& cb = b.name.chars();
  if (ca.size() < 2 || cb.size() < 2) throw Error(ErrorCode::UnlabeledInput, "fusion needs names of length >= 2");
  if (a_split < 1 || a_split > ca.size() - 1 || b_split < 1 || b_split > cb.size() - 1) {
    throw Error(ErrorCode::InvalidConfig, "fusion split point out of range");
  }
  std::u32string fused = ca.substr(0, a_split) + cb.substr(b_split);
  return LabeledName{normalize_name(to_utf8(fused)), a.label, Augmented{a.name.text()}};
}

LabeledName fuse_cross_cultural(const LabeledName& a, const LabeledName& b, Rng& rng) {
  if (!a.label.is_culture() || !b.label.is_culture()) {
    throw Error(ErrorCode::UnlabeledInput, "fusion needs two culture-labeled names");
  }
  if (a.name.length() < 2 || b.name.length() < 2) {
    throw Error(ErrorCode::UnlabeledInput, "fusion needs names of length >= 2");
  }
  const auto sa = std::uniform_int_distribution<std::size_t>(1, a.name.length() - 1)(rng);
  const auto sb = std::uniform_int_distribution<std::size_t>(1, b.name.length() - 1)(rng);
  return fuse_at(a, b, sa, sb);
}

std::vector<LabeledName> AugmentationSet::as_labeled() const {
  std::vector<LabeledName> out;
  out.reserve(members.size());
  for (const auto& m : members) out.push_back(LabeledName{m.name, source.label, Augmented{source.name.text()}});
  return out;
}

AugmentationSet augment_set(const LabeledName& source, const AugmentConfig& config, const PlausibilityModel& model,
                            const std::vector<LabeledName>& fusion_pool, Rng& rng) {
  AugmentationSet out{source, {}};
  if (config.per_name_budget == 0) return out;

  // Fusion partners: culture-labeled names of a different culture.
  std::vector<const LabeledName*> partners;
  if (config.fusion_enabled && source.label.is_culture() && source.name.length() >= 2) {
    for (const auto& item : fusion_pool) {
      if (item.label.is_culture() && item.label != source.label && item.name.length() >= 2) {
        partners.push_back(&item);
      }
    }
  }

  std::set<std::string> seen{source.name.text()};
  const int attempts = config.per_name_budget * config.attempts_per_member;
  std::bernoulli_distribution use_fusion(partners.empty() ? 0.0 : config.fusion_rate);
  for (int attempt = 0; attempt < attempts && static_cast<int>(out.members.size()) < config.per_name_budget;
       ++attempt) {
    AugmentedMember candidate{source.name, 0.0, use_fusion(rng)};
    if (candidate.fused) {
      const auto* partner = partners[std::uniform_int_distribution<std::size_t>(0, partners.size() - 1)(rng)];
      candidate.name = fuse_cross_cultural(source, *partner, rng).name;
    } else {
      candidate.name = perturb(source.name, config, model, rng);
    }
    if (!seen.insert(candidate.name.text()).second) continue;
    candidate.score = plausibility_score(model, candidate.name);
    if (candidate.score >= config.tau) out.members.push_back(std::move(candidate));
  }
  return out;
}

}  // namespace namerec
