#include "namerec/core.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

namespace namerec {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptyName: return "EmptyName";
    case ErrorCode::InvalidRatios: return "InvalidRatios";
    case ErrorCode::EmptyCultureHoldout: return "EmptyCultureHoldout";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::UnknownCulture: return "UnknownCulture";
    case ErrorCode::MissingLabel: return "MissingLabel";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::UnlabeledInput: return "UnlabeledInput";
    case ErrorCode::RankTooLarge: return "RankTooLarge";
    case ErrorCode::UnknownMatrix: return "UnknownMatrix";
    case ErrorCode::EmptyBatch: return "EmptyBatch";
    case ErrorCode::NoAdapters: return "NoAdapters";
    case ErrorCode::EmptyValidation: return "EmptyValidation";
    case ErrorCode::UnknownLabel: return "UnknownLabel";
    case ErrorCode::EmptyMatrix: return "EmptyMatrix";
    case ErrorCode::EmptySet: return "EmptySet";
    case ErrorCode::IllegalPolicy: return "IllegalPolicy";
    case ErrorCode::SpecExhausted: return "SpecExhausted";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

std::u32string to_u32(std::string_view utf8) {
  icu::UnicodeString u = icu::UnicodeString::fromUTF8(
      icu::StringPiece(utf8.data(), static_cast<int32_t>(utf8.size())));
  std::u32string out;
  out.reserve(static_cast<std::size_t>(u.length()));
  for (int32_t i = 0; i < u.length();) {
    UChar32 c = u.char32At(i);
    out.push_back(static_cast<char32_t>(c));
    i += U16_LENGTH(c);
  }
  return out;
}

std::string to_utf8(std::u32string_view chars) {
  icu::UnicodeString u;
  for (char32_t c : chars) u.append(static_cast<UChar32>(c));
  std::string out;
  u.toUTF8String(out);
  return out;
}

std::string casefold(std::string_view text) {
  icu::UnicodeString u = icu::UnicodeString::fromUTF8(
      icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  u.foldCase();
  std::string out;
  u.toUTF8String(out);
  return out;
}

Name normalize_name(std::string_view raw) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw Error(ErrorCode::ParseError, "ICU NFC normalizer unavailable");
  icu::UnicodeString u = icu::UnicodeString::fromUTF8(
      icu::StringPiece(raw.data(), static_cast<int32_t>(raw.size())));
  icu::UnicodeString composed = nfc->normalize(u, status);
  if (U_FAILURE(status)) throw Error(ErrorCode::ParseError, "cannot normalize name");

  std::u32string chars;
  bool pending_space = false;
  for (int32_t i = 0; i < composed.length();) {
    UChar32 c = composed.char32At(i);
    i += U16_LENGTH(c);
    if (u_isUWhiteSpace(c)) {
      pending_space = !chars.empty();
      continue;
    }
    if (pending_space) chars.push_back(U' ');
    pending_space = false;
    chars.push_back(static_cast<char32_t>(c));
  }
  if (chars.empty()) throw Error(ErrorCode::EmptyName, "name is empty or whitespace-only");
  std::string text = to_utf8(chars);
  return Name(std::move(text), std::move(chars));
}

Name Name::from_normalized(std::string_view text) {
  Name n = normalize_name(text);
  if (n.text() != text) {
    throw Error(ErrorCode::ParseError, "text is not in canonical form: '" + std::string(text) + "'");
  }
  return n;
}

CategorySet::CategorySet(std::vector<std::string> names) : names_(std::move(names)) {
  std::set<std::string> seen;
  for (const auto& n : names_) {
    if (n.empty()) throw Error(ErrorCode::InvalidConfig, "empty culture name");
    if (casefold(n) == casefold(kNotANameText)) {
      throw Error(ErrorCode::InvalidConfig, "'Not a Name' cannot be a culture");
    }
    if (!seen.insert(casefold(n)).second) {
      throw Error(ErrorCode::InvalidConfig, "duplicate culture '" + n + "'");
    }
  }
}

bool CategorySet::contains(std::string_view culture) const {
  return std::find(names_.begin(), names_.end(), culture) != names_.end();
}

std::size_t CategorySet::index_of(const Label& label) const {
  if (label.is_not_a_name()) return names_.size();
  auto it = std::find(names_.begin(), names_.end(), label.culture_name());
  if (it == names_.end()) throw Error(ErrorCode::UnknownLabel, label.culture_name());
  return static_cast<std::size_t>(it - names_.begin());
}

std::vector<Label> CategorySet::labels_with_not_a_name() const {
  std::vector<Label> out;
  out.reserve(names_.size() + 1);
  for (const auto& n : names_) out.push_back(Label::culture(n));
  out.push_back(Label::not_a_name());
  return out;
}

Label CategorySet::parse_label(std::string_view text) const {
  if (text == kNotANameText) return Label::not_a_name();
  if (!contains(text)) throw Error(ErrorCode::UnknownLabel, std::string(text));
  return Label::culture(std::string(text));
}

std::string_view to_string(ZeroShotMode mode) {
  return mode == ZeroShotMode::UnseenNames ? "unseen_names" : "unseen_cultures";
}

ZeroShotMode parse_zero_shot_mode(std::string_view text) {
  if (text == "unseen_names" || text == "unseen-names") return ZeroShotMode::UnseenNames;
  if (text == "unseen_cultures" || text == "unseen-cultures") return ZeroShotMode::UnseenCultures;
  throw Error(ErrorCode::InvalidConfig, "unknown zero-shot mode '" + std::string(text) + "'");
}

namespace {

// Groups of item indices sharing one case-folded text, in first-seen order.
std::vector<std::vector<std::size_t>> group_by_text(const std::vector<LabeledName>& data,
                                                    const std::vector<std::size_t>& items) {
  std::map<std::string, std::size_t> slot;
  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t i : items) {
    auto key = casefold(data[i].name.text());
    auto [it, inserted] = slot.emplace(key, groups.size());
    if (inserted) groups.emplace_back();
    groups[it->second].push_back(i);
  }
  return groups;
}

void append_groups(const std::vector<LabeledName>& data,
                   const std::vector<std::vector<std::size_t>>& groups, std::size_t begin,
                   std::size_t end, std::vector<LabeledName>& out) {
  for (std::size_t g = begin; g < end; ++g)
    for (std::size_t i : groups[g]) out.push_back(data[i]);
}

}  // namespace

SplitSet make_splits(const std::vector<LabeledName>& data, const SplitOptions& options) {
  const auto& r = options.ratios;
  if (r.train < 0 || r.validation < 0 || r.test < 0 ||
      std::abs(r.train + r.validation + r.test - 1.0) > 1e-9) {
    throw Error(ErrorCode::InvalidRatios, "ratios must be non-negative and sum to 1");
  }
  if (data.empty()) throw Error(ErrorCode::InsufficientData, "no data to split");

  std::mt19937_64 rng(options.seed);
  SplitSet out;
  std::vector<std::size_t> pool;

  if (options.mode == ZeroShotMode::UnseenCultures) {
    if (options.holdout_cultures.empty()) {
      throw Error(ErrorCode::EmptyCultureHoldout, "no cultures to hold out");
    }
    std::set<std::string> present;
    for (const auto& item : data)
      if (item.label.is_culture()) present.insert(item.label.culture_name());
    std::set<std::string> held(options.holdout_cultures.begin(), options.holdout_cultures.end());
    for (const auto& c : held)
      if (!present.count(c)) throw Error(ErrorCode::UnknownCulture, c);
    if (held.size() >= present.size()) {
      throw Error(ErrorCode::InsufficientData, "holdout must leave at least one culture for training");
    }
    // A text that occurs under a held-out culture anywhere goes to zero-shot
    // as a whole group, so no held-out text leaks into training.
    std::vector<std::size_t> all(data.size());
    std::iota(all.begin(), all.end(), 0);
    for (const auto& group : group_by_text(data, all)) {
      bool held_out = std::any_of(group.begin(), group.end(), [&](std::size_t i) {
        return data[i].label.is_culture() && held.count(data[i].label.culture_name());
      });
      if (held_out) {
        for (std::size_t i : group) out.zero_shot.push_back(data[i]);
      } else {
        pool.insert(pool.end(), group.begin(), group.end());
      }
    }
  } else {
    if (options.zero_shot_fraction < 0 || options.zero_shot_fraction >= 1) {
      throw Error(ErrorCode::InvalidRatios, "zero-shot fraction must be in [0, 1)");
    }
    pool.resize(data.size());
    std::iota(pool.begin(), pool.end(), 0);
  }

  auto groups = group_by_text(data, pool);
  std::shuffle(groups.begin(), groups.end(), rng);

  std::size_t cursor = 0;
  if (options.mode == ZeroShotMode::UnseenNames) {
    auto n_zero = static_cast<std::size_t>(
        std::llround(options.zero_shot_fraction * static_cast<double>(groups.size())));
    append_groups(data, groups, 0, n_zero, out.zero_shot);
    cursor = n_zero;
  }
  const std::size_t remaining = groups.size() - cursor;
  auto n_train = static_cast<std::size_t>(std::llround(r.train * static_cast<double>(remaining)));
  auto n_val = static_cast<std::size_t>(std::llround(r.validation * static_cast<double>(remaining)));
  n_train = std::min(n_train, remaining);
  n_val = std::min(n_val, remaining - n_train);
  append_groups(data, groups, cursor, cursor + n_train, out.train);
  append_groups(data, groups, cursor + n_train, cursor + n_train + n_val, out.validation);
  append_groups(data, groups, cursor + n_train + n_val, groups.size(), out.test);

  if (out.train.empty() || out.validation.empty() || out.test.empty() || out.zero_shot.empty()) {
    throw Error(ErrorCode::InsufficientData,
                "a split would be empty (train " + std::to_string(out.train.size()) + ", validation " +
                    std::to_string(out.validation.size()) + ", test " + std::to_string(out.test.size()) +
                    ", zero-shot " + std::to_string(out.zero_shot.size()) + ")");
  }
  return out;
}

std::string_view to_string(LengthBucket bucket) {
  switch (bucket) {
    case LengthBucket::Short: return "Short";
    case LengthBucket::Medium: return "Medium";
    case LengthBucket::Long: return "Long";
  }
  return "";
}

std::string_view to_string(ComplexityBucket bucket) {
  switch (bucket) {
    case ComplexityBucket::Simple: return "Simple";
    case ComplexityBucket::Moderate: return "Moderate";
    case ComplexityBucket::High: return "High";
  }
  return "";
}

LengthBucket length_bucket(const Name& name) {
  if (name.length() <= 5) return LengthBucket::Short;
  if (name.length() <= 12) return LengthBucket::Medium;
  return LengthBucket::Long;
}

int complexity_score(const Name& name) {
  const auto& cs = name.chars();
  bool joiner = std::any_of(cs.begin(), cs.end(), [](char32_t c) { return c == U'-' || c == U'\''; });
  auto parts = 1 + std::count(cs.begin(), cs.end(), U' ');
  bool non_ascii = std::any_of(cs.begin(), cs.end(), [](char32_t c) {
    return c > 0x7F && u_isalpha(static_cast<UChar32>(c));
  });
  return int(joiner) + int(parts >= 2) + int(parts >= 3) + int(non_ascii);
}

ComplexityBucket complexity_bucket(const Name& name) {
  int score = complexity_score(name);
  if (score == 0) return ComplexityBucket::Simple;
  if (score == 1) return ComplexityBucket::Moderate;
  return ComplexityBucket::High;
}

}  // namespace namerec
