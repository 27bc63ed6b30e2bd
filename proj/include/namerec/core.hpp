#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "namerec/error.hpp"

namespace namerec {

/// A name in canonical form: NFC, trimmed, internal whitespace runs collapsed
/// to one space, case preserved. Only normalize_name() and
/// Name::from_normalized() produce values.
class Name {
 public:
  const std::string& text() const { return text_; }
  const std::u32string& chars() const { return chars_; }
  std::size_t length() const { return chars_.size(); }

  /// Wraps text that is already canonical; throws EmptyName or ParseError
  /// when `text` would change under normalize_name().
  static Name from_normalized(std::string_view text);

  friend bool operator==(const Name& a, const Name& b) { return a.text_ == b.text_; }
  friend auto operator<=>(const Name& a, const Name& b) { return a.text_ <=> b.text_; }

 private:
  friend Name normalize_name(std::string_view raw);
  Name(std::string text, std::u32string chars) : text_(std::move(text)), chars_(std::move(chars)) {}

  std::string text_;
  std::u32string chars_;
};

Name normalize_name(std::string_view raw);

/// Case-folded copy of `text`, used for disjointness checks and
/// case-insensitive matching only.
std::string casefold(std::string_view text);

std::u32string to_u32(std::string_view utf8);
std::string to_utf8(std::u32string_view chars);

inline constexpr std::string_view kNotANameText = "Not a Name";

/// Culture(display name) or NotAName.
class Label {
 public:
  Label() = default;  // NotAName
  static Label culture(std::string display) { return Label(std::move(display)); }
  static Label not_a_name() { return Label(); }

  bool is_culture() const { return culture_.has_value(); }
  bool is_not_a_name() const { return !culture_.has_value(); }
  /// Culture display name, or "Not a Name".
  std::string display() const { return culture_ ? *culture_ : std::string(kNotANameText); }
  const std::string& culture_name() const { return *culture_; }

  friend bool operator==(const Label&, const Label&) = default;
  friend auto operator<=>(const Label&, const Label&) = default;

 private:
  explicit Label(std::string display) : culture_(std::move(display)) {}
  std::optional<std::string> culture_;
};

/// Closed, ordered set of culture display names.
class CategorySet {
 public:
  CategorySet() = default;
  explicit CategorySet(std::vector<std::string> names);

  const std::vector<std::string>& names() const { return names_; }
  std::size_t size() const { return names_.size(); }
  bool empty() const { return names_.empty(); }
  bool contains(std::string_view culture) const;
  /// Index in names(), or size() for NotAName.
  std::size_t index_of(const Label& label) const;
  /// All culture labels followed by NotAName.
  std::vector<Label> labels_with_not_a_name() const;
  /// Label for "Not a Name" or a member display name; UnknownLabel otherwise.
  Label parse_label(std::string_view text) const;

 private:
  std::vector<std::string> names_;
};

struct Original {
  friend bool operator==(const Original&, const Original&) = default;
};
struct Augmented {
  std::string source;
  friend bool operator==(const Augmented&, const Augmented&) = default;
};
using Origin = std::variant<Original, Augmented>;

struct LabeledName {
  Name name;
  Label label;
  Origin origin = Original{};

  friend bool operator==(const LabeledName&, const LabeledName&) = default;
};

enum class ZeroShotMode { UnseenNames, UnseenCultures };

std::string_view to_string(ZeroShotMode mode);
ZeroShotMode parse_zero_shot_mode(std::string_view text);

struct SplitRatios {
  double train = 0.8;
  double validation = 0.1;
  double test = 0.1;
};

struct SplitOptions {
  SplitRatios ratios;
  ZeroShotMode mode = ZeroShotMode::UnseenNames;
  /// UnseenNames: fraction of distinct names moved to the zero-shot set.
  double zero_shot_fraction = 0.1;
  /// UnseenCultures: cultures held out entirely.
  std::vector<std::string> holdout_cultures;
  std::uint64_t seed = 0;
};

struct SplitSet {
  std::vector<LabeledName> train;
  std::vector<LabeledName> validation;
  std::vector<LabeledName> test;
  std::vector<LabeledName> zero_shot;
};

/// Deterministic partition of `data`. Items sharing a case-folded text always
/// land in the same split; zero-shot items are chosen before the ratio split.
SplitSet make_splits(const std::vector<LabeledName>& data, const SplitOptions& options);

enum class LengthBucket { Short, Medium, Long };
enum class ComplexityBucket { Simple, Moderate, High };

std::string_view to_string(LengthBucket bucket);
std::string_view to_string(ComplexityBucket bucket);

LengthBucket length_bucket(const Name& name);
int complexity_score(const Name& name);
ComplexityBucket complexity_bucket(const Name& name);

}  // namespace namerec
