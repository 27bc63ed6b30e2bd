#include "namerec/synth.hpp"

#include <set>

#include "namerec/plausibility.hpp"

namespace namerec {

namespace {

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

template <typename T>
const T& pick(const std::vector<T>& items, Rng& rng) {
  std::uniform_int_distribution<std::size_t> d(0, items.size() - 1);
  return items[d(rng)];
}

bool coin(double p, Rng& rng) { return std::bernoulli_distribution(p)(rng); }

std::string capitalize(std::string word) {
  if (!word.empty() && word[0] >= 'a' && word[0] <= 'z') word[0] = static_cast<char>(word[0] - 'a' + 'A');
  return word;
}

std::string sample_word(const CultureSpec& spec, Rng& rng) {
  std::string word;
  if (!spec.prefixes.empty() && coin(spec.prefix_prob, rng)) word += pick(spec.prefixes, rng);
  std::uniform_int_distribution<int> count(spec.min_syllables, spec.max_syllables);
  for (int i = count(rng); i > 0; --i) word += pick(spec.syllables, rng);
  if (!spec.suffixes.empty() && coin(spec.suffix_prob, rng)) word += pick(spec.suffixes, rng);
  return word;
}

// Lowercase ASCII letters after the first position may take a diacritic.
std::string decorate(const std::string& word, const CultureSpec& spec, Rng& rng) {
  if (spec.diacritics.empty() || spec.diacritic_prob == 0.0) return word;
  std::string out;
  for (std::size_t i = 0; i < word.size(); ++i) {
    auto it = spec.diacritics.find(std::string(1, word[i]));
    if (i > 0 && it != spec.diacritics.end() && coin(spec.diacritic_prob, rng)) {
      out += it->second;
    } else {
      out += word[i];
    }
  }
  return out;
}

std::string sample_part(const CultureSpec& spec, Rng& rng) {
  std::string part = capitalize(sample_word(spec, rng));
  if (coin(spec.hyphen_prob, rng)) part += "-" + capitalize(sample_word(spec, rng));
  if (coin(spec.apostrophe_prob, rng)) part = pick(spec.apostrophe_heads, rng) + "'" + part;
  return decorate(part, spec, rng);
}

}  // namespace

void CultureSpec::validate() const {
  if (culture.empty()) throw Error(ErrorCode::InvalidConfig, "culture spec without a culture");
  if (syllables.empty()) throw Error(ErrorCode::InvalidConfig, culture + ": empty syllable inventory");
  if (min_syllables < 1 || max_syllables < min_syllables) {
    throw Error(ErrorCode::InvalidConfig, culture + ": syllable counts must satisfy 1 <= min <= max");
  }
  for (double p : {prefix_prob, suffix_prob, hyphen_prob, apostrophe_prob, multipart_prob, diacritic_prob}) {
    if (!is_probability(p)) throw Error(ErrorCode::InvalidConfig, culture + ": probability outside [0, 1]");
  }
  if (apostrophe_prob > 0 && apostrophe_heads.empty()) {
    throw Error(ErrorCode::InvalidConfig, culture + ": apostrophe quirk without heads");
  }
  for (const auto& [from, to] : diacritics) {
    if (from.size() != 1) throw Error(ErrorCode::InvalidConfig, culture + ": diacritic keys are single characters");
  }
}

Name sample_name(const CultureSpec& spec, Rng& rng) {
  std::string text = sample_part(spec, rng);
  if (coin(spec.multipart_prob, rng)) {
    if (!spec.particles.empty() && coin(0.5, rng)) text += " " + pick(spec.particles, rng);
    text += " " + sample_part(spec, rng);
  }
  return normalize_name(text);
}

std::vector<LabeledName> gen_corpus(const std::vector<CultureSpec>& specs, std::size_t per_culture,
                                    std::size_t not_a_name_count, std::uint64_t seed) {
  if (specs.empty()) throw Error(ErrorCode::InvalidConfig, "no culture specs");
  for (const auto& s : specs) s.validate();

  Rng rng(seed);
  std::set<std::string> seen;
  std::vector<LabeledName> out;
  const std::size_t budget = 200 * std::max<std::size_t>(per_culture, 1);

  std::vector<std::vector<Name>> by_culture(specs.size());
  for (std::size_t c = 0; c < specs.size(); ++c) {
    std::size_t attempts = 0;
    while (by_culture[c].size() < per_culture) {
      if (++attempts > budget) {
        throw Error(ErrorCode::SpecExhausted, specs[c].culture + ": could not reach " + std::to_string(per_culture) +
                                                  " unique names");
      }
      Name n = sample_name(specs[c], rng);
      if (!seen.insert(casefold(n.text())).second) continue;
      out.push_back({n, Label::culture(specs[c].culture), Original{}});
      by_culture[c].push_back(std::move(n));
    }
  }

  if (not_a_name_count == 0) return out;

  struct Floor {
    PlausibilityModel model;
    double floor;
  };
  std::vector<Floor> floors;
  for (const auto& names : by_culture) {
    if (names.empty()) continue;
    auto model = train_plausibility(names);
    const double floor = calibrate_tau(model, names, kNegativeFloorPercentile);
    floors.push_back({std::move(model), floor});
  }

  const std::string letters = "abcdefghijklmnopqrstuvwxyz";
  std::uniform_int_distribution<int> length(4, 12);
  std::uniform_int_distribution<std::size_t> letter(0, letters.size() - 1);
  const std::size_t neg_budget = 200 * not_a_name_count;
  std::size_t attempts = 0;
  std::size_t made = 0;
  while (made < not_a_name_count) {
    if (++attempts > neg_budget) throw Error(ErrorCode::SpecExhausted, "could not generate enough negatives");
    std::string s;
    for (int i = length(rng); i > 0; --i) s += letters[letter(rng)];
    Name n = normalize_name(capitalize(s));
    bool foreign = true;
    for (const auto& f : floors) {
      if (plausibility_score(f.model, n) >= f.floor) {
        foreign = false;
        break;
      }
    }
    if (!foreign || !seen.insert(casefold(n.text())).second) continue;
    out.push_back({std::move(n), Label::not_a_name(), Original{}});
    ++made;
  }
  return out;
}

std::vector<CultureSpec> default_culture_specs() {
  std::vector<CultureSpec> specs;

  CultureSpec fr;
  fr.culture = "French";
  fr.syllables = {"ma", "rie", "lou", "clau", "de", "ber", "nard", "mi", "chel", "ge", "ro", "an",
                  "toi", "lu", "cien", "beau", "jean", "pier", "gui", "lau", "va", "le", "ri", "ne"};
  fr.prefixes = {"jean", "de", "beau", "mont"};
  fr.suffixes = {"ette", "eau", "ine", "ier", "ard", "ot", "aux", "ois", "elle"};
  fr.min_syllables = 1;
  fr.max_syllables = 3;
  fr.prefix_prob = 0.25;
  fr.suffix_prob = 0.6;
  fr.hyphen_prob = 0.3;
  fr.multipart_prob = 0.15;
  fr.particles = {"de", "du"};
  fr.diacritic_prob = 0.12;
  fr.diacritics = {{"e", "é"}, {"c", "ç"}};
  specs.push_back(fr);

  CultureSpec it;
  it.culture = "Italian";
  it.syllables = {"gio", "van", "ni", "ma", "ri", "a", "lu", "ca", "fran", "ces", "co", "an",
                  "to", "nel", "la", "ric", "car", "do", "pao", "lo", "ste", "fa", "bel", "si"};
  it.prefixes = {"di", "de", "gian"};
  it.suffixes = {"ini", "etti", "ello", "ella", "ino", "one", "ucci", "o", "a", "i"};
  it.min_syllables = 1;
  it.max_syllables = 3;
  it.prefix_prob = 0.15;
  it.suffix_prob = 0.75;
  it.apostrophe_prob = 0.1;
  it.apostrophe_heads = {"D", "Dell"};
  it.multipart_prob = 0.15;
  it.particles = {"di", "de"};
  it.diacritic_prob = 0.04;
  it.diacritics = {{"o", "ò"}, {"a", "à"}};
  specs.push_back(it);

  CultureSpec es;
  es.culture = "Spanish";
  es.syllables = {"jo", "se", "ma", "ri", "a", "car", "los", "lu", "is", "fer", "nan", "do",
                  "gon", "za", "ro", "dri", "gue", "mi", "guel", "pa", "blo", "ra", "mon", "te"};
  es.prefixes = {"san", "del"};
  es.suffixes = {"ez", "ado", "ito", "ita", "ero", "iz", "oza", "ón"};
  es.min_syllables = 1;
  es.max_syllables = 3;
  es.prefix_prob = 0.1;
  es.suffix_prob = 0.65;
  es.hyphen_prob = 0.08;
  es.multipart_prob = 0.35;
  es.particles = {"de", "de la", "del", "y"};
  es.diacritic_prob = 0.1;
  es.diacritics = {{"a", "á"}, {"e", "é"}, {"i", "í"}, {"o", "ó"}, {"n", "ñ"}};
  specs.push_back(es);

  CultureSpec de;
  de.culture = "German";
  de.syllables = {"hein", "rich", "wolf", "gang", "fried", "hel", "mut", "die", "ter", "gun", "ther", "kla",
                  "us", "jur", "gen", "ber", "hard", "lud", "wig", "ste", "fan", "wer", "ner", "an"};
  de.prefixes = {"von", "alt", "gross"};
  de.suffixes = {"mann", "berg", "stein", "er", "hardt", "bach", "schmidt", "feld", "hof"};
  de.min_syllables = 1;
  de.max_syllables = 2;
  de.prefix_prob = 0.1;
  de.suffix_prob = 0.7;
  de.hyphen_prob = 0.05;
  de.multipart_prob = 0.12;
  de.particles = {"von", "zu"};
  de.diacritic_prob = 0.15;
  de.diacritics = {{"u", "ü"}, {"o", "ö"}, {"a", "ä"}};
  specs.push_back(de);

  CultureSpec ja;
  ja.culture = "Japanese";
  ja.syllables = {"ha", "ru", "ki", "yu", "to", "mo", "ka", "ta", "na", "hi", "ro", "shi",
                  "ma", "sa", "ko", "mi", "ya", "su", "ke", "da", "no", "ri", "tsu", "chi"};
  ja.prefixes = {"ta", "ya", "su"};
  ja.suffixes = {"ko", "ro", "ki", "shi", "ta", "moto", "mura", "yama", "da", "kawa"};
  ja.min_syllables = 1;
  ja.max_syllables = 3;
  ja.prefix_prob = 0.1;
  ja.suffix_prob = 0.6;
  ja.multipart_prob = 0.25;
  ja.diacritic_prob = 0.03;
  ja.diacritics = {{"o", "ō"}, {"u", "ū"}};
  specs.push_back(ja);

  CultureSpec zh;
  zh.culture = "Chinese";
  zh.syllables = {"zhang", "wei", "li", "na", "wang", "fang", "chen", "jing", "liu", "yang", "xiao", "ming",
                  "hua", "zhou", "xin", "yu", "hong", "jun", "lin", "qing", "zhi", "hao", "mei", "xu"};
  zh.suffixes = {"ming", "hua", "jie", "ying"};
  zh.min_syllables = 1;
  zh.max_syllables = 2;
  zh.suffix_prob = 0.15;
  zh.hyphen_prob = 0.05;
  zh.multipart_prob = 0.55;
  specs.push_back(zh);

  CultureSpec sa;
  sa.culture = "South Asian";
  sa.syllables = {"ra", "jesh", "pri", "ya", "ku", "mar", "an", "dev", "kri", "shna", "mur", "thy",
                  "la", "ksh", "mi", "su", "ni", "ta", "vi", "jay", "ar", "jun", "sha", "pa"};
  sa.prefixes = {"sri", "bha", "ch"};
  sa.suffixes = {"esh", "an", "ini", "ya", "appa", "ika", "endra", "murthy", "nath"};
  sa.min_syllables = 2;
  sa.max_syllables = 3;
  sa.prefix_prob = 0.15;
  sa.suffix_prob = 0.6;
  sa.multipart_prob = 0.3;
  specs.push_back(sa);

  CultureSpec wa;
  wa.culture = "West African";
  wa.syllables = {"a", "de", "ku", "mi", "o", "lu", "wa", "chi", "nne", "ka", "ba", "ye",
                  "ji", "fo", "la", "ke", "nko", "mba", "ngo", "si", "tu", "e", "ze", "gbe"};
  wa.prefixes = {"olu", "chi", "ade", "nke", "kwa"};
  wa.suffixes = {"wale", "ola", "emi", "nna", "kwu", "dou", "sola", "ike", "mi"};
  wa.min_syllables = 1;
  wa.max_syllables = 3;
  wa.prefix_prob = 0.35;
  wa.suffix_prob = 0.55;
  wa.hyphen_prob = 0.03;
  wa.multipart_prob = 0.2;
  specs.push_back(wa);

  return specs;
}

CategorySet default_categories() {
  std::vector<std::string> names;
  for (const auto& s : default_culture_specs()) names.push_back(s.culture);
  return CategorySet(std::move(names));
}

KnowledgeGraph default_graph() {
  KnowledgeGraph g(default_categories());
  auto add = [&](const std::string& culture, std::vector<std::string> facts) {
    for (auto& f : facts) g.add({culture, std::move(f), {}});
  };
  add("French", {"often feature hyphens and silent final consonants",
                 "frequently end in -ette, -eau or -ier"});
  add("Italian", {"usually end in a vowel", "often carry diminutive endings like -ini and -etti"});
  add("Spanish", {"often join two surnames with particles like de la", "commonly end in -ez"});
  add("German", {"often end in -mann, -berg or -stein", "may contain umlauts"});
  add("Japanese", {"are built from open consonant-vowel syllables", "often end in -ko, -moto or -yama"});
  add("Chinese", {"are short with one or two syllables per part", "place the family name first"});
  add("South Asian", {"are often long and rich in aspirated consonants", "commonly end in -esh or -murthy"});
  add("West African", {"often begin with prefixes such as Olu-, Chi- or Ade-",
                       "frequently use nasal clusters like mb and ng"});
  return g;
}

RuleSet default_rules() {
  RuleSet r;
  auto rule = [&](PatternKind kind, std::string pattern, const std::string& culture) {
    r.rules.push_back({kind, std::move(pattern), Label::culture(culture)});
  };
  rule(PatternKind::Substring, "zh", "Chinese");
  rule(PatternKind::Substring, "xiao", "Chinese");
  rule(PatternKind::Suffix, "mann", "German");
  rule(PatternKind::Suffix, "berg", "German");
  rule(PatternKind::Suffix, "stein", "German");
  rule(PatternKind::Suffix, "murthy", "South Asian");
  rule(PatternKind::Suffix, "esh", "South Asian");
  rule(PatternKind::Suffix, "moto", "Japanese");
  rule(PatternKind::Suffix, "yama", "Japanese");
  rule(PatternKind::Suffix, "ini", "Italian");
  rule(PatternKind::Suffix, "etti", "Italian");
  rule(PatternKind::Suffix, "ucci", "Italian");
  rule(PatternKind::Suffix, "ez", "Spanish");
  rule(PatternKind::Suffix, "ette", "French");
  rule(PatternKind::Suffix, "eau", "French");
  rule(PatternKind::Prefix, "olu", "West African");
  rule(PatternKind::Prefix, "chi", "West African");
  rule(PatternKind::Suffix, "wale", "West African");
  return r;
}

}  // namespace namerec
