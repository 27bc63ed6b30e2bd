#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "namerec/core.hpp"

namespace namerec {

/// One naming-convention statement about a culture, phrased to follow
/// "<Culture> names ", e.g. "often feature hyphens".
struct Fact {
  std::string culture;
  std::string text;
  std::vector<std::string> tags;

  friend bool operator==(const Fact&, const Fact&) = default;
};

/// Per-culture fact store. Immutable once built.
class KnowledgeGraph {
 public:
  KnowledgeGraph() = default;
  explicit KnowledgeGraph(CategorySet categories) : categories_(std::move(categories)) {}

  /// Validates the culture and the single-sentence rule, then appends.
  void add(Fact fact);
  /// Registers a culture with no facts yet.
  void declare(const std::string& culture);

  const CategorySet& categories() const { return categories_; }
  const std::map<std::string, std::vector<Fact>>& facts() const { return facts_; }
  const std::vector<Fact>& facts_for(const std::string& culture) const;
  std::size_t culture_count() const { return facts_.size(); }

  friend bool operator==(const KnowledgeGraph& a, const KnowledgeGraph& b) { return a.facts_ == b.facts_; }

 private:
  CategorySet categories_;
  std::map<std::string, std::vector<Fact>> facts_;
};

/// Rendered context term; empty or "Cultural context: ... .".
struct ContextSnippet {
  std::string text;
  bool empty() const { return text.empty(); }
};

inline constexpr std::string_view kContextPrefix = "Cultural context: ";
inline constexpr std::size_t kDefaultMaxFacts = 2;

/// JSON object: culture -> array of fact strings. Throws ParseError or
/// UnknownCulture.
KnowledgeGraph load_graph(const std::filesystem::path& path, const CategorySet& categories);
KnowledgeGraph parse_graph(const std::string& json_text, const CategorySet& categories);

/// Canonical serialization: keys sorted, two-space indent, trailing newline.
std::string dump_graph(const KnowledgeGraph& graph);
void save_graph(const std::filesystem::path& path, const KnowledgeGraph& graph);

/// "Cultural context: <culture> names <fact1>; <fact2>." over the first
/// `max_facts` facts, or the empty snippet when the culture has none.
ContextSnippet render_context(const KnowledgeGraph& graph, const std::string& culture,
                              std::size_t max_facts = kDefaultMaxFacts);

}  // namespace namerec
