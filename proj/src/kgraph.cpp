#include "namerec/kgraph.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace namerec {

using nlohmann::json;

namespace {

bool is_terminator(char c) { return c == '.' || c == '!' || c == '?'; }

// Facts are stored without their closing period; rendering supplies it.
std::string strip_final_period(std::string text) {
  while (!text.empty() && (text.back() == ' ' || text.back() == '.')) text.pop_back();
  return text;
}

void check_single_sentence(const std::string& text) {
  if (text.empty()) throw Error(ErrorCode::ParseError, "empty fact");
  for (std::size_t i = 0; i + 1 < text.size(); ++i) {
    if (is_terminator(text[i]) && text[i + 1] == ' ' && text.find_first_not_of(' ', i + 1) != std::string::npos) {
      throw Error(ErrorCode::ParseError, "fact is not a single sentence: '" + text + "'");
    }
  }
}

}  // namespace

void KnowledgeGraph::add(Fact fact) {
  if (!categories_.contains(fact.culture)) throw Error(ErrorCode::UnknownCulture, fact.culture);
  fact.text = strip_final_period(std::move(fact.text));
  check_single_sentence(fact.text);
  facts_[fact.culture].push_back(std::move(fact));
}

void KnowledgeGraph::declare(const std::string& culture) {
  if (!categories_.contains(culture)) throw Error(ErrorCode::UnknownCulture, culture);
  facts_[culture];
}

const std::vector<Fact>& KnowledgeGraph::facts_for(const std::string& culture) const {
  static const std::vector<Fact> kNone;
  if (!categories_.contains(culture)) throw Error(ErrorCode::UnknownCulture, culture);
  auto it = facts_.find(culture);
  return it == facts_.end() ? kNone : it->second;
}

KnowledgeGraph parse_graph(const std::string& json_text, const CategorySet& categories) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::ParseError, "graph file must be a JSON object");
  KnowledgeGraph graph(categories);
  // nlohmann::json objects iterate in sorted key order; fact order within a
  // culture is preserved.
  for (const auto& [culture, facts] : j.items()) {
    if (!categories.contains(culture)) throw Error(ErrorCode::UnknownCulture, culture);
    if (!facts.is_array()) throw Error(ErrorCode::ParseError, "facts for '" + culture + "' must be an array");
    for (const auto& f : facts) {
      if (!f.is_string()) throw Error(ErrorCode::ParseError, "fact for '" + culture + "' must be a string");
      graph.add(Fact{culture, f.get<std::string>(), {}});
    }
    if (facts.empty()) graph.declare(culture);
  }
  return graph;
}

KnowledgeGraph load_graph(const std::filesystem::path& path, const CategorySet& categories) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open knowledge graph " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_graph(ss.str(), categories);
}

std::string dump_graph(const KnowledgeGraph& graph) {
  json j = json::object();
  for (const auto& [culture, facts] : graph.facts()) {
    json arr = json::array();
    for (const auto& f : facts) arr.push_back(f.text);
    j[culture] = std::move(arr);
  }
  return j.dump(2) + "\n";
}

void save_graph(const std::filesystem::path& path, const KnowledgeGraph& graph) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << dump_graph(graph);
}

ContextSnippet render_context(const KnowledgeGraph& graph, const std::string& culture, std::size_t max_facts) {
  const auto& facts = graph.facts_for(culture);
  if (facts.empty() || max_facts == 0) return {};
  std::string text(kContextPrefix);
  text += culture + " names ";
  for (std::size_t i = 0; i < facts.size() && i < max_facts; ++i) {
    if (i) text += "; ";
    text += facts[i].text;
  }
  text += '.';
  return {std::move(text)};
}

}  // namespace namerec
