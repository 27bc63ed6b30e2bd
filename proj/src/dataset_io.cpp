#include "namerec/dataset_io.hpp"

#include <fstream>
#include <set>

#include "json.hpp"

namespace namerec {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

Label label_from_text(const std::string& text) {
  if (text == kNotANameText) return Label::not_a_name();
  if (text.empty()) throw Error(ErrorCode::ParseError, "empty label");
  return Label::culture(text);
}

}  // namespace

std::vector<LabeledName> read_jsonl(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::vector<LabeledName> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      json j = json::parse(line);
      LabeledName item{normalize_name(j.at("name").get<std::string>()),
                       label_from_text(j.at("label").get<std::string>())};
      if (j.value("origin", "original") == "augmented") {
        item.origin = Augmented{j.at("source").get<std::string>()};
      }
      out.push_back(std::move(item));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::ParseError, path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

void write_jsonl(const fs::path& path, const std::vector<LabeledName>& items,
                 const std::vector<double>* scores) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto& item = items[i];
    json j = {{"name", item.name.text()}, {"label", item.label.display()}};
    if (const auto* aug = std::get_if<Augmented>(&item.origin)) {
      j["origin"] = "augmented";
      j["source"] = aug->source;
      if (scores) j["score"] = (*scores)[i];
    }
    out << j.dump() << '\n';
  }
}

CategorySet infer_categories(const std::vector<LabeledName>& items) {
  std::vector<std::string> names;
  std::set<std::string> seen;
  for (const auto& item : items) {
    if (item.label.is_culture() && seen.insert(item.label.culture_name()).second) {
      names.push_back(item.label.culture_name());
    }
  }
  return CategorySet(std::move(names));
}

void validate_labels(const std::vector<LabeledName>& items, const CategorySet& categories) {
  for (const auto& item : items) {
    if (item.label.is_culture() && !categories.contains(item.label.culture_name())) {
      throw Error(ErrorCode::UnknownLabel, item.label.culture_name() + " (name '" + item.name.text() + "')");
    }
  }
}

void write_splits(const fs::path& dir, const SplitSet& splits, const SplitOptions& options) {
  fs::create_directories(dir);
  write_jsonl(dir / "train.jsonl", splits.train);
  write_jsonl(dir / "validation.jsonl", splits.validation);
  write_jsonl(dir / "test.jsonl", splits.test);
  write_jsonl(dir / "zero_shot.jsonl", splits.zero_shot);
  json manifest = {{"seed", options.seed},
                   {"mode", std::string(to_string(options.mode))},
                   {"ratios", {options.ratios.train, options.ratios.validation, options.ratios.test}}};
  std::ofstream out(dir / "manifest.json");
  if (!out) throw Error(ErrorCode::Io, "cannot write " + (dir / "manifest.json").string());
  out << manifest.dump(2) << '\n';
}

SplitSet read_splits(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(ErrorCode::Io, "no split directory " + dir.string());
  SplitSet s;
  s.train = read_jsonl(dir / "train.jsonl");
  s.validation = read_jsonl(dir / "validation.jsonl");
  s.test = read_jsonl(dir / "test.jsonl");
  s.zero_shot = read_jsonl(dir / "zero_shot.jsonl");
  return s;
}

}  // namespace namerec
