#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "namerec/core.hpp"

namespace namerec {

/// One JSON object per line: {"name": ..., "label": ...}. Augmented records
/// additionally carry "origin": "augmented", "source" and "score".
std::vector<LabeledName> read_jsonl(const std::filesystem::path& path);

/// `scores`, when given, must be parallel to `items`; it is written as the
/// "score" field of augmented records.
void write_jsonl(const std::filesystem::path& path, const std::vector<LabeledName>& items,
                 const std::vector<double>* scores = nullptr);

/// Cultures in first-seen order.
CategorySet infer_categories(const std::vector<LabeledName>& items);

/// Throws UnknownLabel for any culture label outside `categories`.
void validate_labels(const std::vector<LabeledName>& items, const CategorySet& categories);

/// train.jsonl, validation.jsonl, test.jsonl, zero_shot.jsonl and manifest.json.
void write_splits(const std::filesystem::path& dir, const SplitSet& splits, const SplitOptions& options);
SplitSet read_splits(const std::filesystem::path& dir);

}  // namespace namerec
