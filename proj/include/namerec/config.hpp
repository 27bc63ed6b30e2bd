#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "namerec/core.hpp"
#include "namerec/model.hpp"
#include "namerec/train.hpp"

namespace namerec {

/// Synthetic corpus request; used when no dataset path is configured.
struct CorpusConfig {
  std::size_t per_culture = 500;
  std::size_t negatives = 400;
};

/// Everything one pipeline run needs. Relative paths are resolved against the
/// directory of the config file.
struct RunConfig {
  std::uint64_t seed = 42;

  std::filesystem::path out_dir = "runs/default";
  /// Existing JSONL dataset; empty means generate the default synthetic world.
  std::filesystem::path data;
  std::filesystem::path graph;
  /// Rule file for the rule-based baseline; empty means the built-in rules.
  std::filesystem::path rules;
  /// Empty means the default synthetic world's cultures (or the dataset's).
  std::vector<std::string> categories;

  CorpusConfig corpus;
  SplitOptions split;
  ModelDims dims;
  LoraConfig lora;
  TrainConfig pretrain = pretrain_defaults();
  TrainConfig finetune;
  int ngram_order = 3;
  bool ablation = false;

  std::string report_json = "report.json";
  std::string report_text = "report.txt";
};

/// Throws InvalidConfig (bad values, unknown keys) or ParseError (bad TOML).
RunConfig parse_run_config(const std::string& toml_text, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

/// A standalone TrainConfig file: top-level keys mirror TrainConfig fields,
/// plus an optional [augment] table.
TrainConfig parse_train_config(const std::string& toml_text, TrainConfig defaults = {});
TrainConfig load_train_config(const std::filesystem::path& path, TrainConfig defaults = {});

nlohmann::json to_json(const TrainConfig& c);
nlohmann::json to_json(const AugmentConfig& c);
nlohmann::json to_json(const RunConfig& c);

/// SHA-256 of the canonical JSON serialization of `c`.
std::string config_digest(const RunConfig& c);

std::string to_string(const ContextPolicy& policy);
/// "ground_truth" (or "truth"), "omit", "generic", "forced:<culture>".
ContextPolicy parse_context_policy(std::string_view text);

}  // namespace namerec
