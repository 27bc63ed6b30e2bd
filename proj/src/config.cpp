#include "namerec/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "namerec/digest.hpp"
#include "toml.hpp"

namespace namerec {

using nlohmann::json;

namespace {

json from_toml(const toml::node& node) {
  if (const auto* t = node.as_table()) {
    json j = json::object();
    for (const auto& [k, v] : *t) j[std::string(k.str())] = from_toml(v);
    return j;
  }
  if (const auto* a = node.as_array()) {
    json j = json::array();
    for (const auto& v : *a) j.push_back(from_toml(v));
    return j;
  }
  if (const auto* v = node.as_string()) return v->get();
  if (const auto* v = node.as_integer()) return v->get();
  if (const auto* v = node.as_floating_point()) return v->get();
  if (const auto* v = node.as_boolean()) return v->get();
  throw Error(ErrorCode::InvalidConfig, "unsupported TOML value (dates and times are not used)");
}

json parse_toml(const std::string& text) {
  try {
    return from_toml(toml::parse(text));
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << "TOML parse error at line " << e.source().begin.line << ": " << e.description();
    throw Error(ErrorCode::ParseError, msg.str());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Reads keys of one table and rejects any key it was not asked about.
class Table {
 public:
  Table(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw Error(ErrorCode::InvalidConfig, where_ + " must be a table");
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      const json& v = j_.at(key);
      if constexpr (std::is_floating_point_v<T>) {
        if (!v.is_number()) throw std::invalid_argument("expected a number");
      } else if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw std::invalid_argument("expected a boolean");
      } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) throw std::invalid_argument("expected an integer");
        if constexpr (std::is_unsigned_v<T>) {
          if (v.get<long long>() < 0) throw std::invalid_argument("expected a non-negative integer");
        }
      }
      out = v.get<T>();
    } catch (const std::exception& e) {
      throw Error(ErrorCode::InvalidConfig, where_ + "." + key + ": " + e.what());
    }
  }

  void get_path(const char* key, std::filesystem::path& out, const std::filesystem::path& base) {
    std::string s;
    get(key, s);
    if (j_.contains(key)) out = s.empty() ? std::filesystem::path{} : resolve(s, base);
  }

  std::optional<Table> sub(const char* key) {
    seen_.insert(key);
    if (!j_.contains(key)) return std::nullopt;
    return Table(j_.at(key), where_ + "." + key);
  }

  void finish() const {
    for (const auto& [k, _] : j_.items()) {
      if (!seen_.count(k)) throw Error(ErrorCode::InvalidConfig, "unknown key " + where_ + "." + k);
    }
  }

  static std::filesystem::path resolve(const std::string& s, const std::filesystem::path& base) {
    std::filesystem::path p(s);
    return p.is_relative() && !base.empty() ? base / p : p;
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

void read_augment(Table& t, AugmentConfig& a) {
  t.get("p_insert", a.p_insert);
  t.get("p_delete", a.p_delete);
  t.get("p_substitute", a.p_substitute);
  t.get("p_transpose", a.p_transpose);
  t.get("max_edits", a.max_edits);
  t.get("fusion_enabled", a.fusion_enabled);
  t.get("fusion_rate", a.fusion_rate);
  t.get("per_name_budget", a.per_name_budget);
  t.get("attempts_per_member", a.attempts_per_member);
  t.finish();
}

void read_train(Table& t, TrainConfig& c) {
  t.get("lambda", c.lambda);
  std::string schedule(to_string(c.lambda_schedule));
  t.get("lambda_schedule", schedule);
  c.lambda_schedule = parse_lambda_schedule(schedule);
  t.get("lambda_start", c.lambda_start);
  t.get("lambda_end", c.lambda_end);
  t.get("learning_rate", c.learning_rate);
  t.get("encoder_lr_scale", c.encoder_lr_scale);
  t.get("batch_size", c.batch_size);
  t.get("max_epochs", c.max_epochs);
  t.get("patience", c.patience);
  t.get("max_steps", c.max_steps);
  t.get("seed", c.seed);
  t.get("augment_enabled", c.augment_enabled);
  t.get("tau_percentile", c.tau_percentile);
  t.get("plausibility_order", c.plausibility_order);
  t.get("plausibility_smoothing", c.plausibility_smoothing);
  std::string policy = to_string(c.context_policy);
  t.get("context_policy", policy);
  auto generic = c.context_policy.generic_text;
  auto max_facts = c.context_policy.max_facts;
  t.get("generic_text", generic);
  t.get("max_facts", max_facts);
  c.context_policy = parse_context_policy(policy);
  std::string eval = to_string(c.eval_policy);
  t.get("eval_policy", eval);
  c.eval_policy = parse_context_policy(eval);
  for (auto* p : {&c.context_policy, &c.eval_policy}) {
    p->generic_text = generic;
    p->max_facts = max_facts;
  }
  if (auto a = t.sub("augment")) read_augment(*a, c.augment);
  t.finish();
}

}  // namespace

std::string to_string(const ContextPolicy& policy) {
  switch (policy.mode) {
    case ContextMode::GroundTruth: return "ground_truth";
    case ContextMode::Omit: return "omit";
    case ContextMode::Generic: return "generic";
    case ContextMode::Forced: return "forced:" + policy.forced_culture;
  }
  return "";
}

ContextPolicy parse_context_policy(std::string_view text) {
  constexpr std::string_view forced = "forced:";
  if (text.substr(0, forced.size()) == forced) {
    if (text.size() == forced.size()) throw Error(ErrorCode::InvalidConfig, "forced policy needs a culture");
    return ContextPolicy::forced(std::string(text.substr(forced.size())));
  }
  try {
    return ContextPolicy::with_mode(parse_context_mode(text));
  } catch (const Error&) {
    throw Error(ErrorCode::InvalidConfig, "unknown context policy '" + std::string(text) + "'");
  }
}

TrainConfig parse_train_config(const std::string& toml_text, TrainConfig defaults) {
  const json j = parse_toml(toml_text);
  Table t(j, "config");
  read_train(t, defaults);
  defaults.validate();
  return defaults;
}

TrainConfig load_train_config(const std::filesystem::path& path, TrainConfig defaults) {
  return parse_train_config(read_file(path), std::move(defaults));
}

RunConfig parse_run_config(const std::string& toml_text, const std::filesystem::path& base_dir) {
  const json j = parse_toml(toml_text);
  RunConfig c;
  Table root(j, "config");
  root.get("seed", c.seed);
  root.get("categories", c.categories);
  root.get("ngram_order", c.ngram_order);
  root.get("ablation", c.ablation);

  // Stage seeds derive from the global seed unless set explicitly.
  c.split.seed = c.seed;
  c.lora.seed = c.seed + 1;
  c.pretrain.seed = c.seed + 2;
  c.finetune.seed = c.seed + 3;

  if (auto t = root.sub("paths")) {
    t->get_path("out_dir", c.out_dir, base_dir);
    t->get_path("data", c.data, base_dir);
    t->get_path("graph", c.graph, base_dir);
    t->get_path("rules", c.rules, base_dir);
    t->get("report_json", c.report_json);
    t->get("report_text", c.report_text);
    t->finish();
  } else {
    c.out_dir = Table::resolve(c.out_dir.string(), base_dir);
  }
  if (auto t = root.sub("corpus")) {
    t->get("per_culture", c.corpus.per_culture);
    t->get("negatives", c.corpus.negatives);
    t->finish();
  }
  if (auto t = root.sub("split")) {
    std::vector<double> ratios{c.split.ratios.train, c.split.ratios.validation, c.split.ratios.test};
    t->get("ratios", ratios);
    if (ratios.size() != 3) throw Error(ErrorCode::InvalidConfig, "config.split.ratios needs three values");
    c.split.ratios = {ratios[0], ratios[1], ratios[2]};
    std::string mode(to_string(c.split.mode));
    t->get("mode", mode);
    c.split.mode = parse_zero_shot_mode(mode);
    t->get("zero_shot_fraction", c.split.zero_shot_fraction);
    t->get("holdout_cultures", c.split.holdout_cultures);
    t->get("seed", c.split.seed);
    t->finish();
  }
  if (auto t = root.sub("model")) {
    t->get("hidden", c.dims.hidden);
    t->get("embedding", c.dims.embedding);
    t->get("feature_width", c.dims.feature_width);
    t->finish();
    if (c.dims.hidden < 1 || c.dims.embedding < 1 || c.dims.feature_width < 1) {
      throw Error(ErrorCode::InvalidConfig, "model dimensions must be positive");
    }
  }
  if (auto t = root.sub("lora")) {
    std::vector<std::string> targets;
    for (MatrixId id : c.lora.targets) targets.emplace_back(to_string(id));
    t->get("targets", targets);
    try {
      c.lora.targets = parse_matrix_ids(targets);
    } catch (const Error& e) {
      throw Error(ErrorCode::InvalidConfig, e.what());
    }
    t->get("rank", c.lora.rank);
    t->get("init_scale", c.lora.init_scale);
    t->get("seed", c.lora.seed);
    t->finish();
    if (c.lora.rank < 1) throw Error(ErrorCode::InvalidConfig, "config.lora.rank must be at least 1");
  }
  if (auto t = root.sub("pretrain")) read_train(*t, c.pretrain);
  if (auto t = root.sub("finetune")) read_train(*t, c.finetune);
  root.finish();

  c.pretrain.validate();
  c.finetune.validate();
  if (c.graph.empty()) throw Error(ErrorCode::InvalidConfig, "config.paths.graph is required");
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  return parse_run_config(read_file(path), path.parent_path());
}

json to_json(const AugmentConfig& a) {
  return {{"p_insert", a.p_insert},
          {"p_delete", a.p_delete},
          {"p_substitute", a.p_substitute},
          {"p_transpose", a.p_transpose},
          {"max_edits", a.max_edits},
          {"fusion_enabled", a.fusion_enabled},
          {"fusion_rate", a.fusion_rate},
          {"per_name_budget", a.per_name_budget},
          {"attempts_per_member", a.attempts_per_member}};
}

json to_json(const TrainConfig& c) {
  return {{"lambda", c.lambda},
          {"lambda_schedule", to_string(c.lambda_schedule)},
          {"lambda_start", c.lambda_start},
          {"lambda_end", c.lambda_end},
          {"learning_rate", c.learning_rate},
          {"encoder_lr_scale", c.encoder_lr_scale},
          {"batch_size", c.batch_size},
          {"max_epochs", c.max_epochs},
          {"patience", c.patience},
          {"max_steps", c.max_steps},
          {"seed", c.seed},
          {"augment_enabled", c.augment_enabled},
          {"tau_percentile", c.tau_percentile},
          {"plausibility_order", c.plausibility_order},
          {"plausibility_smoothing", c.plausibility_smoothing},
          {"context_policy", to_string(c.context_policy)},
          {"eval_policy", to_string(c.eval_policy)},
          {"generic_text", c.context_policy.generic_text},
          {"max_facts", c.context_policy.max_facts},
          {"augment", to_json(c.augment)}};
}

json to_json(const RunConfig& c) {
  json targets = json::array();
  for (MatrixId id : c.lora.targets) targets.push_back(to_string(id));
  return {{"seed", c.seed},
          {"paths",
           {{"out_dir", c.out_dir.generic_string()},
            {"data", c.data.generic_string()},
            {"graph", c.graph.generic_string()},
            {"rules", c.rules.generic_string()},
            {"report_json", c.report_json},
            {"report_text", c.report_text}}},
          {"categories", c.categories},
          {"corpus", {{"per_culture", c.corpus.per_culture}, {"negatives", c.corpus.negatives}}},
          {"split",
           {{"ratios", {c.split.ratios.train, c.split.ratios.validation, c.split.ratios.test}},
            {"mode", to_string(c.split.mode)},
            {"zero_shot_fraction", c.split.zero_shot_fraction},
            {"holdout_cultures", c.split.holdout_cultures},
            {"seed", c.split.seed}}},
          {"model",
           {{"hidden", c.dims.hidden}, {"embedding", c.dims.embedding}, {"feature_width", c.dims.feature_width}}},
          {"lora", {{"targets", targets}, {"rank", c.lora.rank}, {"init_scale", c.lora.init_scale}, {"seed", c.lora.seed}}},
          {"pretrain", to_json(c.pretrain)},
          {"finetune", to_json(c.finetune)},
          {"ngram_order", c.ngram_order},
          {"ablation", c.ablation}};
}

std::string config_digest(const RunConfig& c) { return sha256_hex(to_json(c).dump()); }

}  // namespace namerec
