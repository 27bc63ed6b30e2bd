#include "namerec/pipeline.hpp"

#include <fstream>
#include <sstream>

#include "namerec/dataset_io.hpp"
#include "namerec/digest.hpp"
#include "namerec/synth.hpp"

namespace namerec {

using nlohmann::json;

namespace {

std::string file_digest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return sha256_hex(ss.str());
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << text;
}

class Manifest {
 public:
  Manifest(const RunConfig& config, std::filesystem::path path) : path_(std::move(path)) {
    j_["config_digest"] = config_digest(config);
    j_["config"] = to_json(config);
    j_["seeds"] = {{"global", config.seed},
                   {"split", config.split.seed},
                   {"pretrain", config.pretrain.seed},
                   {"lora", config.lora.seed},
                   {"finetune", config.finetune.seed}};
    j_["stages_completed"] = json::array();
    j_["artifacts"] = json::object();
    j_["complete"] = false;
    save();
  }

  void artifact(const std::string& name, const std::filesystem::path& file) { j_["artifacts"][name] = file_digest(file); }

  void done(const std::string& stage) {
    j_["stages_completed"].push_back(stage);
    save();
  }

  void fail(const std::string& stage, const std::string& message) {
    j_["failed_stage"] = stage;
    j_["error"] = message;
    save();
  }

  void finish() {
    j_["complete"] = true;
    save();
  }

 private:
  void save() const { write_text(path_, j_.dump(2) + "\n"); }

  std::filesystem::path path_;
  json j_;
};

}  // namespace

EvalReport evaluate_all(const SurrogateModel<double>& tuned, const SurrogateModel<double>& base,
                        const SplitSet& splits, const KnowledgeGraph& graph, const RuleSet& rules, int ngram_order,
                        const ContextPolicy& policy) {
  const auto& categories = tuned.categories;
  EvalReport r;
  r.methods.push_back(evaluate_method("Rule-based", rule_predictor(rules), splits, categories, graph, policy));
  r.methods.push_back(evaluate_method("Char n-gram", ngram_predictor(NgramClassifier::train(splits.train, ngram_order)),
                                      splits, categories, graph, policy));
  r.methods.push_back(evaluate_method("Base surrogate", surrogate_predictor(base), splits, categories, graph, policy));
  r.methods.push_back(evaluate_method("LoRA surrogate", surrogate_predictor(tuned), splits, categories, graph, policy));
  r.efficiency = efficiency_report(tuned);
  return r;
}

PipelineResult run_pipeline(const RunConfig& config, const std::function<void(const std::string&)>& log) {
  auto say = [&](const std::string& msg) {
    if (log) log(msg);
  };
  const auto& out = config.out_dir;
  try {
    std::filesystem::create_directories(out);
  } catch (const std::filesystem::filesystem_error& e) {
    throw StageError("setup", Error(ErrorCode::Io, e.what()));
  }
  Manifest manifest(config, out / "manifest.json");
  PipelineResult result;

  std::string stage;
  auto run = [&](const std::string& name, auto&& body) {
    stage = name;
    say("stage " + name);
    try {
      body();
    } catch (const Error& e) {
      manifest.fail(name, e.what());
      throw StageError(name, e);
    } catch (const std::exception& e) {
      manifest.fail(name, e.what());
      throw StageError(name, Error(ErrorCode::Io, e.what()));
    }
    manifest.done(name);
    result.stages.push_back(name);
  };

  std::vector<LabeledName> corpus;
  CategorySet categories;
  run("data", [&] {
    if (config.data.empty()) {
      corpus = gen_corpus(default_culture_specs(), config.corpus.per_culture, config.corpus.negatives, config.seed);
    } else {
      corpus = read_jsonl(config.data);
    }
    if (!config.categories.empty()) {
      categories = CategorySet(config.categories);
    } else if (config.data.empty()) {
      categories = default_categories();
    } else {
      categories = infer_categories(corpus);
    }
    validate_labels(corpus, categories);
    write_jsonl(out / "corpus.jsonl", corpus);
    manifest.artifact("corpus.jsonl", out / "corpus.jsonl");
  });

  KnowledgeGraph graph;
  run("kgraph", [&] { graph = load_graph(config.graph, categories); });

  RuleSet rules;
  run("rules", [&] { rules = config.rules.empty() ? default_rules() : load_rules(config.rules, categories); });

  SplitSet splits;
  run("split", [&] {
    splits = make_splits(corpus, config.split);
    write_splits(out / "splits", splits, config.split);
  });

  SurrogateModel<double> base;
  run("pretrain", [&] {
    auto pre = pretrain_base(splits.train, splits.validation, categories, config.dims, config.pretrain);
    base.base = std::move(pre.parameters);
    base.categories = categories;
    base.frozen = true;
    save_model(out / "base.model", base);
    manifest.artifact("base.model", out / "base.model");
    say("pretrain best epoch " + std::to_string(pre.report.best_epoch));
  });

  SurrogateModel<double> adapted;
  run("attach", [&] { adapted = lora_attach(base, config.lora); });

  SurrogateModel<double> tuned;
  TrainReport train_report;
  run("finetune", [&] {
    std::tie(tuned, train_report) = finetune(adapted, splits, graph, config.finetune);
    save_model(out / "tuned.model", tuned);
    manifest.artifact("tuned.model", out / "tuned.model");
    say("finetune best epoch " + std::to_string(train_report.best_epoch));
  });

  run("eval", [&] {
    result.report = evaluate_all(tuned, base, splits, graph, rules, config.ngram_order, config.finetune.eval_policy);
    result.report.training = train_report;
  });

  if (config.ablation) {
    run("ablation", [&] { result.ablation = ablation_run(splits, graph, base, config.lora, config.finetune); });
  }

  run("report", [&] {
    json j = to_json(result.report);
    j["config_digest"] = config_digest(config);
    if (result.ablation) j["ablation"] = to_json(*result.ablation)["ablation"];
    write_text(out / config.report_json, j.dump(2) + "\n");
    std::string text = to_text(result.report);
    if (result.ablation) text += "\n" + to_text(*result.ablation);
    write_text(out / config.report_text, text);
    manifest.artifact(config.report_json, out / config.report_json);
    manifest.artifact(config.report_text, out / config.report_text);
  });

  manifest.finish();
  return result;
}

}  // namespace namerec
