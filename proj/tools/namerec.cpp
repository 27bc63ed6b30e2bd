// namerec command-line entry point.
#include <algorithm>
#include <fstream>
#include <iostream>
#include <numeric>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "namerec/config.hpp"
#include "namerec/dataset_io.hpp"
#include "namerec/eval.hpp"
#include "namerec/pipeline.hpp"
#include "namerec/synth.hpp"

namespace fs = std::filesystem;
using namespace namerec;
using nlohmann::json;

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kDataError = 2;
constexpr int kRuntime = 3;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptyBatch:
    case ErrorCode::NoAdapters:
    case ErrorCode::EmptyMatrix:
      return kRuntime;
    default:
      return kDataError;
  }
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << text;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

void log_line(const std::string& msg) { std::cerr << msg << '\n'; }

// Last `fraction` of a seeded shuffle becomes validation.
std::pair<std::vector<LabeledName>, std::vector<LabeledName>> holdout(const std::vector<LabeledName>& data,
                                                                      double fraction, std::uint64_t seed) {
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_val = std::max<std::size_t>(1, static_cast<std::size_t>(fraction * static_cast<double>(data.size())));
  if (data.size() <= n_val) throw Error(ErrorCode::InsufficientData, "too few items to hold out validation");
  std::vector<LabeledName> train, val;
  for (std::size_t i = 0; i < order.size(); ++i) (i < order.size() - n_val ? train : val).push_back(data[order[i]]);
  return {train, val};
}

std::vector<Name> read_names(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::vector<Name> out;
  std::string line;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(normalize_name(json::parse(line).at("name").get<std::string>()));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::ParseError, fmt::format("{}:{}: {}", path.string(), no, e.what()));
    }
  }
  return out;
}

CategorySet categories_from(const std::string& list, const fs::path& data) {
  if (!list.empty()) return CategorySet(split_list(list));
  if (!data.empty()) return infer_categories(read_jsonl(data));
  return default_categories();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multicultural name recognition with a LoRA-adapted surrogate model"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  // gen
  auto* gen = app.add_subcommand("gen", "Generate the default synthetic corpus");
  std::string gen_out, gen_graph, gen_rules;
  std::size_t per_culture = 500, negatives = 400;
  std::uint64_t gen_seed = 42;
  gen->add_option("--out", gen_out, "Output JSONL")->required();
  gen->add_option("--per-culture", per_culture, "Names per culture")->capture_default_str();
  gen->add_option("--negatives", negatives, "Not-a-name records")->capture_default_str();
  gen->add_option("--seed", gen_seed)->capture_default_str();
  gen->add_option("--graph-out", gen_graph, "Also write the default knowledge graph");
  gen->add_option("--rules-out", gen_rules, "Also write the default rule set");

  // split
  auto* split = app.add_subcommand("split", "Split a dataset into train/validation/test/zero-shot");
  std::string split_data, split_out, split_ratios = "0.8,0.1,0.1", split_mode = "unseen_names", holdout_list;
  double zs_fraction = 0.1;
  std::uint64_t split_seed = 42;
  split->add_option("--data", split_data)->required();
  split->add_option("--out-dir", split_out)->required();
  split->add_option("--ratios", split_ratios, "train,validation,test")->capture_default_str();
  split->add_option("--mode", split_mode, "unseen_names or unseen_cultures")->capture_default_str();
  split->add_option("--zero-shot-fraction", zs_fraction)->capture_default_str();
  split->add_option("--holdout", holdout_list, "Comma-separated cultures (unseen_cultures mode)");
  split->add_option("--seed", split_seed)->capture_default_str();

  // augment
  auto* augment = app.add_subcommand("augment", "Write plausibility-filtered augmentations of a dataset");
  std::string aug_in, aug_out;
  double aug_tau_pct = 5.0;
  std::uint64_t aug_seed = 0;
  bool aug_fusion = false;
  int aug_budget = 3, aug_edits = 2;
  augment->add_option("--in", aug_in)->required();
  augment->add_option("--out", aug_out)->required();
  augment->add_option("--tau-percentile", aug_tau_pct)->capture_default_str();
  augment->add_option("--seed", aug_seed)->capture_default_str();
  augment->add_flag("--fusion", aug_fusion, "Enable cross-cultural fusion");
  augment->add_option("--budget", aug_budget, "Members per name")->capture_default_str();
  augment->add_option("--max-edits", aug_edits)->capture_default_str();

  // pretrain
  auto* pretrain = app.add_subcommand("pretrain", "Pretrain the surrogate base model");
  std::string pre_data, pre_config, pre_out, pre_val, pre_categories;
  ModelDims dims;
  pretrain->add_option("--data", pre_data)->required();
  pretrain->add_option("--config", pre_config, "TOML with TrainConfig keys");
  pretrain->add_option("--out", pre_out)->required();
  pretrain->add_option("--validation", pre_val, "Validation JSONL (default: hold out 10% of --data)");
  pretrain->add_option("--categories", pre_categories, "Comma-separated cultures (default: from data)");
  pretrain->add_option("--hidden", dims.hidden)->capture_default_str();
  pretrain->add_option("--embedding", dims.embedding)->capture_default_str();
  pretrain->add_option("--feature-width", dims.feature_width)->capture_default_str();

  // finetune
  auto* ft = app.add_subcommand("finetune", "LoRA fine-tuning on a split directory");
  std::string ft_base, ft_dir, ft_kg, ft_config, ft_out, ft_report, ft_targets = "W_enc,W_s,W_o";
  LoraConfig lora;
  ft->add_option("--base", ft_base)->required();
  ft->add_option("--data-dir", ft_dir)->required();
  ft->add_option("--kg", ft_kg)->required();
  ft->add_option("--config", ft_config, "TOML with TrainConfig keys");
  ft->add_option("--out", ft_out)->required();
  ft->add_option("--report", ft_report, "Training report JSON");
  ft->add_option("--targets", ft_targets, "Adapted matrices")->capture_default_str();
  ft->add_option("--rank", lora.rank)->capture_default_str();
  ft->add_option("--init-scale", lora.init_scale)->capture_default_str();
  ft->add_option("--lora-seed", lora.seed)->capture_default_str();

  // predict
  auto* pred = app.add_subcommand("predict", "Rank labels for names");
  std::string pred_model, pred_name, pred_in, pred_kg, pred_policy = "omit";
  std::size_t pred_top = 0;
  pred->add_option("--model", pred_model)->required();
  auto* name_opt = pred->add_option("--name", pred_name);
  auto* in_opt = pred->add_option("--in", pred_in, "JSONL with a \"name\" field per line");
  name_opt->excludes(in_opt);
  pred->add_option("--kg", pred_kg, "Graph for generic/forced policies");
  pred->add_option("--policy", pred_policy, "omit, generic or forced:<culture>")->capture_default_str();
  pred->add_option("--top", pred_top, "Show only the best N labels (0: all)");

  // eval
  auto* ev = app.add_subcommand("eval", "Evaluate a model and the baselines on a split directory");
  std::string ev_model, ev_dir, ev_kg, ev_out, ev_text, ev_rules, ev_policy = "omit", ev_base;
  int ev_order = 3;
  ev->add_option("--model", ev_model)->required();
  ev->add_option("--data-dir", ev_dir)->required();
  ev->add_option("--kg", ev_kg)->required();
  ev->add_option("--out", ev_out)->required();
  ev->add_option("--text", ev_text);
  ev->add_option("--rules", ev_rules, "Rule file (default: built-in rules)");
  ev->add_option("--base", ev_base, "Base model row (default: the model without adapters)");
  ev->add_option("--policy", ev_policy)->capture_default_str();
  ev->add_option("--ngram-order", ev_order)->capture_default_str();

  // ablate
  auto* ab = app.add_subcommand("ablate", "Train and score the four ablation variants");
  std::string ab_config, ab_out, ab_text, ab_base, ab_dir;
  ab->add_option("--config", ab_config, "Run config TOML")->required();
  ab->add_option("--out", ab_out, "Ablation JSON")->required();
  ab->add_option("--text", ab_text);
  ab->add_option("--base", ab_base, "Pretrained base (default: pretrain from the config)");
  ab->add_option("--data-dir", ab_dir, "Split directory (default: build from the config)");

  // kg validate
  auto* kg = app.add_subcommand("kg", "Knowledge-graph tools");
  kg->require_subcommand(1);
  auto* kg_validate = kg->add_subcommand("validate", "Check a graph file against a category set");
  std::string kg_file, kg_categories, kg_data;
  kg_validate->add_option("file", kg_file, "Graph JSON")->required();
  kg_validate->add_option("--categories", kg_categories, "Comma-separated cultures (default: built-in world)");
  kg_validate->add_option("--data", kg_data, "Take the categories from a dataset");

  // prompt
  auto* pr = app.add_subcommand("prompt", "Print the exact prompt for a name");
  std::string pr_name, pr_culture, pr_policy = "omit", pr_kg;
  pr->add_option("--name", pr_name)->required();
  pr->add_option("--culture", pr_culture, "Gold culture (needed for --policy truth)");
  pr->add_option("--policy", pr_policy, "omit, truth, generic or forced:<culture>")->capture_default_str();
  pr->add_option("--kg", pr_kg, "Graph JSON (default: built-in graph)");

  // run
  auto* run = app.add_subcommand("run", "Full pipeline from a run config");
  std::string run_config, run_out;
  bool run_ablation = false;
  run->add_option("--config", run_config)->required();
  run->add_option("--out", run_out, "Override paths.out_dir");
  run->add_flag("--ablation", run_ablation, "Also run the ablation grid");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*gen) {
      const auto corpus = gen_corpus(default_culture_specs(), per_culture, negatives, gen_seed);
      write_jsonl(gen_out, corpus);
      if (!gen_graph.empty()) save_graph(gen_graph, default_graph());
      if (!gen_rules.empty()) save_rules(gen_rules, default_rules());
      fmt::print("wrote {} records to {}\n", corpus.size(), gen_out);
    } else if (*split) {
      const auto data = read_jsonl(split_data);
      SplitOptions opt;
      const auto r = split_list(split_ratios);
      if (r.size() != 3) throw Error(ErrorCode::InvalidConfig, "--ratios needs three comma-separated values");
      try {
        opt.ratios = {std::stod(r[0]), std::stod(r[1]), std::stod(r[2])};
      } catch (const std::exception&) {
        throw Error(ErrorCode::InvalidConfig, "--ratios must be numbers");
      }
      opt.mode = parse_zero_shot_mode(split_mode);
      opt.zero_shot_fraction = zs_fraction;
      opt.holdout_cultures = split_list(holdout_list);
      opt.seed = split_seed;
      const auto s = make_splits(data, opt);
      write_splits(split_out, s, opt);
      fmt::print("train {} validation {} test {} zero_shot {}\n", s.train.size(), s.validation.size(), s.test.size(),
                 s.zero_shot.size());
    } else if (*augment) {
      const auto data = read_jsonl(aug_in);
      std::vector<Name> names;
      for (const auto& d : data) names.push_back(d.name);
      const auto model = train_plausibility(names);
      AugmentConfig cfg;
      cfg.tau = calibrate_tau(model, names, aug_tau_pct);
      cfg.fusion_enabled = aug_fusion;
      cfg.per_name_budget = aug_budget;
      cfg.max_edits = aug_edits;
      cfg.validate();
      std::vector<LabeledName> out;
      std::vector<double> scores;
      for (std::size_t i = 0; i < data.size(); ++i) {
        std::seed_seq seq{static_cast<std::uint32_t>(aug_seed), static_cast<std::uint32_t>(aug_seed >> 32),
                          static_cast<std::uint32_t>(i)};
        Rng rng(seq);
        const auto set = augment_set(data[i], cfg, model, data, rng);
        const auto labeled = set.as_labeled();
        for (std::size_t m = 0; m < labeled.size(); ++m) {
          out.push_back(labeled[m]);
          scores.push_back(set.members[m].score);
        }
      }
      write_jsonl(aug_out, out, &scores);
      fmt::print("tau {:.4f}; wrote {} augmented records to {}\n", cfg.tau, out.size(), aug_out);
    } else if (*pretrain) {
      const auto data = read_jsonl(pre_data);
      const TrainConfig cfg = pre_config.empty() ? pretrain_defaults() : load_train_config(pre_config, pretrain_defaults());
      std::vector<LabeledName> train, val;
      if (pre_val.empty()) {
        std::tie(train, val) = holdout(data, 0.1, cfg.seed);
      } else {
        train = data;
        val = read_jsonl(pre_val);
      }
      const CategorySet cats = pre_categories.empty() ? infer_categories(data) : CategorySet(split_list(pre_categories));
      dims.vocab = Tokenizer{}.size();
      const auto result = pretrain_base(train, val, cats, dims, cfg);
      SurrogateModel<double> model;
      model.base = result.parameters;
      model.categories = cats;
      model.frozen = true;
      save_model(pre_out, model);
      const auto& rep = result.report;
      fmt::print("best epoch {} validation loss {:.4f} accuracy {:.1f}%\n", rep.best_epoch,
                 rep.validation_loss[rep.best_epoch], rep.validation_accuracy[rep.best_epoch]);
    } else if (*ft) {
      auto base = load_model(ft_base);
      const auto splits = read_splits(ft_dir);
      const auto graph = load_graph(ft_kg, base.categories);
      const TrainConfig cfg = ft_config.empty() ? TrainConfig{} : load_train_config(ft_config);
      lora.targets = parse_matrix_ids(split_list(ft_targets));
      if (base.adapters.empty()) base = lora_attach(base, lora);
      auto [tuned, report] = finetune(base, splits, graph, cfg);
      save_model(ft_out, tuned);
      if (!ft_report.empty()) write_file(ft_report, to_json(report).dump(2) + "\n");
      fmt::print("best epoch {} validation loss {:.4f} (initial {:.4f}); {} trainable parameters\n",
                 report.best_epoch, report.validation_loss[report.best_epoch], report.validation_loss.front(),
                 report.trainable_parameters);
    } else if (*pred) {
      if (pred_name.empty() && pred_in.empty()) throw CLI::RequiredError("--name or --in");
      const auto model = load_model(pred_model);
      const KnowledgeGraph graph = pred_kg.empty() ? KnowledgeGraph(model.categories) : load_graph(pred_kg, model.categories);
      const auto policy = parse_context_policy(pred_policy);
      if (policy.mode == ContextMode::GroundTruth) {
        throw Error(ErrorCode::IllegalPolicy, "prediction cannot use ground-truth context");
      }
      const CompiledModel<double> compiled(model);
      std::vector<Name> names = pred_in.empty() ? std::vector<Name>{normalize_name(pred_name)} : read_names(pred_in);
      for (const auto& n : names) {
        auto ranking = predict(compiled, build_prompt(n, policy, std::nullopt, graph), model.categories);
        if (pred_top && ranking.size() > pred_top) ranking.resize(pred_top);
        fmt::print("{}\n", n.text());
        for (const auto& r : ranking) fmt::print("  {:<16} {:.6f}\n", r.label.display(), r.logprob);
      }
    } else if (*ev) {
      const auto tuned = load_model(ev_model);
      SurrogateModel<double> base = ev_base.empty() ? tuned : load_model(ev_base);
      if (ev_base.empty()) base.adapters.clear();
      const auto splits = read_splits(ev_dir);
      const auto graph = load_graph(ev_kg, tuned.categories);
      const RuleSet rules = ev_rules.empty() ? default_rules() : load_rules(ev_rules, tuned.categories);
      const auto policy = parse_context_policy(ev_policy);
      const auto report = evaluate_all(tuned, base, splits, graph, rules, ev_order, policy);
      write_file(ev_out, to_json(report).dump(2) + "\n");
      const auto text = to_text(report);
      if (!ev_text.empty()) write_file(ev_text, text);
      fmt::print("{}", text);
    } else if (*ab) {
      RunConfig cfg = load_run_config(ab_config);
      SplitSet splits;
      CategorySet cats;
      if (!ab_dir.empty()) {
        splits = read_splits(ab_dir);
      } else {
        const auto corpus = cfg.data.empty()
                                ? gen_corpus(default_culture_specs(), cfg.corpus.per_culture, cfg.corpus.negatives, cfg.seed)
                                : read_jsonl(cfg.data);
        splits = make_splits(corpus, cfg.split);
      }
      SurrogateModel<double> base;
      if (!ab_base.empty()) {
        base = load_model(ab_base);
        base.adapters.clear();
        cats = base.categories;
      } else {
        if (!cfg.categories.empty()) {
          cats = CategorySet(cfg.categories);
        } else if (cfg.data.empty() && ab_dir.empty()) {
          cats = default_categories();
        } else {
          cats = infer_categories(splits.train);
        }
        log_line("pretraining base");
        auto pre = pretrain_base(splits.train, splits.validation, cats, cfg.dims, cfg.pretrain);
        base.base = std::move(pre.parameters);
        base.categories = cats;
        base.frozen = true;
      }
      const auto graph = load_graph(cfg.graph, cats);
      log_line("training four variants");
      const auto report = ablation_run(splits, graph, base, cfg.lora, cfg.finetune);
      write_file(ab_out, to_json(report).dump(2) + "\n");
      const auto text = to_text(report);
      if (!ab_text.empty()) write_file(ab_text, text);
      fmt::print("{}", text);
    } else if (*kg) {
      const CategorySet cats = categories_from(kg_categories, kg_data);
      const auto graph = load_graph(kg_file, cats);
      std::size_t facts = 0;
      for (const auto& [c, list] : graph.facts()) facts += list.size();
      fmt::print("ok: {} cultures, {} facts\n", graph.culture_count(), facts);
    } else if (*pr) {
      const KnowledgeGraph graph = pr_kg.empty() ? default_graph() : load_graph(pr_kg, default_categories());
      auto policy = parse_context_policy(pr_policy);
      std::optional<Label> label;
      if (!pr_culture.empty()) label = graph.categories().parse_label(pr_culture);
      fmt::print("{}\n", build_prompt(normalize_name(pr_name), policy, label, graph).text);
    } else if (*run) {
      RunConfig cfg = load_run_config(run_config);
      if (!run_out.empty()) cfg.out_dir = run_out;
      if (run_ablation) cfg.ablation = true;
      const auto result = run_pipeline(cfg, log_line);
      fmt::print("{}", to_text(result.report));
      if (result.ablation) fmt::print("\n{}", to_text(*result.ablation));
    }
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const StageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  }
  return kOk;
}
