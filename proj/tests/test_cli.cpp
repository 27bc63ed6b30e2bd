#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "namerec/baselines.hpp"
#include "namerec/config.hpp"
#include "namerec/dataset_io.hpp"
#include "namerec/pipeline.hpp"
#include "namerec/synth.hpp"

using namespace namerec;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = -1;
  std::string output;
};

// Runs the CLI with stderr folded into the captured output.
Outcome cli(const std::string& args) {
  const std::string cmd = std::string(NAMEREC_CLI) + " " + args + " 2>&1";
  Outcome o;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return o;
  char buf[4096];
  while (std::size_t n = fread(buf, 1, sizeof buf, pipe)) o.output.append(buf, n);
  const int status = pclose(pipe);
  o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return o;
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("namerec_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string small_config(const fs::path& out, const std::string& graph) {
  return "seed = 7\n"
         "[paths]\nout_dir = \"" + out.string() + "\"\ngraph = \"" + graph + "\"\n"
         "[corpus]\nper_culture = 40\nnegatives = 40\n"
         "[model]\nhidden = 16\nembedding = 8\nfeature_width = 256\n"
         "[pretrain]\nmax_epochs = 3\n"
         "[finetune]\nmax_epochs = 1\n";
}

const std::string kGraph = std::string(NAMEREC_CONFIG_DIR) + "/kgraph.json";

}  // namespace

TEST(GenCorpus, CountsAndDeterminism) {
  auto a = gen_corpus(default_culture_specs(), 500, 400, 42);
  EXPECT_EQ(a.size(), 4400u);
  std::set<std::string> seen;
  std::map<std::string, int> per;
  for (const auto& it : a) {
    EXPECT_TRUE(seen.insert(casefold(it.name.text())).second) << it.name.text();
    ++per[it.label.display()];
  }
  EXPECT_EQ(per.size(), 9u);
  EXPECT_EQ(per["Not a Name"], 400);
  const auto cats = default_categories();
  for (const auto& c : cats.names()) EXPECT_EQ(per[c], 500) << c;
  EXPECT_EQ(gen_corpus(default_culture_specs(), 500, 400, 42), a);
  EXPECT_NE(gen_corpus(default_culture_specs(), 50, 10, 43), gen_corpus(default_culture_specs(), 50, 10, 42));
}

TEST(GenCorpus, NegativesLookImplausible) {
  auto corpus = gen_corpus(default_culture_specs(), 200, 200, 3);
  auto ngram = NgramClassifier::train(corpus);
  int rejected = 0, negatives = 0;
  for (const auto& it : corpus) {
    if (!it.label.is_not_a_name()) continue;
    ++negatives;
    if (ngram.classify(it.name).is_not_a_name()) ++rejected;
  }
  EXPECT_GE(rejected, negatives * 95 / 100);
}

TEST(GenCorpus, SpecValidation) {
  auto specs = default_culture_specs();
  specs[0].syllables.clear();
  EXPECT_THROW(gen_corpus(specs, 10, 0, 1), Error);
  auto tiny = default_culture_specs();
  tiny.resize(1);
  tiny[0].syllables = {"a"};
  tiny[0].prefixes.clear();
  tiny[0].suffixes.clear();
  tiny[0].min_syllables = tiny[0].max_syllables = 1;
  tiny[0].prefix_prob = tiny[0].suffix_prob = tiny[0].hyphen_prob = tiny[0].apostrophe_prob = 0;
  tiny[0].multipart_prob = tiny[0].diacritic_prob = 0;
  try {
    gen_corpus(tiny, 5, 0, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SpecExhausted);
  }
}

TEST(Config, ParsesAndResolvesPaths) {
  auto c = parse_run_config(
      "seed = 5\n[paths]\ngraph = \"g.json\"\nout_dir = \"out\"\n[split]\nmode = \"unseen_cultures\"\n"
      "holdout_cultures = [\"French\"]\n[lora]\ntargets = [\"W_s\"]\nrank = 2\n[finetune]\ncontext_policy = \"omit\"\n",
      "/cfg");
  EXPECT_EQ(c.seed, 5u);
  EXPECT_EQ(c.graph, fs::path("/cfg/g.json"));
  EXPECT_EQ(c.out_dir, fs::path("/cfg/out"));
  EXPECT_EQ(c.split.mode, ZeroShotMode::UnseenCultures);
  EXPECT_EQ(c.lora.targets, std::vector<MatrixId>{MatrixId::Recurrent});
  EXPECT_EQ(c.lora.rank, 2);
  EXPECT_EQ(c.finetune.context_policy.mode, ContextMode::Omit);
  EXPECT_EQ(c.split.seed, 5u);
  EXPECT_NE(c.pretrain.seed, c.finetune.seed);
}

TEST(Config, RejectsBadInput) {
  auto code_of = [](const std::string& text) {
    try {
      parse_run_config(text, "/cfg");
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::Io;
  };
  EXPECT_EQ(code_of("[paths]\ngraph = \"g.json\"\ntypo = 1\n"), ErrorCode::InvalidConfig);
  EXPECT_EQ(code_of("[paths]\ngraph = \"g.json\"\n[finetune]\nlearning_rate = -1\n"), ErrorCode::InvalidConfig);
  EXPECT_EQ(code_of("[paths]\ngraph = \"g.json\"\n[finetune]\nbatch_size = \"x\"\n"), ErrorCode::InvalidConfig);
  EXPECT_EQ(code_of("seed = 1\n"), ErrorCode::InvalidConfig);
  EXPECT_EQ(code_of("[paths\n"), ErrorCode::ParseError);
}

TEST(Config, DigestTracksContent) {
  auto a = parse_run_config("[paths]\ngraph = \"g.json\"\n", "/cfg");
  auto b = parse_run_config("[paths]\ngraph = \"g.json\"\n", "/cfg");
  auto c = parse_run_config("seed = 1\n[paths]\ngraph = \"g.json\"\n", "/cfg");
  EXPECT_EQ(config_digest(a), config_digest(b));
  EXPECT_NE(config_digest(a), config_digest(c));
  EXPECT_EQ(config_digest(a).size(), 64u);
}

TEST(Config, PolicyNames) {
  for (const auto& p : {ContextPolicy::ground_truth(), ContextPolicy::omit(), ContextPolicy::generic(),
                        ContextPolicy::forced("French")}) {
    EXPECT_EQ(parse_context_policy(to_string(p)), p);
  }
  EXPECT_THROW(parse_context_policy("forced:"), Error);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(cli("").code, 1);
  EXPECT_EQ(cli("frobnicate").code, 1);
  EXPECT_EQ(cli("gen").code, 1);
  EXPECT_EQ(cli("gen --out x.jsonl -o y").code, 1);
  EXPECT_EQ(cli("--help").code, 0);
}

TEST(Cli, KgValidate) {
  auto dir = scratch("kg");
  write(dir / "ok.json", R"({"French": ["often feature hyphens"]})");
  write(dir / "bad.json", R"({"Atlantis": ["is sunk"]})");
  write(dir / "broken.json", "{");
  EXPECT_EQ(cli("kg validate " + (dir / "ok.json").string()).code, 0);
  auto bad = cli("kg validate " + (dir / "bad.json").string());
  EXPECT_EQ(bad.code, 2);
  EXPECT_NE(bad.output.find("Atlantis"), std::string::npos);
  EXPECT_EQ(cli("kg validate " + (dir / "broken.json").string()).code, 2);
  EXPECT_EQ(cli("kg validate " + (dir / "missing.json").string()).code, 2);
  EXPECT_EQ(cli("kg validate " + kGraph).code, 0);
}

TEST(Cli, PromptMatchesLibrary) {
  auto dir = scratch("prompt");
  write(dir / "g.json", R"({"French": ["often feature hyphens and silent final consonants"]})");
  auto o = cli("prompt --name Jean-Pierre --culture French --policy truth --kg " + (dir / "g.json").string());
  EXPECT_EQ(o.code, 0);
  EXPECT_EQ(o.output,
            "Identify the cultural origin of the following name: Cultural context: French names often feature "
            "hyphens and silent final consonants. Jean-Pierre. If it's a recognized name, output its specific "
            "cultural category; otherwise, state 'Not a Name'.\n");
  EXPECT_EQ(cli("prompt --name Ana --policy truth").code, 2);
}

TEST(Cli, GenSplitAugment) {
  auto dir = scratch("gen");
  EXPECT_EQ(cli("gen --per-culture 20 --negatives 10 --seed 3 --out " + (dir / "c.jsonl").string()).code, 0);
  EXPECT_EQ(read_jsonl(dir / "c.jsonl").size(), 170u);
  EXPECT_EQ(cli("split --seed 1 --data " + (dir / "c.jsonl").string() + " --out-dir " + (dir / "s").string()).code,
            0);
  auto splits = read_splits(dir / "s");
  EXPECT_EQ(splits.train.size() + splits.validation.size() + splits.test.size() + splits.zero_shot.size(), 170u);
  EXPECT_EQ(cli("split --ratios 0.5,0.1,0.1 --data " + (dir / "c.jsonl").string() + " --out-dir " +
                (dir / "t").string())
                .code,
            2);
  EXPECT_EQ(cli("augment --budget 2 --in " + (dir / "s/train.jsonl").string() + " --out " +
                (dir / "aug.jsonl").string())
                .code,
            0);
  for (const auto& it : read_jsonl(dir / "aug.jsonl")) EXPECT_TRUE(std::holds_alternative<Augmented>(it.origin));
  EXPECT_EQ(cli("split --data " + (dir / "nope.jsonl").string() + " --out-dir " + (dir / "u").string()).code, 2);
}

TEST(Pipeline, DeterministicReport) {
  auto dir = scratch("pipeline");
  write(dir / "run.toml", small_config(dir / "out", kGraph));
  auto first = cli("run --config " + (dir / "run.toml").string());
  ASSERT_EQ(first.code, 0) << first.output;
  const auto report = slurp(dir / "out/report.json");
  auto manifest = nlohmann::json::parse(slurp(dir / "out/manifest.json"));
  EXPECT_TRUE(manifest["complete"].get<bool>());
  EXPECT_EQ(manifest["stages_completed"].size(), 9u);
  EXPECT_EQ(manifest["seeds"]["global"], 7);
  EXPECT_EQ(manifest["config_digest"].get<std::string>().size(), 64u);
  EXPECT_TRUE(manifest["artifacts"].contains("tuned.model"));

  ASSERT_EQ(cli("run --config " + (dir / "run.toml").string()).code, 0);
  EXPECT_EQ(slurp(dir / "out/report.json"), report);
}

TEST(Pipeline, MissingGraphIsStageTagged) {
  auto dir = scratch("nograph");
  write(dir / "run.toml", small_config(dir / "out", (dir / "gone.json").string()));
  auto o = cli("run --config " + (dir / "run.toml").string());
  EXPECT_EQ(o.code, 2);
  EXPECT_NE(o.output.find("[kgraph]"), std::string::npos) << o.output;
  auto manifest = nlohmann::json::parse(slurp(dir / "out/manifest.json"));
  EXPECT_FALSE(manifest["complete"].get<bool>());
  EXPECT_EQ(manifest["failed_stage"], "kgraph");

  auto cfg = load_run_config(dir / "run.toml");
  try {
    run_pipeline(cfg);
    FAIL();
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "kgraph");
  }
}

TEST(Cli, MissingConfig) { EXPECT_EQ(cli("run --config /nonexistent/run.toml").code, 2); }
