#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "namerec/config.hpp"
#include "namerec/error.hpp"
#include "namerec/eval.hpp"

namespace namerec {

/// A library error tagged with the pipeline stage that raised it.
class StageError : public Error {
 public:
  StageError(std::string stage, const Error& cause)
      : Error(cause.code(), "[" + stage + "] " + cause.what()), stage_(std::move(stage)) {}

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

struct PipelineResult {
  EvalReport report;
  std::optional<AblationReport> ablation;
  std::vector<std::string> stages;
};

/// gen/split -> kgraph -> pretrain -> attach -> finetune -> eval -> report.
/// Writes corpus.jsonl, splits/, base.model, tuned.model, the reports and
/// manifest.json under config.out_dir. The manifest is rewritten after every
/// stage and only marked complete at the end. Throws StageError.
PipelineResult run_pipeline(const RunConfig& config, const std::function<void(const std::string&)>& log = {});

/// The method rows of the main report, in table order.
EvalReport evaluate_all(const SurrogateModel<double>& tuned, const SurrogateModel<double>& base,
                        const SplitSet& splits, const KnowledgeGraph& graph, const RuleSet& rules, int ngram_order,
                        const ContextPolicy& policy);

}  // namespace namerec
