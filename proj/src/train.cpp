#include "namerec/train.hpp"
#include "namerec/dataset_io.hpp"

#include <algorithm>
#include <numeric>

namespace namerec {

std::string_view to_string(LambdaSchedule s) { return s == LambdaSchedule::Constant ? "constant" : "linear_ramp"; }

LambdaSchedule parse_lambda_schedule(std::string_view text) {
  if (text == "constant") return LambdaSchedule::Constant;
  if (text == "linear_ramp") return LambdaSchedule::LinearRamp;
  throw Error(ErrorCode::InvalidConfig, "unknown lambda schedule '" + std::string(text) + "'");
}

double TrainConfig::lambda_at(int epoch) const {
  if (lambda_schedule == LambdaSchedule::Constant) return lambda;
  const double span = std::max(1, max_epochs - 1);
  const double t = std::clamp(static_cast<double>(epoch - 1) / span, 0.0, 1.0);
  return lambda_start + (lambda_end - lambda_start) * t;
}

TrainConfig pretrain_defaults() {
  TrainConfig c;
  c.learning_rate = 0.05;
  c.encoder_lr_scale = 2000.0;
  c.max_epochs = 60;
  c.patience = 8;
  c.augment_enabled = false;
  return c;
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0)) throw Error(ErrorCode::InvalidConfig, "learning_rate must be positive");
  if (!(encoder_lr_scale > 0)) throw Error(ErrorCode::InvalidConfig, "encoder_lr_scale must be positive");
  if (batch_size < 1) throw Error(ErrorCode::InvalidConfig, "batch_size must be at least 1");
  if (patience < 1) throw Error(ErrorCode::InvalidConfig, "patience must be at least 1");
  if (max_epochs < 0) throw Error(ErrorCode::InvalidConfig, "max_epochs must be non-negative");
  if (max_steps < 0) throw Error(ErrorCode::InvalidConfig, "max_steps must be non-negative");
  if (lambda < 0 || lambda_start < 0 || lambda_end < 0) throw Error(ErrorCode::InvalidConfig, "lambda must be non-negative");
  // Validation stands in for inference, where labels are unknown.
  if (eval_policy.mode == ContextMode::GroundTruth) {
    throw Error(ErrorCode::IllegalPolicy, "validation cannot use ground-truth context");
  }
  augment.validate();
}

std::vector<TrainingPair> make_pairs(const std::vector<LabeledName>& items, const ContextPolicy& policy,
                                     const KnowledgeGraph& graph) {
  std::vector<TrainingPair> out;
  out.reserve(items.size());
  for (const auto& item : items) {
    out.push_back({build_prompt(item.name, policy, item.label, graph), target_response(item.label)});
  }
  return out;
}

namespace {

std::vector<EncodedExample> encode_items(const std::vector<LabeledName>& items, const ContextPolicy& policy,
                                         const KnowledgeGraph& graph, const Tokenizer& tokenizer, int width) {
  std::vector<EncodedExample> out;
  out.reserve(items.size());
  for (const auto& p : make_pairs(items, policy, graph)) out.push_back(encode_example(p, tokenizer, width));
  return out;
}

double mean_nll(const ModelParameters<double>& w, const std::vector<EncodedExample>& data) {
  return batch_nll<double>(w, data, 1.0, nullptr);
}

struct Validation {
  std::vector<EncodedExample> encoded;
  std::vector<std::size_t> gold;  // index into labels
  std::vector<std::vector<int>> candidates;
};

Validation prepare_validation(const std::vector<LabeledName>& items, const CategorySet& categories,
                              const KnowledgeGraph& graph, const ContextPolicy& policy, const Tokenizer& tokenizer,
                              int width) {
  Validation v;
  v.encoded = encode_items(items, policy, graph, tokenizer, width);
  const auto labels = categories.labels_with_not_a_name();
  for (const auto& l : labels) v.candidates.push_back(tokenizer.encode(target_response(l)));
  for (const auto& item : items) v.gold.push_back(categories.index_of(item.label));
  return v;
}

ValidationScore evaluate(const ModelParameters<double>& w, const Validation& v, const CategorySet& categories) {
  const auto labels = categories.labels_with_not_a_name();
  double loss = 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < v.encoded.size(); ++i) {
    loss += example_nll<double>(w, v.encoded[i], 1.0, nullptr);
    const VectorX<double> h = encode_features(w, v.encoded[i].features);
    std::vector<ScoredLabel<double>> ranking;
    for (std::size_t c = 0; c < labels.size(); ++c) {
      ranking.push_back({labels[c], decode_logprob(w, h, v.candidates[c])});
    }
    sort_ranking(ranking);
    if (ranking.front().label == labels[v.gold[i]]) ++correct;
  }
  const double n = static_cast<double>(v.encoded.size());
  return {loss / n, 100.0 * static_cast<double>(correct) / n};
}

std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, int epoch) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(epoch)};
  Rng rng(seq);
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

Rng item_rng(std::uint64_t seed, int epoch, std::size_t item) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(epoch), static_cast<std::uint32_t>(item),
                    static_cast<std::uint32_t>(item >> 32), 0x61756775u};
  return Rng(seq);
}

std::vector<Name> names_of(const std::vector<LabeledName>& items) {
  std::vector<Name> out;
  out.reserve(items.size());
  for (const auto& i : items) out.push_back(i.name);
  return out;
}

}  // namespace

ValidationScore score_validation(const SurrogateModel<double>& model, const std::vector<LabeledName>& items,
                                 const KnowledgeGraph& graph, const ContextPolicy& policy) {
  if (items.empty()) throw Error(ErrorCode::EmptyValidation, "no validation items");
  const CompiledModel<double> compiled(model);
  const auto v = prepare_validation(items, model.categories, graph, policy, model.tokenizer, model.dims().feature_width);
  return evaluate(compiled.weights, v, model.categories);
}

PretrainResult pretrain_base(const std::vector<LabeledName>& train, const std::vector<LabeledName>& validation,
                             const CategorySet& categories, const ModelDims& dims, const TrainConfig& config) {
  if (train.empty()) throw Error(ErrorCode::EmptyCorpus, "pretraining corpus is empty");
  if (validation.empty()) throw Error(ErrorCode::EmptyValidation, "pretraining needs validation items");
  config.validate();
  validate_labels(train, categories);
  validate_labels(validation, categories);

  const Tokenizer tokenizer;
  const KnowledgeGraph no_graph(categories);
  const auto omit = ContextPolicy::omit();
  const auto data = encode_items(train, omit, no_graph, tokenizer, dims.feature_width);
  const auto val = prepare_validation(validation, categories, no_graph, omit, tokenizer, dims.feature_width);

  Rng init_rng(config.seed);
  ModelParameters<double> w = ModelParameters<double>::random(dims, init_rng);

  PretrainResult result;
  auto& report = result.report;
  auto record = [&](double train_loss) {
    const auto s = evaluate(w, val, categories);
    report.train_loss.push_back(train_loss);
    report.validation_loss.push_back(s.loss);
    report.validation_accuracy.push_back(s.accuracy);
    return s.loss;
  };
  double best_loss = record(mean_nll(w, data));
  result.parameters = w;
  report.trainable_parameters = w.parameter_count();

  int since_best = 0;
  ModelParameters<double> g = ModelParameters<double>::zeros(dims);
  const auto batch = static_cast<std::size_t>(config.batch_size);
  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const auto order = epoch_order(data.size(), config.seed, epoch);
    double loss_sum = 0.0;
    std::size_t batches = 0;
    bool step_limit = false;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      std::vector<EncodedExample> mb;
      for (std::size_t k = start; k < std::min(order.size(), start + batch); ++k) mb.push_back(data[order[k]]);
      for (MatrixId id : kAllMatrices) g.get(id).setZero();
      loss_sum += batch_nll<double>(w, mb, 1.0, &g);
      ++batches;
      for (MatrixId id : kAllMatrices) {
        const double lr = config.learning_rate * (id == MatrixId::Encoder ? config.encoder_lr_scale : 1.0);
        w.get(id) -= lr * g.get(id);
      }
      ++report.steps;
      if (config.max_steps && report.steps >= static_cast<std::size_t>(config.max_steps)) {
        step_limit = true;
        break;
      }
    }
    const double v = record(loss_sum / static_cast<double>(batches));
    if (v < best_loss) {
      best_loss = v;
      report.best_epoch = epoch;
      result.parameters = w;
      since_best = 0;
    } else if (++since_best >= config.patience) {
      report.stopped_early = true;
      break;
    }
    if (step_limit) break;
  }
  return result;
}

std::pair<SurrogateModel<double>, TrainReport> finetune(const SurrogateModel<double>& model, const SplitSet& splits,
                                                        const KnowledgeGraph& graph, const TrainConfig& config) {
  if (model.adapters.empty()) throw Error(ErrorCode::NoAdapters, "attach LoRA adapters before fine-tuning");
  if (splits.validation.empty()) throw Error(ErrorCode::EmptyValidation, "fine-tuning needs validation items");
  if (splits.train.empty()) throw Error(ErrorCode::EmptyCorpus, "fine-tuning needs training items");
  config.validate();
  validate_labels(splits.train, model.categories);

  const int width = model.dims().feature_width;
  const auto data = encode_items(splits.train, config.context_policy, graph, model.tokenizer, width);
  const auto val =
      prepare_validation(splits.validation, model.categories, graph, config.eval_policy, model.tokenizer, width);

  const auto train_names = names_of(splits.train);
  const auto plausibility = train_plausibility(train_names, config.plausibility_order, config.plausibility_smoothing);
  AugmentConfig augment = config.augment;
  augment.tau = calibrate_tau(plausibility, train_names, config.tau_percentile);

  SurrogateModel<double> current = model;
  current.frozen = true;
  TrainReport report;
  report.trainable_parameters = current.trainable_parameter_count();

  auto record = [&](double train_loss) {
    const CompiledModel<double> compiled(current);
    const auto s = evaluate(compiled.weights, val, current.categories);
    report.train_loss.push_back(train_loss);
    report.validation_loss.push_back(s.loss);
    report.validation_accuracy.push_back(s.accuracy);
    return s.loss;
  };
  double best_loss = record(mean_nll(CompiledModel<double>(current).weights, data));
  SurrogateModel<double> best = current;

  int since_best = 0;
  const auto batch = static_cast<std::size_t>(config.batch_size);
  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const double lambda = config.lambda_at(epoch);
    const bool use_aug = config.augment_enabled && lambda != 0.0;
    const auto order = epoch_order(data.size(), config.seed, epoch);
    double loss_sum = 0.0;
    std::size_t batches = 0;
    bool step_limit = false;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      std::vector<EncodedExample> orig;
      std::vector<EncodedExample> aug;
      for (std::size_t k = start; k < std::min(order.size(), start + batch); ++k) {
        const std::size_t idx = order[k];
        orig.push_back(data[idx]);
        if (!use_aug) continue;
        Rng rng = item_rng(config.seed, epoch, idx);
        const auto set = augment_set(splits.train[idx], augment, plausibility, splits.train, rng);
        for (const auto& p : make_pairs(set.as_labeled(), config.context_policy, graph)) {
          aug.push_back(encode_example(p, current.tokenizer, width));
        }
      }
      loss_sum += adapter_sgd_step<double>(current, orig, aug, lambda, config.learning_rate, config.encoder_lr_scale);
      ++batches;
      ++report.steps;
      if (config.max_steps && report.steps >= static_cast<std::size_t>(config.max_steps)) {
        step_limit = true;
        break;
      }
    }
    const double v = record(loss_sum / static_cast<double>(batches));
    if (v < best_loss) {
      best_loss = v;
      report.best_epoch = epoch;
      best = current;
      since_best = 0;
    } else if (++since_best >= config.patience) {
      report.stopped_early = true;
      break;
    }
    if (step_limit) break;
  }
  return {std::move(best), std::move(report)};
}

}  // namespace namerec
