#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include "namerec/augment.hpp"
#include "namerec/model.hpp"

namespace namerec {

enum class LambdaSchedule { Constant, LinearRamp };

std::string_view to_string(LambdaSchedule s);
LambdaSchedule parse_lambda_schedule(std::string_view text);

struct TrainConfig {
  /// Weight of the augmented-data NLL term.
  double lambda = 0.5;
  LambdaSchedule lambda_schedule = LambdaSchedule::Constant;
  double lambda_start = 0.0;
  double lambda_end = 1.0;
  double learning_rate = 0.005;
  /// Fixed multiplier on the learning rate of the encoder matrix (and of its
  /// adapter factors). The encoder reads a unit-sum feature vector, so its
  /// raw gradients are two orders of magnitude smaller than the decoder's.
  double encoder_lr_scale = 10.0;
  int batch_size = 16;
  int max_epochs = 10;
  int patience = 3;
  /// Stop after this many optimizer steps in total (0: no limit).
  int max_steps = 0;
  std::uint64_t seed = 0;

  bool augment_enabled = true;
  AugmentConfig augment;
  double tau_percentile = 5.0;
  int plausibility_order = 3;
  double plausibility_smoothing = 0.1;

  /// Prompt context for training items.
  ContextPolicy context_policy = ContextPolicy::ground_truth();
  /// Prompt context for validation; labels are unknown at inference.
  ContextPolicy eval_policy = ContextPolicy::omit();

  /// lambda for a 1-based epoch.
  double lambda_at(int epoch) const;
  /// Throws InvalidConfig.
  void validate() const;
};

/// Defaults for pretraining the base: larger steps, a much larger encoder
/// multiplier and a longer schedule than fine-tuning.
TrainConfig pretrain_defaults();

struct TrainReport {
  /// Index 0 is the state before any update.
  std::vector<double> train_loss;
  std::vector<double> validation_loss;
  std::vector<double> validation_accuracy;
  int best_epoch = 0;
  bool stopped_early = false;
  std::size_t steps = 0;
  std::size_t trainable_parameters = 0;
};

/// A prompt/response pair with its features and token ids precomputed.
struct EncodedExample {
  SparseFeatures features;
  std::vector<int> tokens;
};

struct TrainingPair {
  Prompt prompt;
  ResponseText target;
};

inline EncodedExample encode_example(const TrainingPair& pair, const Tokenizer& tokenizer, int feature_width) {
  return {prompt_features(pair.prompt.text, feature_width), tokenizer.encode(pair.target)};
}

// ---------------------------------------------------------------------------
// Loss and gradients

/// -log P(tokens | features) for one example. When `grad` is non-null, adds
/// `coef` times the gradient with respect to the weights `w` into it.
template <typename Scalar>
Scalar example_nll(const ModelParameters<Scalar>& w, const EncodedExample& ex, Scalar coef,
                   ModelParameters<Scalar>* grad) {
  const Eigen::Index H = w.recurrent.rows();
  const auto T = ex.tokens.size();

  const VectorX<Scalar> h = encode_features(w, ex.features);

  // Forward, keeping states and softmax outputs for the backward pass.
  std::vector<VectorX<Scalar>> states(T + 1, VectorX<Scalar>::Zero(H));
  std::vector<VectorX<Scalar>> probs(T);
  std::vector<int> inputs(T);
  Scalar nll = 0;
  int prev = Tokenizer::kBos;
  for (std::size_t t = 0; t < T; ++t) {
    inputs[t] = prev;
    VectorX<Scalar> z = w.recurrent * states[t] + w.input * w.embedding.col(prev) + h;
    states[t + 1] = z.array().tanh().matrix();
    VectorX<Scalar> logits = w.output * states[t + 1];
    const Scalar m = logits.maxCoeff();
    VectorX<Scalar> e = (logits.array() - m).exp().matrix();
    const Scalar sum = e.sum();
    probs[t] = e / sum;
    nll -= logits(ex.tokens[t]) - (m + std::log(sum));
    prev = ex.tokens[t];
  }
  if (!grad) return nll;

  VectorX<Scalar> ds_next = VectorX<Scalar>::Zero(H);
  VectorX<Scalar> dh = VectorX<Scalar>::Zero(H);
  for (std::size_t tt = T; tt-- > 0;) {
    VectorX<Scalar> dlogits = coef * probs[tt];
    dlogits(ex.tokens[tt]) -= coef;
    const VectorX<Scalar>& s = states[tt + 1];
    grad->output.noalias() += dlogits * s.transpose();
    VectorX<Scalar> ds = w.output.transpose() * dlogits + ds_next;
    VectorX<Scalar> dz = ds.array() * (Scalar(1) - s.array().square());
    grad->recurrent.noalias() += dz * states[tt].transpose();
    grad->input.noalias() += dz * w.embedding.col(inputs[tt]).transpose();
    grad->embedding.col(inputs[tt]).noalias() += w.input.transpose() * dz;
    dh += dz;
    ds_next.noalias() = w.recurrent.transpose() * dz;
  }
  const VectorX<Scalar> dpre = dh.array() * (Scalar(1) - h.array().square());
  for (std::size_t n = 0; n < ex.features.index.size(); ++n) {
    grad->encoder.col(ex.features.index[n]) += static_cast<Scalar>(ex.features.value[n]) * dpre;
  }
  return nll;
}

/// Mean NLL over `batch`; adds the gradient of that mean, scaled by `weight`,
/// into `grad` when given.
template <typename Scalar>
Scalar batch_nll(const ModelParameters<Scalar>& w, const std::vector<EncodedExample>& batch, Scalar weight,
                 ModelParameters<Scalar>* grad) {
  if (batch.empty()) throw Error(ErrorCode::EmptyBatch, "empty batch");
  const Scalar coef = weight / static_cast<Scalar>(batch.size());
  Scalar total = 0;
  for (const auto& ex : batch) total += example_nll(w, ex, coef, grad);
  return total / static_cast<Scalar>(batch.size());
}

/// nll(orig) + lambda * nll(aug); the augmented term is skipped when `aug` is
/// empty or lambda is zero.
template <typename Scalar>
Scalar combined_batch_loss(const ModelParameters<Scalar>& w, const std::vector<EncodedExample>& orig,
                           const std::vector<EncodedExample>& aug, Scalar lambda, ModelParameters<Scalar>* grad) {
  Scalar loss = batch_nll(w, orig, Scalar(1), grad);
  if (!aug.empty() && lambda != Scalar(0)) loss += lambda * batch_nll(w, aug, lambda, grad);
  return loss;
}

template <typename Scalar>
std::vector<EncodedExample> encode_batch(const SurrogateModel<Scalar>& model, const std::vector<TrainingPair>& batch) {
  std::vector<EncodedExample> out;
  out.reserve(batch.size());
  for (const auto& p : batch) out.push_back(encode_example(p, model.tokenizer, model.dims().feature_width));
  return out;
}

/// Eq. 2 with mean reduction: -(1/|batch|) sum log P(target_i | prompt_i).
template <typename Scalar>
Scalar nll_loss(const SurrogateModel<Scalar>& model, const std::vector<TrainingPair>& batch) {
  if (batch.empty()) throw Error(ErrorCode::EmptyBatch, "nll_loss needs a non-empty batch");
  const CompiledModel<Scalar> compiled(model);
  return batch_nll<Scalar>(compiled.weights, encode_batch(model, batch), Scalar(1), nullptr);
}

template <typename Scalar>
Scalar combined_loss(const SurrogateModel<Scalar>& model, const std::vector<TrainingPair>& orig,
                     const std::vector<TrainingPair>& aug, Scalar lambda) {
  if (orig.empty()) throw Error(ErrorCode::EmptyBatch, "combined_loss needs original examples");
  const CompiledModel<Scalar> compiled(model);
  return combined_batch_loss<Scalar>(compiled.weights, encode_batch(model, orig), encode_batch(model, aug), lambda,
                                     nullptr);
}

template <typename Scalar>
struct AdapterGradient {
  MatrixId target;
  MatrixX<Scalar> dA;
  MatrixX<Scalar> dB;
};

template <typename Scalar>
struct AdapterGradients {
  Scalar loss = 0;
  std::vector<AdapterGradient<Scalar>> adapters;
};

/// Chain rule through W_eff = W0 + B A: dA = B^T G, dB = G A^T where G is the
/// gradient with respect to W_eff.
template <typename Scalar>
AdapterGradients<Scalar> adapter_gradients(const SurrogateModel<Scalar>& model, const std::vector<EncodedExample>& orig,
                                           const std::vector<EncodedExample>& aug, Scalar lambda) {
  if (model.adapters.empty()) throw Error(ErrorCode::NoAdapters, "model has no LoRA adapters");
  const CompiledModel<Scalar> compiled(model);
  ModelParameters<Scalar> g = ModelParameters<Scalar>::zeros(model.dims());
  AdapterGradients<Scalar> out;
  out.loss = combined_batch_loss(compiled.weights, orig, aug, lambda, &g);
  for (const auto& a : model.adapters) {
    const auto& G = g.get(a.target);
    out.adapters.push_back({a.target, a.B.transpose() * G, G * a.A.transpose()});
  }
  return out;
}

/// Exact reverse-mode gradients of combined_loss with respect to every
/// adapter factor. Throws NoAdapters.
template <typename Scalar>
AdapterGradients<Scalar> backprop_adapters(const SurrogateModel<Scalar>& model, const std::vector<TrainingPair>& orig,
                                           const std::vector<TrainingPair>& aug, Scalar lambda) {
  if (model.adapters.empty()) throw Error(ErrorCode::NoAdapters, "model has no LoRA adapters");
  if (orig.empty()) throw Error(ErrorCode::EmptyBatch, "backprop needs original examples");
  return adapter_gradients(model, encode_batch(model, orig), encode_batch(model, aug), lambda);
}

/// One SGD update of the adapter factors; the base is never written.
template <typename Scalar>
Scalar adapter_sgd_step(SurrogateModel<Scalar>& model, const std::vector<EncodedExample>& orig,
                        const std::vector<EncodedExample>& aug, Scalar lambda, Scalar learning_rate,
                        Scalar encoder_lr_scale = Scalar(1)) {
  auto grads = adapter_gradients(model, orig, aug, lambda);
  for (std::size_t i = 0; i < model.adapters.size(); ++i) {
    auto& a = model.adapters[i];
    const Scalar lr = a.target == MatrixId::Encoder ? learning_rate * encoder_lr_scale : learning_rate;
    a.A -= lr * grads.adapters[i].dA;
    a.B -= lr * grads.adapters[i].dB;
  }
  return grads.loss;
}

// ---------------------------------------------------------------------------
// Gradient check

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t entries_checked = 0;
};

/// Central differences of combined_loss on `samples` random adapter entries
/// against backprop_adapters. Relative error is
/// |analytic - numeric| / max(|analytic|, 1e-8).
template <typename Scalar>
GradCheckResult grad_check(const SurrogateModel<Scalar>& model, const std::vector<TrainingPair>& orig,
                           const std::vector<TrainingPair>& aug, Scalar lambda, Scalar epsilon, std::size_t samples,
                           std::mt19937_64& rng) {
  if (!(epsilon > 0)) throw Error(ErrorCode::InvalidConfig, "epsilon must be positive");
  const auto eorig = encode_batch(model, orig);
  const auto eaug = encode_batch(model, aug);
  const auto analytic = adapter_gradients(model, eorig, eaug, lambda);

  auto loss_of = [&](const SurrogateModel<Scalar>& m) {
    const CompiledModel<Scalar> c(m);
    return combined_batch_loss<Scalar>(c.weights, eorig, eaug, lambda, nullptr);
  };

  std::size_t total = 0;
  for (const auto& a : model.adapters) total += a.parameter_count();
  std::uniform_int_distribution<std::size_t> pick(0, total - 1);

  GradCheckResult result;
  SurrogateModel<Scalar> probe = model;
  for (std::size_t s = 0; s < samples; ++s) {
    std::size_t flat = pick(rng);
    std::size_t ai = 0;
    while (flat >= model.adapters[ai].parameter_count()) flat -= model.adapters[ai++].parameter_count();
    const bool in_a = flat < static_cast<std::size_t>(model.adapters[ai].A.size());
    if (!in_a) flat -= static_cast<std::size_t>(model.adapters[ai].A.size());
    MatrixX<Scalar>& target = in_a ? probe.adapters[ai].A : probe.adapters[ai].B;
    const Scalar analytic_value = in_a ? analytic.adapters[ai].dA.data()[flat] : analytic.adapters[ai].dB.data()[flat];

    Scalar& entry = target.data()[flat];
    const Scalar saved = entry;
    entry = saved + epsilon;
    const Scalar up = loss_of(probe);
    entry = saved - epsilon;
    const Scalar down = loss_of(probe);
    entry = saved;
    const Scalar numeric = (up - down) / (Scalar(2) * epsilon);

    const double err = std::abs(static_cast<double>(analytic_value - numeric)) /
                       std::max(std::abs(static_cast<double>(analytic_value)), 1e-8);
    result.max_relative_error = std::max(result.max_relative_error, err);
    ++result.entries_checked;
  }
  return result;
}

// ---------------------------------------------------------------------------
// Training loops

struct PretrainResult {
  ModelParameters<double> parameters;
  TrainReport report;
};

/// Trains every base matrix from a seeded random initialization on
/// Omit-context prompts; returns the parameters of the best validation epoch.
/// Throws EmptyCorpus / EmptyValidation.
PretrainResult pretrain_base(const std::vector<LabeledName>& train, const std::vector<LabeledName>& validation,
                             const CategorySet& categories, const ModelDims& dims, const TrainConfig& config);

/// LoRA-only fine-tuning: per epoch, shuffle, augment each mini-batch,
/// build ground-truth-context prompts, minimize the combined loss, update A
/// and B. Early stopping on validation NLL; returns the best epoch's
/// adapters. Throws NoAdapters / EmptyValidation.
std::pair<SurrogateModel<double>, TrainReport> finetune(const SurrogateModel<double>& model, const SplitSet& splits,
                                                        const KnowledgeGraph& graph, const TrainConfig& config);

/// Validation NLL and accuracy under `policy`.
struct ValidationScore {
  double loss = 0.0;
  double accuracy = 0.0;
};
ValidationScore score_validation(const SurrogateModel<double>& model, const std::vector<LabeledName>& items,
                                 const KnowledgeGraph& graph, const ContextPolicy& policy);

/// Prompt/target pairs for labeled items under `policy`.
std::vector<TrainingPair> make_pairs(const std::vector<LabeledName>& items, const ContextPolicy& policy,
                                     const KnowledgeGraph& graph);

}  // namespace namerec
