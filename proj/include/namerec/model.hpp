#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "namerec/core.hpp"
#include "namerec/digest.hpp"
#include "namerec/promptgen.hpp"
#include "namerec/tokenizer.hpp"

namespace namerec {

// Surrogate language model.
//
// The prompt is encoded as h = tanh(W_enc * phi(prompt)), phi being the
// unit-sum hashed trigram vector. The response y_1..y_M, EOS is decoded by a
// single tanh recurrent cell:
//
//   s_t = tanh(W_s s_{t-1} + W_e emb(y_{t-1}) + h),  s_0 = 0, y_0 = BOS
//   P(y_t | y_<t, prompt) = softmax(W_o s_t)[y_t]
//
// Matrices are stored output-by-input (column-vector convention):
// embedding E x V, W_enc H x d_feat, W_s H x H, W_e H x E, W_o V x H.

enum class MatrixId { Embedding = 0, Encoder = 1, Recurrent = 2, Input = 3, Output = 4 };
inline constexpr std::array<MatrixId, 5> kAllMatrices = {MatrixId::Embedding, MatrixId::Encoder, MatrixId::Recurrent,
                                                         MatrixId::Input, MatrixId::Output};

inline std::string_view to_string(MatrixId id) {
  switch (id) {
    case MatrixId::Embedding: return "embedding";
    case MatrixId::Encoder: return "W_enc";
    case MatrixId::Recurrent: return "W_s";
    case MatrixId::Input: return "W_e";
    case MatrixId::Output: return "W_o";
  }
  return "";
}

inline MatrixId parse_matrix_id(std::string_view text) {
  for (MatrixId id : kAllMatrices)
    if (to_string(id) == text) return id;
  throw Error(ErrorCode::UnknownMatrix, std::string(text));
}

struct ModelDims {
  int hidden = 64;
  int embedding = 32;
  int feature_width = 2048;
  int vocab = Tokenizer{}.size();

  friend bool operator==(const ModelDims&, const ModelDims&) = default;
};

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
struct ModelParameters {
  MatrixX<Scalar> embedding;
  MatrixX<Scalar> encoder;
  MatrixX<Scalar> recurrent;
  MatrixX<Scalar> input;
  MatrixX<Scalar> output;

  MatrixX<Scalar>& get(MatrixId id) {
    switch (id) {
      case MatrixId::Embedding: return embedding;
      case MatrixId::Encoder: return encoder;
      case MatrixId::Recurrent: return recurrent;
      case MatrixId::Input: return input;
      case MatrixId::Output: return output;
    }
    throw Error(ErrorCode::UnknownMatrix, "invalid id");
  }
  const MatrixX<Scalar>& get(MatrixId id) const { return const_cast<ModelParameters&>(*this).get(id); }

  ModelDims dims() const {
    return {static_cast<int>(recurrent.rows()), static_cast<int>(embedding.rows()), static_cast<int>(encoder.cols()),
            static_cast<int>(output.rows())};
  }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (MatrixId id : kAllMatrices) n += static_cast<std::size_t>(get(id).size());
    return n;
  }

  bool all_finite() const {
    for (MatrixId id : kAllMatrices)
      if (!get(id).allFinite()) return false;
    return true;
  }

  static ModelParameters zeros(const ModelDims& d) {
    ModelParameters p;
    p.embedding = MatrixX<Scalar>::Zero(d.embedding, d.vocab);
    p.encoder = MatrixX<Scalar>::Zero(d.hidden, d.feature_width);
    p.recurrent = MatrixX<Scalar>::Zero(d.hidden, d.hidden);
    p.input = MatrixX<Scalar>::Zero(d.hidden, d.embedding);
    p.output = MatrixX<Scalar>::Zero(d.vocab, d.hidden);
    return p;
  }

  /// Uniform Glorot-style initialization. The encoder input is a unit-sum
  /// vector, so its range is set by `encoder_scale` instead of fan-in.
  static ModelParameters random(const ModelDims& d, std::mt19937_64& rng, Scalar encoder_scale = Scalar(1)) {
    ModelParameters p = zeros(d);
    auto fill = [&rng](MatrixX<Scalar>& m, Scalar bound) {
      std::uniform_real_distribution<double> u(-static_cast<double>(bound), static_cast<double>(bound));
      for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = static_cast<Scalar>(u(rng));
    };
    auto glorot = [](const MatrixX<Scalar>& m) {
      return static_cast<Scalar>(std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols())));
    };
    fill(p.embedding, Scalar(0.1));
    fill(p.encoder, encoder_scale);
    fill(p.recurrent, glorot(p.recurrent));
    fill(p.input, glorot(p.input));
    fill(p.output, glorot(p.output));
    return p;
  }

  template <typename Other>
  ModelParameters<Other> cast() const {
    return {embedding.template cast<Other>(), encoder.template cast<Other>(), recurrent.template cast<Other>(),
            input.template cast<Other>(), output.template cast<Other>()};
  }
};

/// W_eff = W0 + B * A with A (r x k), B (d x r); no extra scaling.
template <typename Scalar>
struct LoraAdapter {
  MatrixId target = MatrixId::Encoder;
  MatrixX<Scalar> A;
  MatrixX<Scalar> B;

  int rank() const { return static_cast<int>(A.rows()); }
  std::size_t parameter_count() const { return static_cast<std::size_t>(A.size() + B.size()); }
  MatrixX<Scalar> delta() const { return B * A; }
};

/// Frozen base, optional adapters, tokenizer and the label set it answers over.
template <typename Scalar>
struct SurrogateModel {
  ModelParameters<Scalar> base;
  bool frozen = false;
  std::vector<LoraAdapter<Scalar>> adapters;
  Tokenizer tokenizer;
  CategorySet categories;

  ModelDims dims() const { return base.dims(); }

  const LoraAdapter<Scalar>* adapter_for(MatrixId id) const {
    for (const auto& a : adapters)
      if (a.target == id) return &a;
    return nullptr;
  }

  MatrixX<Scalar> effective(MatrixId id) const {
    MatrixX<Scalar> w = base.get(id);
    if (const auto* a = adapter_for(id)) w.noalias() += a->B * a->A;
    return w;
  }

  std::size_t trainable_parameter_count() const {
    std::size_t n = 0;
    for (const auto& a : adapters) n += a.parameter_count();
    return n;
  }
};

/// Effective weights (base plus adapter deltas) ready for forward passes.
template <typename Scalar>
struct CompiledModel {
  ModelParameters<Scalar> weights;
  Tokenizer tokenizer;

  explicit CompiledModel(const SurrogateModel<Scalar>& model) : tokenizer(model.tokenizer) {
    for (MatrixId id : kAllMatrices) weights.get(id) = model.effective(id);
  }
  explicit CompiledModel(ModelParameters<Scalar> w) : weights(std::move(w)) {}
};

template <typename Scalar>
VectorX<Scalar> encode_features(const ModelParameters<Scalar>& w, const SparseFeatures& phi) {
  VectorX<Scalar> pre = VectorX<Scalar>::Zero(w.encoder.rows());
  for (std::size_t n = 0; n < phi.index.size(); ++n) pre += static_cast<Scalar>(phi.value[n]) * w.encoder.col(phi.index[n]);
  return pre.array().tanh().matrix();
}

/// log softmax(logits)[target], computed with the max-shift.
template <typename Scalar>
Scalar log_softmax_at(const VectorX<Scalar>& logits, int target) {
  const Scalar m = logits.maxCoeff();
  const Scalar lse = m + std::log((logits.array() - m).exp().sum());
  return logits(target) - lse;
}

/// Per-step log-probabilities of `tokens` (which end with EOS) given h.
template <typename Scalar>
std::vector<Scalar> decode_step_logprobs(const ModelParameters<Scalar>& w, const VectorX<Scalar>& h,
                                         const std::vector<int>& tokens) {
  std::vector<Scalar> out;
  out.reserve(tokens.size());
  VectorX<Scalar> s = VectorX<Scalar>::Zero(h.size());
  int prev = Tokenizer::kBos;
  for (int y : tokens) {
    VectorX<Scalar> z = w.recurrent * s + w.input * w.embedding.col(prev) + h;
    s = z.array().tanh().matrix();
    VectorX<Scalar> logits = w.output * s;
    out.push_back(log_softmax_at(logits, y));
    prev = y;
  }
  return out;
}

template <typename Scalar>
Scalar decode_logprob(const ModelParameters<Scalar>& w, const VectorX<Scalar>& h, const std::vector<int>& tokens) {
  Scalar total = 0;
  for (Scalar lp : decode_step_logprobs(w, h, tokens)) total += lp;
  return total;
}

/// Softmax distribution at each decoding step (columns), teacher-forced on
/// `tokens`.
template <typename Scalar>
MatrixX<Scalar> decode_step_distributions(const ModelParameters<Scalar>& w, const VectorX<Scalar>& h,
                                          const std::vector<int>& tokens) {
  MatrixX<Scalar> out(w.output.rows(), static_cast<Eigen::Index>(tokens.size()));
  VectorX<Scalar> s = VectorX<Scalar>::Zero(h.size());
  int prev = Tokenizer::kBos;
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    VectorX<Scalar> z = w.recurrent * s + w.input * w.embedding.col(prev) + h;
    s = z.array().tanh().matrix();
    VectorX<Scalar> logits = w.output * s;
    const Scalar m = logits.maxCoeff();
    VectorX<Scalar> e = (logits.array() - m).exp().matrix();
    out.col(static_cast<Eigen::Index>(t)) = e / e.sum();
    prev = tokens[t];
  }
  return out;
}

template <typename Scalar>
VectorX<Scalar> encode_prompt(const CompiledModel<Scalar>& model, const Prompt& prompt) {
  return encode_features(model.weights, prompt_features(prompt.text, static_cast<int>(model.weights.encoder.cols())));
}

template <typename Scalar>
VectorX<Scalar> encode_prompt(const SurrogateModel<Scalar>& model, const Prompt& prompt) {
  return encode_prompt(CompiledModel<Scalar>(model), prompt);
}

template <typename Scalar>
Scalar response_logprob(const CompiledModel<Scalar>& model, const Prompt& prompt, const ResponseText& response) {
  return decode_logprob(model.weights, encode_prompt(model, prompt), model.tokenizer.encode(response));
}

/// log P(response | prompt): sum of per-step log-probabilities, EOS included.
template <typename Scalar>
Scalar response_logprob(const SurrogateModel<Scalar>& model, const Prompt& prompt, const ResponseText& response) {
  return response_logprob(CompiledModel<Scalar>(model), prompt, response);
}

template <typename Scalar>
struct ScoredLabel {
  Label label;
  Scalar logprob;
};

/// Descending log-probability; ties by ascending display name.
template <typename Scalar>
void sort_ranking(std::vector<ScoredLabel<Scalar>>& ranking) {
  std::sort(ranking.begin(), ranking.end(), [](const ScoredLabel<Scalar>& a, const ScoredLabel<Scalar>& b) {
    if (a.logprob != b.logprob) return a.logprob > b.logprob;
    return a.label.display() < b.label.display();
  });
}

/// Constrained decoding: every culture in `categories` and NotAName is scored
/// as a complete response.
template <typename Scalar>
std::vector<ScoredLabel<Scalar>> predict(const CompiledModel<Scalar>& model, const Prompt& prompt,
                                         const CategorySet& categories) {
  if (categories.empty()) throw Error(ErrorCode::EmptySet, "predict needs at least one category");
  const VectorX<Scalar> h = encode_prompt(model, prompt);
  std::vector<ScoredLabel<Scalar>> ranking;
  for (const Label& label : categories.labels_with_not_a_name()) {
    ranking.push_back({label, decode_logprob(model.weights, h, model.tokenizer.encode(target_response(label)))});
  }
  sort_ranking(ranking);
  return ranking;
}

template <typename Scalar>
std::vector<ScoredLabel<Scalar>> predict(const SurrogateModel<Scalar>& model, const Prompt& prompt,
                                         const CategorySet& categories) {
  return predict(CompiledModel<Scalar>(model), prompt, categories);
}

struct MatrixShape {
  long rows = 0;
  long cols = 0;
};

/// Sum over matrices of d*r + r*k.
std::size_t lora_param_count(const std::vector<MatrixShape>& shapes, int rank);

/// Copy of `model` with one adapter per target: A ~ U[-init_scale, init_scale],
/// B = 0, base frozen. Throws RankTooLarge unless rank < min(d, k), and
/// InvalidConfig for rank < 1 or a repeated target.
template <typename Scalar>
SurrogateModel<Scalar> lora_attach(const SurrogateModel<Scalar>& model, const std::vector<MatrixId>& targets,
                                   int rank, double init_scale, std::mt19937_64& rng) {
  if (rank < 1) throw Error(ErrorCode::InvalidConfig, "LoRA rank must be at least 1");
  SurrogateModel<Scalar> out = model;
  out.frozen = true;
  std::uniform_real_distribution<double> u(-init_scale, init_scale);
  for (MatrixId id : targets) {
    if (out.adapter_for(id)) throw Error(ErrorCode::InvalidConfig, "duplicate adapter target " + std::string(to_string(id)));
    const auto& w = model.base.get(id);
    if (rank >= std::min(w.rows(), w.cols())) {
      throw Error(ErrorCode::RankTooLarge, "rank " + std::to_string(rank) + " for " + std::string(to_string(id)) +
                                               " of shape " + std::to_string(w.rows()) + "x" + std::to_string(w.cols()));
    }
    LoraAdapter<Scalar> a;
    a.target = id;
    a.A.resize(rank, w.cols());
    for (Eigen::Index j = 0; j < a.A.cols(); ++j)
      for (Eigen::Index i = 0; i < a.A.rows(); ++i) a.A(i, j) = static_cast<Scalar>(u(rng));
    a.B = MatrixX<Scalar>::Zero(w.rows(), rank);
    out.adapters.push_back(std::move(a));
  }
  return out;
}

/// Adapter placement and initialization.
struct LoraConfig {
  std::vector<MatrixId> targets = {MatrixId::Encoder, MatrixId::Recurrent, MatrixId::Output};
  int rank = 4;
  double init_scale = 0.1;
  std::uint64_t seed = 0;
};

template <typename Scalar>
SurrogateModel<Scalar> lora_attach(const SurrogateModel<Scalar>& model, const LoraConfig& config) {
  std::mt19937_64 rng(config.seed);
  return lora_attach(model, config.targets, config.rank, config.init_scale, rng);
}

/// Parses names such as "W_enc" (see to_string(MatrixId)).
std::vector<MatrixId> parse_matrix_ids(const std::vector<std::string>& names);

/// SHA-256 over the base matrices: for each matrix in kAllMatrices order,
/// rows and cols as int64 then the column-major entries.
template <typename Scalar>
std::string base_digest(const ModelParameters<Scalar>& p) {
  Sha256 h;
  for (MatrixId id : kAllMatrices) {
    const auto& m = p.get(id);
    const std::int64_t dims[2] = {static_cast<std::int64_t>(m.rows()), static_cast<std::int64_t>(m.cols())};
    h.update(dims, sizeof dims);
    h.update(m.data(), sizeof(Scalar) * static_cast<std::size_t>(m.size()));
  }
  return h.hex();
}

/// Model archive: magic "NAMEREC1", little-endian uint64 header length, JSON
/// header, then raw little-endian float64 matrices (column-major) in header
/// order: the five base matrices, then A and B of every adapter.
void save_model(const std::string& path, const SurrogateModel<double>& model);
SurrogateModel<double> load_model(const std::string& path);

}  // namespace namerec
