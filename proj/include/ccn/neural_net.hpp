#pragma once

// Dense feed-forward encoder/decoder pair for a one-hot (n1, k1) inner code.
//
//   encoder: one-hot(2^k1) -> ReLU(h) -> ReLU(h) -> linear(n1)
//   decoder: n1 -> ReLU(h') -> ReLU(h') -> linear(2^k1) logits
//
// Batches are matrices with one sample per row. Everything is double
// precision. Gradients are exact reverse-mode derivatives of the batch-mean
// categorical cross-entropy through encoder, per-dimension batch power
// normalization (statistics differentiated as functions of the batch), a
// fixed channel realization, and decoder.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ccn/channels.hpp"
#include "ccn/errors.hpp"
#include "ccn/rng.hpp"

namespace ccn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class Activation : std::uint8_t { Linear = 0, Relu = 1 };

struct LayerParams {
  Matrix weights;  // out x in
  Vector bias;     // out
  Activation activation = Activation::Linear;

  Eigen::Index in() const { return weights.cols(); }
  Eigen::Index out() const { return weights.rows(); }
  bool finite() const { return weights.allFinite() && bias.allFinite(); }
};

struct BatchStats {
  Vector mean;    // per output dimension
  Vector stddev;  // per output dimension, > 0
};

struct NeuralCodeModel {
  unsigned k1 = 0;
  unsigned n1 = 0;
  std::vector<LayerParams> encoder;
  std::vector<LayerParams> decoder;
  // Codebook statistics under uniform symbols, used by the frozen
  // normalization mode. Filled in by the trainer.
  std::optional<BatchStats> frozen_stats;

  std::size_t messages() const { return std::size_t{1} << k1; }

  void validate() const {
    const auto q = static_cast<Eigen::Index>(messages());
    const auto n = static_cast<Eigen::Index>(n1);
    auto check_stack = [](const std::vector<LayerParams>& layers, Eigen::Index in, Eigen::Index out, const char* name) {
      if (layers.size() != 3) throw InvalidInput(std::string(name) + ": expected exactly two hidden layers");
      Eigen::Index width = in;
      for (std::size_t l = 0; l < layers.size(); ++l) {
        const auto& layer = layers[l];
        if (layer.in() != width || layer.bias.size() != layer.out())
          throw InvalidInput(std::string(name) + ": layer shapes do not chain");
        const Activation want = l + 1 < layers.size() ? Activation::Relu : Activation::Linear;
        if (layer.activation != want) throw InvalidInput(std::string(name) + ": unexpected activation");
        width = layer.out();
      }
      if (width != out) throw InvalidInput(std::string(name) + ": wrong output width");
    };
    if (k1 == 0 || k1 > 16 || n1 == 0) throw InvalidInput("NeuralCodeModel: need 0 < k1 <= 16 and n1 > 0");
    check_stack(encoder, q, n, "encoder");
    check_stack(decoder, n, q, "decoder");
    if (frozen_stats && (frozen_stats->mean.size() != n || frozen_stats->stddev.size() != n))
      throw InvalidInput("NeuralCodeModel: frozen statistics have the wrong width");
  }

  bool finite() const {
    for (const auto& l : encoder)
      if (!l.finite()) return false;
    for (const auto& l : decoder)
      if (!l.finite()) return false;
    return true;
  }

  // All-zero parameters; hidden widths default to 2^k1.
  static NeuralCodeModel zeros(unsigned k1, unsigned n1, Eigen::Index enc_hidden = 0, Eigen::Index dec_hidden = 0) {
    NeuralCodeModel m;
    m.k1 = k1;
    m.n1 = n1;
    const auto q = static_cast<Eigen::Index>(std::size_t{1} << k1);
    const Eigen::Index he = enc_hidden > 0 ? enc_hidden : q;
    const Eigen::Index hd = dec_hidden > 0 ? dec_hidden : q;
    auto layer = [](Eigen::Index out, Eigen::Index in, Activation a) {
      return LayerParams{Matrix::Zero(out, in), Vector::Zero(out), a};
    };
    m.encoder = {layer(he, q, Activation::Relu), layer(he, he, Activation::Relu),
                 layer(static_cast<Eigen::Index>(n1), he, Activation::Linear)};
    m.decoder = {layer(hd, static_cast<Eigen::Index>(n1), Activation::Relu), layer(hd, hd, Activation::Relu),
                 layer(q, hd, Activation::Linear)};
    return m;
  }

  // He-uniform weights for ReLU layers, Glorot-uniform for linear outputs,
  // zero biases. Draws encoder layers then decoder layers, row-major.
  static NeuralCodeModel initialized(unsigned k1, unsigned n1, RandomStream& rng, Eigen::Index enc_hidden = 0,
                                     Eigen::Index dec_hidden = 0) {
    NeuralCodeModel m = zeros(k1, n1, enc_hidden, dec_hidden);
    auto fill = [&rng](LayerParams& layer) {
      const auto fan_in = static_cast<double>(layer.in());
      const auto fan_out = static_cast<double>(layer.out());
      const double limit = layer.activation == Activation::Relu ? std::sqrt(6.0 / fan_in)
                                                                : std::sqrt(6.0 / (fan_in + fan_out));
      for (Eigen::Index r = 0; r < layer.weights.rows(); ++r)
        for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) layer.weights(r, c) = rng.uniform(-limit, limit);
    };
    for (auto& l : m.encoder) fill(l);
    for (auto& l : m.decoder) fill(l);
    return m;
  }
};

// Per-layer inputs and pre-activations recorded during a forward pass.
struct StackCache {
  std::vector<Matrix> inputs;
  std::vector<Matrix> preacts;
};

namespace detail {

inline void activate(Matrix& z, Activation a) {
  if (a == Activation::Relu) z = z.cwiseMax(0.0);
}

// Runs layers[begin..] on x; records into cache when given.
inline Matrix forward_stack(const std::vector<LayerParams>& layers, std::size_t begin, Matrix x, StackCache* cache) {
  for (std::size_t l = begin; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    Matrix z = x * layer.weights.transpose();
    z.rowwise() += layer.bias.transpose();
    if (cache) {
      cache->inputs.push_back(std::move(x));
      cache->preacts.push_back(z);
    }
    activate(z, layer.activation);
    x = std::move(z);
  }
  return x;
}

// Back-propagates d(loss)/d(output) through layers[begin..]; accumulates
// parameter gradients and returns d(loss)/d(input of layer `begin`).
// ReLU subgradient at exactly 0 is taken as 0.
inline Matrix backward_stack(const std::vector<LayerParams>& layers, std::size_t begin, const StackCache& cache,
                             Matrix d_out, std::vector<LayerParams>& grads, bool need_input_grad = true) {
  for (std::size_t l = layers.size(); l-- > begin;) {
    const std::size_t c = l - begin;
    const auto& layer = layers[l];
    if (layer.activation == Activation::Relu) d_out = d_out.cwiseProduct((cache.preacts[c].array() > 0.0).cast<double>().matrix());
    grads[l].weights.noalias() += d_out.transpose() * cache.inputs[c];
    grads[l].bias += d_out.colwise().sum().transpose();
    if (l > begin || need_input_grad) d_out = d_out * layer.weights;
  }
  return d_out;
}

}  // namespace detail

inline Matrix one_hot(std::span<const std::uint32_t> indices, std::size_t width) {
  Matrix s = Matrix::Zero(static_cast<Eigen::Index>(indices.size()), static_cast<Eigen::Index>(width));
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= width) throw InvalidInput("one_hot: index out of range");
    s(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(indices[i])) = 1.0;
  }
  return s;
}

struct EncoderCache {
  std::vector<std::uint32_t> indices;
  Matrix first_preact;  // layer-1 pre-activation (column select of W1 plus b1)
  StackCache rest;      // layers 2..L
};

// Encoder on one-hot inputs: layer 1 reduces to selecting column j of W1.
inline Matrix encoder_forward(std::span<const std::uint32_t> indices, const NeuralCodeModel& model,
                              EncoderCache* cache = nullptr) {
  const auto& first = model.encoder.front();
  const auto m = static_cast<Eigen::Index>(indices.size());
  Matrix z(m, first.out());
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto j = indices[static_cast<std::size_t>(i)];
    if (j >= model.messages()) throw InvalidInput("encoder_forward: symbol index out of range");
    z.row(i) = (first.weights.col(static_cast<Eigen::Index>(j)) + first.bias).transpose();
  }
  Matrix h = z.cwiseMax(0.0);
  if (cache) {
    cache->indices.assign(indices.begin(), indices.end());
    cache->first_preact = std::move(z);
    cache->rest = {};
  }
  return detail::forward_stack(model.encoder, 1, std::move(h), cache ? &cache->rest : nullptr);
}

// Reference path: full matrix product on dense (e.g. one-hot) input rows.
inline Matrix encoder_forward_dense(const Matrix& inputs, const NeuralCodeModel& model) {
  return detail::forward_stack(model.encoder, 0, inputs, nullptr);
}

// Encoder outputs for every message, row j = f(s_j).
inline Matrix encoder_codebook(const NeuralCodeModel& model) {
  std::vector<std::uint32_t> all(model.messages());
  for (std::size_t j = 0; j < all.size(); ++j) all[j] = static_cast<std::uint32_t>(j);
  return encoder_forward(all, model);
}

inline constexpr double kMinNormVariance = 1e-12;

struct NormalizedBatch {
  Matrix x;  // zero mean, unit (population) variance per column
  BatchStats stats;
};

// Per-dimension batch normalization (x - mu) / sigma with population
// variance, so every output column has mean 0 and variance 1.
inline NormalizedBatch normalize_power(const Matrix& x) {
  if (x.rows() < 2) throw InvalidInput("normalize_power: need at least 2 samples");
  const double m = static_cast<double>(x.rows());
  NormalizedBatch out;
  out.stats.mean = x.colwise().mean().transpose();
  const Matrix centered = x.rowwise() - out.stats.mean.transpose();
  const Vector var = centered.array().square().colwise().sum().transpose() / m;
  for (Eigen::Index c = 0; c < var.size(); ++c) {
    if (!(var(c) > kMinNormVariance)) {
      throw DegenerateBatch("normalize_power: dimension " + std::to_string(c) + " has variance " +
                            std::to_string(var(c)));
    }
  }
  out.stats.stddev = var.cwiseSqrt();
  out.x = centered.array().rowwise() / out.stats.stddev.transpose().array();
  return out;
}

inline Matrix apply_normalization(const Matrix& x, const BatchStats& stats) {
  return (x.rowwise() - stats.mean.transpose()).array().rowwise() / stats.stddev.transpose().array();
}

// d(loss)/dx given d(loss)/d(normalized x), with mu and sigma depending on x.
inline Matrix normalize_backward(const Matrix& d_norm, const Matrix& normalized, const BatchStats& stats) {
  const double m = static_cast<double>(d_norm.rows());
  const Eigen::RowVectorXd mean_d = d_norm.colwise().sum() / m;
  const Eigen::RowVectorXd mean_dx = d_norm.cwiseProduct(normalized).colwise().sum() / m;
  Matrix d = d_norm.rowwise() - mean_d;
  d -= (normalized.array().rowwise() * mean_dx.array()).matrix();
  return d.array().rowwise() / stats.stddev.transpose().array();
}

// Returns logits z (m x 2^k1).
inline Matrix decoder_forward(const Matrix& y, const NeuralCodeModel& model, StackCache* cache = nullptr) {
  if (y.cols() != static_cast<Eigen::Index>(model.n1)) throw InvalidInput("decoder_forward: input width != n1");
  return detail::forward_stack(model.decoder, 0, y, cache);
}

// Row-wise softmax with max subtraction.
inline Matrix softmax_rows(const Matrix& z) {
  const Vector row_max = z.rowwise().maxCoeff();
  Matrix e = (z.colwise() - row_max).array().exp();
  const Vector sums = e.rowwise().sum();
  return e.array().colwise() / sums.array();
}

// Mean of -log softmax(z)[i, j_i], via log-sum-exp.
inline double cross_entropy_from_logits(const Matrix& z, std::span<const std::uint32_t> truth) {
  if (static_cast<std::size_t>(z.rows()) != truth.size()) throw InvalidInput("cross_entropy: batch size mismatch");
  double total = 0.0;
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const double mx = z.row(i).maxCoeff();
    const double lse = mx + std::log((z.row(i).array() - mx).exp().sum());
    total += lse - z(i, static_cast<Eigen::Index>(truth[static_cast<std::size_t>(i)]));
  }
  return total / static_cast<double>(z.rows());
}

// Mean of -log p[i, j_i] for probability rows.
inline double cross_entropy(const Matrix& probs, std::span<const std::uint32_t> truth) {
  if (static_cast<std::size_t>(probs.rows()) != truth.size()) throw InvalidInput("cross_entropy: batch size mismatch");
  double total = 0.0;
  for (Eigen::Index i = 0; i < probs.rows(); ++i)
    total -= std::log(probs(i, static_cast<Eigen::Index>(truth[static_cast<std::size_t>(i)])));
  return total / static_cast<double>(probs.rows());
}

struct SymbolDecision {
  std::uint32_t symbol = 0;  // argmax, lowest index on ties
  bool erased = false;       // confidence <= threshold
  double confidence = 0.0;   // max probability
};

inline SymbolDecision decide_symbol(std::span<const double> probs, double threshold) {
  if (probs.empty()) throw InvalidInput("decide_symbol: empty probability vector");
  SymbolDecision d;
  d.confidence = probs[0];
  for (std::size_t j = 1; j < probs.size(); ++j) {
    if (probs[j] > d.confidence) {
      d.confidence = probs[j];
      d.symbol = static_cast<std::uint32_t>(j);
    }
  }
  d.erased = d.confidence <= threshold;
  return d;
}

// Same decision from one row of logits: max softmax = 1 / sum exp(z - max).
template <class RowExpr>
SymbolDecision decide_from_logits(const RowExpr& z, double threshold) {
  SymbolDecision d;
  double mx = z(0);
  for (Eigen::Index j = 1; j < z.size(); ++j) {
    if (z(j) > mx) {
      mx = z(j);
      d.symbol = static_cast<std::uint32_t>(j);
    }
  }
  double sum = 0.0;
  for (Eigen::Index j = 0; j < z.size(); ++j) sum += std::exp(z(j) - mx);
  d.confidence = 1.0 / sum;
  d.erased = d.confidence <= threshold;
  return d;
}

struct ModelGradients {
  std::vector<LayerParams> encoder;
  std::vector<LayerParams> decoder;

  static ModelGradients zeros_like(const NeuralCodeModel& model) {
    ModelGradients g;
    for (const auto& l : model.encoder) g.encoder.push_back({Matrix::Zero(l.out(), l.in()), Vector::Zero(l.out()), l.activation});
    for (const auto& l : model.decoder) g.decoder.push_back({Matrix::Zero(l.out(), l.in()), Vector::Zero(l.out()), l.activation});
    return g;
  }

  bool finite() const {
    for (const auto& l : encoder)
      if (!l.finite()) return false;
    for (const auto& l : decoder)
      if (!l.finite()) return false;
    return true;
  }
};

// Loss of the full graph encoder -> normalize -> channel -> decoder -> CE
// for a fixed channel realization.
inline double autoencoder_loss(const NeuralCodeModel& model, std::span<const std::uint32_t> indices,
                               const ChannelDraw& channel) {
  const NormalizedBatch tx = normalize_power(encoder_forward(indices, model));
  return cross_entropy_from_logits(decoder_forward(channel.apply(tx.x), model), indices);
}

// Same loss; writes exact gradients for every parameter into `grads`
// (overwritten, not accumulated).
inline double autoencoder_loss_and_gradients(const NeuralCodeModel& model, std::span<const std::uint32_t> indices,
                                             const ChannelDraw& channel, ModelGradients& grads,
                                             NormalizedBatch* transmitted = nullptr) {
  grads = ModelGradients::zeros_like(model);
  EncoderCache enc;
  const Matrix raw = encoder_forward(indices, model, &enc);
  NormalizedBatch tx = normalize_power(raw);
  StackCache dec;
  const Matrix logits = decoder_forward(channel.apply(tx.x), model, &dec);
  const double loss = cross_entropy_from_logits(logits, indices);

  // d loss / d logits = (softmax - onehot) / m
  const auto m = static_cast<double>(indices.size());
  Matrix d = softmax_rows(logits);
  for (std::size_t i = 0; i < indices.size(); ++i) d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(indices[i])) -= 1.0;
  d /= m;

  d = detail::backward_stack(model.decoder, 0, dec, std::move(d), grads.decoder);
  if (!channel.unit_gain()) d = d.cwiseProduct(channel.gain);
  d = normalize_backward(d, tx.x, tx.stats);
  d = detail::backward_stack(model.encoder, 1, enc.rest, std::move(d), grads.encoder);

  // Layer 1 on one-hot input: dW1[:, j] += dz_i, db1 += dz_i.
  d = d.cwiseProduct((enc.first_preact.array() > 0.0).cast<double>().matrix());
  auto& g1 = grads.encoder.front();
  for (std::size_t i = 0; i < indices.size(); ++i) {
    g1.weights.col(static_cast<Eigen::Index>(indices[i])) += d.row(static_cast<Eigen::Index>(i)).transpose();
  }
  g1.bias += d.colwise().sum().transpose();
  if (transmitted) *transmitted = std::move(tx);
  return loss;
}

enum class NormalizationMode {
  PerBatch,  // statistics of the transmitted batch itself
  Frozen,    // statistics stored with the model (codebook under uniform symbols)
};

// Power normalization as applied at the transmitter during inference.
inline Matrix normalize_for_transmission(const Matrix& x, const NeuralCodeModel& model, NormalizationMode mode) {
  if (mode == NormalizationMode::PerBatch) return normalize_power(x).x;
  if (!model.frozen_stats) throw InvalidInput("frozen normalization requested but the model carries no statistics");
  return apply_normalization(x, *model.frozen_stats);
}

struct NadamConfig {
  double learning_rate = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Nadam with constant momentum coefficient (Dozat's recurrence):
//   m_t   = b1 m_{t-1} + (1 - b1) g
//   v_t   = b2 v_{t-1} + (1 - b2) g^2
//   m_hat = b1 m_t / (1 - b1^(t+1)) + (1 - b1) g / (1 - b1^t)
//   v_hat = v_t / (1 - b2^t)
//   theta = theta - lr m_hat / (sqrt(v_hat) + eps)
class Nadam {
 public:
  explicit Nadam(NadamConfig config = {}) : config_(config) {}

  const NadamConfig& config() const { return config_; }
  long long steps() const { return t_; }

  // Rejects non-finite gradients with NumericalFault, leaving model and
  // state untouched.
  void step(NeuralCodeModel& model, const ModelGradients& grads) {
    if (!grads.finite()) throw NumericalFault("Nadam: non-finite gradient");
    std::vector<Eigen::Map<Eigen::ArrayXd>> params;
    std::vector<Eigen::Map<const Eigen::ArrayXd>> gs;
    auto collect = [&](std::vector<LayerParams>& ps, const std::vector<LayerParams>& g) {
      for (std::size_t l = 0; l < ps.size(); ++l) {
        params.emplace_back(ps[l].weights.data(), ps[l].weights.size());
        gs.emplace_back(g[l].weights.data(), g[l].weights.size());
        params.emplace_back(ps[l].bias.data(), ps[l].bias.size());
        gs.emplace_back(g[l].bias.data(), g[l].bias.size());
      }
    };
    collect(model.encoder, grads.encoder);
    collect(model.decoder, grads.decoder);
    if (m_.empty()) {
      for (const auto& p : params) {
        m_.push_back(Eigen::ArrayXd::Zero(p.size()));
        v_.push_back(Eigen::ArrayXd::Zero(p.size()));
      }
    }
    if (m_.size() != params.size()) throw InvalidInput("Nadam: parameter layout changed between steps");

    ++t_;
    const double b1 = config_.beta1;
    const double b2 = config_.beta2;
    const double t = static_cast<double>(t_);
    const double c1 = 1.0 - std::pow(b1, t);
    const double c1_next = 1.0 - std::pow(b1, t + 1.0);
    const double c2 = 1.0 - std::pow(b2, t);
    for (std::size_t i = 0; i < params.size(); ++i) {
      const auto& g = gs[i];
      m_[i] = b1 * m_[i] + (1.0 - b1) * g;
      v_[i] = b2 * v_[i] + (1.0 - b2) * g.square();
      const Eigen::ArrayXd m_hat = b1 * m_[i] / c1_next + (1.0 - b1) * g / c1;
      const Eigen::ArrayXd v_hat = v_[i] / c2;
      params[i] -= config_.learning_rate * m_hat / (v_hat.sqrt() + config_.epsilon);
    }
  }

 private:
  NadamConfig config_;
  long long t_ = 0;
  std::vector<Eigen::ArrayXd> m_;
  std::vector<Eigen::ArrayXd> v_;
};

}  // namespace ccn
