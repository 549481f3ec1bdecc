#pragma once

// End-to-end training of the inner autoencoder through a differentiable
// channel: each step draws m uniform symbol indices and a fresh channel
// realization, runs encoder -> normalize -> channel -> decoder -> CE,
// back-propagates and applies one Nadam update.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "ccn/channels.hpp"
#include "ccn/errors.hpp"
#include "ccn/neural_net.hpp"
#include "ccn/rng.hpp"
#include "ccn/stats.hpp"

namespace ccn {

struct TrainConfig {
  unsigned k1 = 8;
  unsigned n1 = 12;
  ChannelKind channel = ChannelKind::Awgn;
  double burst_prob = 0.1;
  double train_ebn0_db = 5.0;
  // Rate used to turn Eb/N0 into a noise level: the overall rate of the
  // code this inner model serves. 0 means k1 / n1.
  double rate = 0.0;
  std::size_t samples_per_epoch = 1'000'110;  // 3922 batches of 255
  std::size_t epochs = 5;
  std::size_t batch_size = 255;
  double learning_rate = 5e-4;
  std::uint64_t seed = 1;
  std::size_t eval_every = 10'000;
  std::size_t eval_trials = 10'000;
  std::size_t log_every = 100;

  double effective_rate() const { return rate > 0.0 ? rate : static_cast<double>(k1) / static_cast<double>(n1); }
  double sigma() const { return ebn0_to_sigma(train_ebn0_db, effective_rate()); }
  std::size_t steps_per_epoch() const { return samples_per_epoch / batch_size; }
  std::size_t total_steps() const { return epochs * steps_per_epoch(); }

  void validate() const {
    if (k1 == 0 || k1 > 16 || n1 == 0) throw InvalidInput("TrainConfig: need 0 < k1 <= 16 and n1 > 0");
    if (batch_size < 2) throw InvalidInput("TrainConfig: batch_size must be at least 2");
    if (samples_per_epoch % batch_size != 0)
      throw InvalidInput("TrainConfig: samples_per_epoch must be a multiple of batch_size");
    if (!(effective_rate() > 0.0 && effective_rate() <= 1.0)) throw InvalidInput("TrainConfig: rate must lie in (0, 1]");
    if (!(burst_prob >= 0.0 && burst_prob <= 1.0)) throw InvalidInput("TrainConfig: burst_prob must lie in [0, 1]");
    if (!(learning_rate > 0.0)) throw InvalidInput("TrainConfig: learning_rate must be positive");
    if (eval_trials == 0) throw InvalidInput("TrainConfig: eval_trials must be positive");
  }

  // Inner (12,8) code of the (255*12, 223*8) concatenated code.
  static TrainConfig large_inner(ChannelKind kind = ChannelKind::Awgn) {
    TrainConfig c;
    c.k1 = 8;
    c.n1 = 12;
    c.channel = kind;
    c.train_ebn0_db = default_train_ebn0_db(kind);
    c.rate = (8.0 * 223.0) / (12.0 * 255.0);
    c.batch_size = 255;
    c.samples_per_epoch = 1'000'110;
    c.epochs = 5;
    return c;
  }

  // Stand-alone (7,4) reference autoencoder, also the inner code of the
  // (15*7, 11*4) concatenated code.
  static TrainConfig reference_ae(ChannelKind kind = ChannelKind::Awgn) {
    TrainConfig c;
    c.k1 = 4;
    c.n1 = 7;
    c.channel = kind;
    c.train_ebn0_db = default_train_ebn0_db(kind);
    c.rate = 4.0 / 7.0;
    c.batch_size = 15;
    c.samples_per_epoch = 50'000'010;  // 3'333'334 batches of 15
    c.epochs = 10;
    return c;
  }

  static double default_train_ebn0_db(ChannelKind kind) {
    switch (kind) {
      case ChannelKind::Awgn: return 5.0;
      case ChannelKind::RayleighFast: return 10.0;
      case ChannelKind::Bursty: return 3.0;
    }
    return 5.0;
  }
};

struct SerEstimate {
  double rate = 0.0;
  double half_width = 0.0;  // 95% Clopper-Pearson half-width
  std::uint64_t errors = 0;
  std::uint64_t trials = 0;
};

// Monte Carlo symbol error rate of argmax decoding (threshold 0). Symbols
// are sent in batches of `batch_size`; the trial count is rounded up to a
// whole number of batches.
inline SerEstimate estimate_symbol_error_rate(const NeuralCodeModel& model, ChannelKind kind, double burst_prob,
                                              double sigma, std::size_t trials, std::size_t batch_size,
                                              RandomStream& rng,
                                              NormalizationMode mode = NormalizationMode::PerBatch) {
  if (trials == 0) throw InvalidInput("estimate_symbol_error_rate: trials must be positive");
  if (batch_size < 2) throw InvalidInput("estimate_symbol_error_rate: batch_size must be at least 2");
  const Matrix codebook = encoder_codebook(model);
  const auto m = static_cast<Eigen::Index>(batch_size);
  const std::size_t batches = (trials + batch_size - 1) / batch_size;
  SerEstimate est;
  std::vector<std::uint32_t> idx(batch_size);
  Matrix raw(m, codebook.cols());
  for (std::size_t b = 0; b < batches; ++b) {
    for (Eigen::Index i = 0; i < m; ++i) {
      idx[static_cast<std::size_t>(i)] = static_cast<std::uint32_t>(rng.below(model.messages()));
      raw.row(i) = codebook.row(idx[static_cast<std::size_t>(i)]);
    }
    const Matrix tx = normalize_for_transmission(raw, model, mode);
    const ChannelDraw draw = sample_channel(kind, m, tx.cols(), sigma, burst_prob, rng);
    const Matrix logits = decoder_forward(draw.apply(tx), model);
    for (Eigen::Index i = 0; i < m; ++i) {
      if (decide_from_logits(logits.row(i), 0.0).symbol != idx[static_cast<std::size_t>(i)]) ++est.errors;
    }
    est.trials += batch_size;
  }
  est.rate = static_cast<double>(est.errors) / static_cast<double>(est.trials);
  est.half_width = clopper_pearson(est.errors, est.trials).half_width();
  return est;
}

struct TrainLogRow {
  std::size_t step = 0;  // 1-based global step at which the row was emitted
  double loss = 0.0;     // mean loss over the steps since the previous row
  std::optional<double> val_ser;
};

inline void write_train_log_header(std::ostream& os) { os << "step,loss,val_ser\n"; }

inline void write_train_log_row(std::ostream& os, const TrainLogRow& row) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%zu,%.17g,", row.step, row.loss);
  os << buf;
  if (row.val_ser) {
    std::snprintf(buf, sizeof buf, "%.17g", *row.val_ser);
    os << buf;
  }
  os << '\n';
}

struct TrainResult {
  NeuralCodeModel model;
  std::vector<TrainLogRow> log;
  std::size_t steps = 0;
  double first_window_loss = std::numeric_limits<double>::quiet_NaN();     // mean of the first 1000 step losses
  double trailing_window_loss = std::numeric_limits<double>::quiet_NaN();  // mean of the last 1000 step losses
};

// Thrown when a step produces a non-finite loss or gradient; carries the
// last model that passed validation (or the initial model).
class TrainingAborted : public NumericalFault {
 public:
  TrainingAborted(const std::string& what, NeuralCodeModel last_good, std::size_t step)
      : NumericalFault(what), last_good_(std::move(last_good)), step_(step) {}
  const NeuralCodeModel& last_good() const { return last_good_; }
  std::size_t step() const { return step_; }

 private:
  NeuralCodeModel last_good_;
  std::size_t step_;
};

inline constexpr std::size_t kLossWindow = 1000;
inline constexpr double kPowerTolerance = 1e-6;

inline bool satisfies_power_constraint(const Matrix& x, double tol = kPowerTolerance) {
  const double m = static_cast<double>(x.rows());
  const Eigen::RowVectorXd mean = x.colwise().sum() / m;
  const Eigen::RowVectorXd var = (x.rowwise() - mean).array().square().colwise().sum().matrix() / m;
  return (mean.array().abs() < tol).all() && ((var.array() - 1.0).abs() <= tol).all();
}

// Codebook statistics under uniformly distributed symbols.
inline BatchStats codebook_stats(const NeuralCodeModel& model) { return normalize_power(encoder_codebook(model)).stats; }

using TrainRowCallback = std::function<void(const TrainLogRow&)>;

inline TrainResult train_inner(const TrainConfig& config, const TrainRowCallback& on_row = {}) {
  config.validate();
  RandomStream init_rng(config.seed, {static_cast<std::uint64_t>(StreamTag::kInit)});
  TrainResult result;
  result.model = NeuralCodeModel::initialized(config.k1, config.n1, init_rng);
  NeuralCodeModel& model = result.model;
  NeuralCodeModel last_good = model;

  Nadam optimizer(NadamConfig{.learning_rate = config.learning_rate});
  RandomStream batch_rng(config.seed, {static_cast<std::uint64_t>(StreamTag::kTrainBatch)});
  const double sigma = config.sigma();
  const std::size_t m = config.batch_size;
  const std::size_t total = config.total_steps();

  std::vector<std::uint32_t> idx(m);
  ModelGradients grads;
  NormalizedBatch tx;
  std::vector<double> trailing(kLossWindow, 0.0);
  double first_sum = 0.0;
  double row_sum = 0.0;
  std::size_t row_count = 0;

  auto emit = [&](TrainLogRow row) {
    if (on_row) on_row(row);
    result.log.push_back(std::move(row));
  };

  for (std::size_t step = 1; step <= total; ++step) {
    for (auto& j : idx) j = static_cast<std::uint32_t>(batch_rng.below(model.messages()));
    const ChannelDraw draw =
        sample_channel(config.channel, static_cast<Eigen::Index>(m), config.n1, sigma, config.burst_prob, batch_rng);
    double loss = 0.0;
    try {
      loss = autoencoder_loss_and_gradients(model, idx, draw, grads, &tx);
      if (!std::isfinite(loss)) throw NumericalFault("non-finite loss");
      if (!satisfies_power_constraint(tx.x)) throw NumericalFault("normalized batch violates the power constraint");
      optimizer.step(model, grads);
      if (!model.finite()) throw NumericalFault("non-finite parameters after update");
    } catch (const NumericalFault& e) {
      throw TrainingAborted(std::string("training aborted at step ") + std::to_string(step) + ": " + e.what(),
                            last_good, step);
    } catch (const DegenerateBatch& e) {
      throw TrainingAborted(std::string("training aborted at step ") + std::to_string(step) + ": " + e.what(),
                            last_good, step);
    }

    if (step <= kLossWindow) first_sum += loss;
    trailing[(step - 1) % kLossWindow] = loss;
    row_sum += loss;
    ++row_count;

    const bool eval_now = config.eval_every > 0 && step % config.eval_every == 0;
    const bool log_now = (config.log_every > 0 && step % config.log_every == 0) || eval_now || step == total;
    if (log_now) {
      TrainLogRow row{step, row_sum / static_cast<double>(row_count), std::nullopt};
      if (eval_now) {
        RandomStream val_rng(config.seed, {static_cast<std::uint64_t>(StreamTag::kValidation), step});
        row.val_ser = estimate_symbol_error_rate(model, config.channel, config.burst_prob, sigma, config.eval_trials, m,
                                                 val_rng)
                          .rate;
        last_good = model;
      }
      emit(std::move(row));
      row_sum = 0.0;
      row_count = 0;
    }
  }

  result.steps = total;
  if (total > 0) {
    const std::size_t w = std::min(total, kLossWindow);
    result.first_window_loss = first_sum / static_cast<double>(w);
    double s = 0.0;
    for (std::size_t i = 0; i < w; ++i) s += trailing[(total - 1 - i) % kLossWindow];
    result.trailing_window_loss = s / static_cast<double>(w);
  }
  model.frozen_stats = codebook_stats(model);
  return result;
}

}  // namespace ccn
