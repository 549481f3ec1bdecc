#pragma once

// Monte Carlo BLER/BER sweeps over an Eb/N0 grid.
//
// Work is cut into units with their own random stream keyed by
// (seed, point, unit). A CCN unit is a fixed number of interleaver blocks,
// a reference unit a fixed number of autoencoder batches. Units are run in
// rounds of fixed size and merged in unit order, so the worker count never
// changes the output. Stopping is checked between rounds against the first
// threshold's counts.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <functional>
#include <optional>
#include <istream>
#include <ostream>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "ccn/ccn_codec.hpp"
#include "ccn/channels.hpp"
#include "ccn/errors.hpp"
#include "ccn/neural_net.hpp"
#include "ccn/rng.hpp"
#include "ccn/stats.hpp"

namespace ccn {

struct SweepConfig {
  // Concatenated code under test, or a stand-alone autoencoder.
  std::variant<NeuralCodeModel, CcnCode> code;
  std::vector<double> thresholds{0.0};  // CCN only; one curve per threshold
  ChannelKind channel = ChannelKind::Awgn;
  double burst_prob = 0.1;
  std::vector<double> ebn0_grid_db;
  std::uint64_t min_block_errors = 100;
  std::uint64_t max_blocks = 1'000'000;
  std::uint64_t seed = 1;
  // >1 sends each encoded interleaver block through this many noise draws.
  std::size_t noise_draws_per_block = 1;
  std::size_t reference_batch = 15;  // normalization batch of the stand-alone autoencoder
  NormalizationMode reference_normalization = NormalizationMode::PerBatch;
  // Skip the rest of the grid once a point's BLER falls below this (0 = off).
  double stop_below_bler = 0.0;
  std::size_t workers = 0;  // 0: CCN_WORKERS, else hardware concurrency

  bool is_ccn() const { return std::holds_alternative<CcnCode>(code); }

  double rate() const {
    if (is_ccn()) return std::get<CcnCode>(code).dims().rate;
    const auto& m = std::get<NeuralCodeModel>(code);
    return static_cast<double>(m.k1) / static_cast<double>(m.n1);
  }

  void validate() const {
    if (ebn0_grid_db.empty()) throw InvalidInput("SweepConfig: empty Eb/N0 grid");
    for (std::size_t i = 1; i < ebn0_grid_db.size(); ++i)
      if (!(ebn0_grid_db[i] > ebn0_grid_db[i - 1])) throw InvalidInput("SweepConfig: Eb/N0 grid must be strictly increasing");
    if (min_block_errors < 1) throw InvalidInput("SweepConfig: min_block_errors must be at least 1");
    if (max_blocks < 1) throw InvalidInput("SweepConfig: max_blocks must be at least 1");
    if (noise_draws_per_block < 1) throw InvalidInput("SweepConfig: noise_draws_per_block must be at least 1");
    if (!(burst_prob >= 0.0 && burst_prob <= 1.0)) throw InvalidInput("SweepConfig: burst_prob must lie in [0, 1]");
    if (thresholds.empty()) throw InvalidInput("SweepConfig: need at least one threshold");
    for (double t : thresholds)
      if (!(t >= 0.0 && t < 1.0)) throw InvalidInput("SweepConfig: thresholds must lie in [0, 1)");
    if (!is_ccn()) {
      std::get<NeuralCodeModel>(code).validate();
      if (thresholds.size() != 1 || thresholds[0] != 0.0)
        throw InvalidInput("SweepConfig: the stand-alone autoencoder is decoded by argmax only (threshold 0)");
      if (reference_batch < 2) throw InvalidInput("SweepConfig: reference_batch must be at least 2");
    }
  }
};

struct CurvePoint {
  double ebn0_db = 0.0;
  double bler = 0.0;
  double ber = 0.0;
  std::uint64_t blocks = 0;
  std::uint64_t block_errors = 0;
  std::uint64_t bit_errors = 0;
  double bler_ci_lo = 0.0;
  double bler_ci_hi = 1.0;

  double ci_half_width() const { return 0.5 * (bler_ci_hi - bler_ci_lo); }
};

using Curve = std::vector<CurvePoint>;

struct SweepResult {
  std::vector<double> thresholds;
  std::vector<Curve> curves;  // parallel to thresholds
};

struct ErrorCounts {
  std::uint64_t blocks = 0;
  std::uint64_t block_errors = 0;
  std::uint64_t bit_errors = 0;

  ErrorCounts& operator+=(const ErrorCounts& o) {
    blocks += o.blocks;
    block_errors += o.block_errors;
    bit_errors += o.bit_errors;
    return *this;
  }
};

inline CurvePoint make_curve_point(double ebn0_db, const ErrorCounts& c, std::uint64_t bits_per_block) {
  CurvePoint p;
  p.ebn0_db = ebn0_db;
  p.blocks = c.blocks;
  p.block_errors = c.block_errors;
  p.bit_errors = c.bit_errors;
  if (c.blocks > 0) {
    p.bler = static_cast<double>(c.block_errors) / static_cast<double>(c.blocks);
    p.ber = static_cast<double>(c.bit_errors) / (static_cast<double>(c.blocks) * static_cast<double>(bits_per_block));
  }
  const BinomialInterval ci = clopper_pearson(c.block_errors, c.blocks);
  p.bler_ci_lo = ci.lo;
  p.bler_ci_hi = ci.hi;
  return p;
}

inline constexpr std::size_t kRoundUnits = 8;
inline constexpr std::size_t kCcnUnitSymbols = 4096;  // a CCN unit spans at least this many inner symbols
inline constexpr std::size_t kReferenceUnitBatches = 64;

inline std::size_t resolve_workers(std::size_t requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("CCN_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
    throw ConfigError(std::string("CCN_WORKERS must be a positive integer, got '") + env + "'");
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

inline std::size_t ccn_blocks_per_unit(std::size_t n2) { return std::max<std::size_t>(1, kCcnUnitSymbols / (n2 * n2)); }

// One CCN unit: fresh messages per interleaver block, each block sent
// through `draws` noise realizations, all thresholds decoded from the
// same inner outputs.
inline std::vector<ErrorCounts> simulate_ccn_unit(const std::vector<CcnCode>& codes, ChannelKind kind, double burst_prob,
                                                  double sigma, std::size_t draws, RandomStream& rng) {
  const CcnCode& base = codes.front();
  const std::size_t n2 = base.n2();
  std::vector<ErrorCounts> counts(codes.size());
  std::vector<std::vector<std::uint8_t>> messages(n2, std::vector<std::uint8_t>(base.message_bits()));
  for (std::size_t b = 0; b < ccn_blocks_per_unit(n2); ++b) {
    for (auto& msg : messages)
      for (auto& bit : msg) bit = static_cast<std::uint8_t>(rng.next_u64() >> 63);
    const EncodedBlock enc = ccn_encode_block_full(messages, base);
    for (std::size_t d = 0; d < draws; ++d) {
      const ChannelDraw draw =
          sample_channel(kind, enc.channel_input.rows(), enc.channel_input.cols(), sigma, burst_prob, rng);
      const InnerSoftOutput soft = inner_decode(draw.apply(enc.channel_input), base.inner());
      for (std::size_t t = 0; t < codes.size(); ++t) {
        const auto reports = decode_symbol_stream(apply_threshold(soft, codes[t].threshold()), codes[t], enc.codewords);
        for (const auto& r : reports) {
          ++counts[t].blocks;
          if (!r.block_ok) ++counts[t].block_errors;
          counts[t].bit_errors += r.bit_errors;
        }
      }
    }
  }
  return counts;
}

// One reference unit: batches of uniform messages through the stand-alone
// autoencoder; a block is one k1-bit message.
inline ErrorCounts simulate_reference_unit(const NeuralCodeModel& model, const Matrix& codebook, std::size_t batch,
                                           NormalizationMode mode, ChannelKind kind, double burst_prob, double sigma,
                                           RandomStream& rng) {
  ErrorCounts c;
  const auto m = static_cast<Eigen::Index>(batch);
  std::vector<std::uint32_t> idx(batch);
  Matrix raw(m, codebook.cols());
  for (std::size_t b = 0; b < kReferenceUnitBatches; ++b) {
    for (Eigen::Index i = 0; i < m; ++i) {
      idx[static_cast<std::size_t>(i)] = static_cast<std::uint32_t>(rng.below(model.messages()));
      raw.row(i) = codebook.row(idx[static_cast<std::size_t>(i)]);
    }
    const Matrix tx = normalize_for_transmission(raw, model, mode);
    const ChannelDraw draw = sample_channel(kind, m, tx.cols(), sigma, burst_prob, rng);
    const Matrix logits = decoder_forward(draw.apply(tx), model);
    for (Eigen::Index i = 0; i < m; ++i) {
      const auto sent = idx[static_cast<std::size_t>(i)];
      const auto got = static_cast<std::uint32_t>(decide_from_logits(logits.row(i), 0.0).symbol);
      ++c.blocks;
      if (got != sent) {
        ++c.block_errors;
        c.bit_errors += static_cast<std::uint64_t>(std::popcount(got ^ sent));
      }
    }
  }
  return c;
}

using SweepProgress = std::function<void(std::size_t point_index, const CurvePoint& primary)>;

inline SweepResult run_sweep(const SweepConfig& config, const SweepProgress& progress = {}) {
  config.validate();
  const std::size_t workers = resolve_workers(config.workers);
  const double rate = config.rate();

  std::vector<CcnCode> codes;
  Matrix ref_codebook;
  std::uint64_t bits_per_block = 0;
  std::uint64_t blocks_per_unit = 0;
  if (config.is_ccn()) {
    const auto& code = std::get<CcnCode>(config.code);
    for (double t : config.thresholds) codes.push_back(code.with_threshold(t));
    bits_per_block = code.message_bits();
    blocks_per_unit = ccn_blocks_per_unit(code.n2()) * code.n2() * config.noise_draws_per_block;
  } else {
    const auto& model = std::get<NeuralCodeModel>(config.code);
    ref_codebook = encoder_codebook(model);
    bits_per_block = model.k1;
    blocks_per_unit = kReferenceUnitBatches * config.reference_batch;
  }
  const std::size_t curves = config.thresholds.size();

  SweepResult result;
  result.thresholds = config.thresholds;
  result.curves.resize(curves);

  for (std::size_t p = 0; p < config.ebn0_grid_db.size(); ++p) {
    const double ebn0 = config.ebn0_grid_db[p];
    const double sigma = ebn0_to_sigma(ebn0, rate);
    std::vector<ErrorCounts> totals(curves);

    auto run_unit = [&](std::uint64_t unit) {
      RandomStream rng(config.seed, {static_cast<std::uint64_t>(StreamTag::kSweepBlock), p, unit});
      if (config.is_ccn())
        return simulate_ccn_unit(codes, config.channel, config.burst_prob, sigma, config.noise_draws_per_block, rng);
      return std::vector<ErrorCounts>{simulate_reference_unit(std::get<NeuralCodeModel>(config.code), ref_codebook,
                                                              config.reference_batch, config.reference_normalization,
                                                              config.channel, config.burst_prob, sigma, rng)};
    };

    std::uint64_t next_unit = 0;
    while (totals[0].block_errors < config.min_block_errors && totals[0].blocks < config.max_blocks) {
      const std::uint64_t remaining = config.max_blocks - totals[0].blocks;
      const auto units =
          static_cast<std::size_t>(std::min<std::uint64_t>(kRoundUnits, (remaining + blocks_per_unit - 1) / blocks_per_unit));
      std::vector<std::vector<ErrorCounts>> round(units);
      const std::size_t pool = std::min(workers, units);
      if (pool <= 1) {
        for (std::size_t u = 0; u < units; ++u) round[u] = run_unit(next_unit + u);
      } else {
        std::vector<std::jthread> threads;
        std::vector<std::exception_ptr> failures(pool);
        for (std::size_t w = 0; w < pool; ++w) {
          threads.emplace_back([&, w] {
            try {
              for (std::size_t u = w; u < units; u += pool) round[u] = run_unit(next_unit + u);
            } catch (...) {
              failures[w] = std::current_exception();
            }
          });
        }
        threads.clear();
        for (const auto& f : failures)
          if (f) std::rethrow_exception(f);
      }
      for (const auto& r : round)
        for (std::size_t t = 0; t < curves; ++t) totals[t] += r[t];
      next_unit += units;
    }

    for (std::size_t t = 0; t < curves; ++t)
      result.curves[t].push_back(make_curve_point(ebn0, totals[t], bits_per_block));
    const CurvePoint& primary = result.curves[0].back();
    if (progress) progress(p, primary);
    if (config.stop_below_bler > 0.0 && primary.bler < config.stop_below_bler) break;
  }
  return result;
}

inline void write_curve_csv(std::ostream& os, const Curve& curve) {
  os << "ebn0_db,bler,ber,blocks,block_errors,bit_errors,bler_ci_lo,bler_ci_hi\n";
  char buf[256];
  for (const auto& p : curve) {
    std::snprintf(buf, sizeof buf, "%.10g,%.10g,%.10g,%llu,%llu,%llu,%.10g,%.10g\n", p.ebn0_db, p.bler, p.ber,
                  static_cast<unsigned long long>(p.blocks), static_cast<unsigned long long>(p.block_errors),
                  static_cast<unsigned long long>(p.bit_errors), p.bler_ci_lo, p.bler_ci_hi);
    os << buf;
  }
}

// Inverse of write_curve_csv.
inline Curve read_curve_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "ebn0_db,bler,ber,blocks,block_errors,bit_errors,bler_ci_lo,bler_ci_hi")
    throw InvalidInput("read_curve_csv: missing or unexpected header");
  Curve curve;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    CurvePoint p;
    unsigned long long blocks = 0, block_errors = 0, bit_errors = 0;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%llu,%llu,%llu,%lf,%lf", &p.ebn0_db, &p.bler, &p.ber, &blocks, &block_errors,
                    &bit_errors, &p.bler_ci_lo, &p.bler_ci_hi) != 8)
      throw InvalidInput("read_curve_csv: malformed row '" + line + "'");
    p.blocks = blocks;
    p.block_errors = block_errors;
    p.bit_errors = bit_errors;
    curve.push_back(p);
  }
  return curve;
}

// Eb/N0 at which the curve first crosses `target`, by linear interpolation
// of log10(BLER) between the bracketing points. Both bracketing points must
// have a nonzero BLER.
inline std::optional<double> ebn0_at_bler(const Curve& curve, double target) {
  if (!(target > 0.0)) throw InvalidInput("ebn0_at_bler: target must be positive");
  for (std::size_t i = 0; i < curve.size(); ++i) {
    const auto& b = curve[i];
    if (b.bler > target) continue;
    if (b.bler == target) return b.ebn0_db;
    if (i == 0 || b.bler <= 0.0) return std::nullopt;
    const auto& a = curve[i - 1];
    const double la = std::log10(a.bler);
    const double lb = std::log10(b.bler);
    return a.ebn0_db + (std::log10(target) - la) / (lb - la) * (b.ebn0_db - a.ebn0_db);
  }
  return std::nullopt;
}

}  // namespace ccn
