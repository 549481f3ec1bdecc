#pragma once

// Memoryless real channel models with unit-power inputs:
//   AWGN           y = x + n
//   Rayleigh fast  y = h x + n,     h ~ Rayleigh(scale 1/sqrt 2), E[h^2] = 1
//   Bursty         y = x + n + c d, c ~ N(0, 2 sigma^2), d ~ Bernoulli(p)
// with n ~ N(0, sigma^2). Eb/N0 is accounted with the overall code rate R:
// N0 = 1 / (R Eb/N0), sigma^2 = N0 / 2.
//
// Draw order per channel use (documented for reproducibility):
//   AWGN: n.  Rayleigh: two normals for h, then n.  Bursty: n, c, then d.

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "ccn/errors.hpp"
#include "ccn/rng.hpp"

namespace ccn {

enum class ChannelKind { Awgn, RayleighFast, Bursty };

inline std::string_view to_string(ChannelKind kind) {
  switch (kind) {
    case ChannelKind::Awgn: return "awgn";
    case ChannelKind::RayleighFast: return "rayleigh";
    case ChannelKind::Bursty: return "bursty";
  }
  return "?";
}

inline ChannelKind parse_channel_kind(std::string_view name) {
  if (name == "awgn") return ChannelKind::Awgn;
  if (name == "rayleigh") return ChannelKind::RayleighFast;
  if (name == "bursty") return ChannelKind::Bursty;
  throw InvalidInput("unknown channel kind '" + std::string(name) + "' (expected awgn, rayleigh or bursty)");
}

struct SnrSpec {
  double ebn0_db = 0.0;
  double rate = 1.0;

  double n0() const {
    if (!(rate > 0.0 && rate <= 1.0)) throw InvalidInput("SnrSpec: rate must lie in (0, 1]");
    return 1.0 / (rate * std::pow(10.0, ebn0_db / 10.0));
  }
  double sigma2() const { return n0() / 2.0; }
  double sigma() const { return std::sqrt(sigma2()); }
};

inline double ebn0_to_sigma(double ebn0_db, double rate) {
  if (!(rate > 0.0 && rate <= 1.0)) throw InvalidInput("ebn0_to_sigma: rate must lie in (0, 1]");
  return std::sqrt(1.0 / (2.0 * rate * std::pow(10.0, ebn0_db / 10.0)));
}

struct ChannelSpec {
  ChannelKind kind = ChannelKind::Awgn;
  double burst_prob = 0.1;  // Bursty only
  SnrSpec snr;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(burst_prob >= 0.0 && burst_prob <= 1.0)) throw InvalidInput("ChannelSpec: burst_prob must lie in [0, 1]");
  }
};

// One realization of a channel over a batch: y = gain .* x + noise. `gain` is
// empty for channels with unit gain. Holding the realization fixed makes the
// channel a differentiable node (dy/dx = gain).
struct ChannelDraw {
  Eigen::MatrixXd gain;
  Eigen::MatrixXd noise;

  bool unit_gain() const { return gain.size() == 0; }

  Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const {
    if (unit_gain()) return x + noise;
    return gain.cwiseProduct(x) + noise;
  }
};

// Rayleigh amplitude with E[h^2] = 1.
inline double rayleigh_gain(RandomStream& rng) {
  const double a = rng.normal();
  const double b = rng.normal();
  return std::sqrt(0.5 * (a * a + b * b));
}

// Samples a realization for a rows x cols batch, iterating row-major.
inline ChannelDraw sample_channel(ChannelKind kind, Eigen::Index rows, Eigen::Index cols, double sigma,
                                  double burst_prob, RandomStream& rng) {
  ChannelDraw d;
  d.noise.resize(rows, cols);
  if (kind == ChannelKind::RayleighFast) d.gain.resize(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      switch (kind) {
        case ChannelKind::Awgn:
          d.noise(i, j) = sigma * rng.normal();
          break;
        case ChannelKind::RayleighFast:
          d.gain(i, j) = rayleigh_gain(rng);
          d.noise(i, j) = sigma * rng.normal();
          break;
        case ChannelKind::Bursty: {
          const double n = sigma * rng.normal();
          const double c = std::sqrt(2.0) * sigma * rng.normal();
          const bool hit = rng.bernoulli(burst_prob);
          d.noise(i, j) = n + (hit ? c : 0.0);
          break;
        }
      }
    }
  }
  return d;
}

inline std::vector<double> apply_awgn(std::span<const double> x, double sigma, RandomStream& rng) {
  std::vector<double> y(x.begin(), x.end());
  for (double& v : y) v += sigma * rng.normal();
  return y;
}

inline std::vector<double> apply_rayleigh(std::span<const double> x, double sigma, RandomStream& rng) {
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double h = rayleigh_gain(rng);
    y[i] = h * x[i] + sigma * rng.normal();
  }
  return y;
}

inline std::vector<double> apply_bursty(std::span<const double> x, double sigma, double p, RandomStream& rng) {
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidInput("apply_bursty: p must lie in [0, 1]");
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double n = sigma * rng.normal();
    const double c = std::sqrt(2.0) * sigma * rng.normal();
    const bool hit = rng.bernoulli(p);
    y[i] = x[i] + n + (hit ? c : 0.0);
  }
  return y;
}

inline std::vector<double> apply_channel(const ChannelSpec& spec, std::span<const double> x, RandomStream& rng) {
  spec.validate();
  const double sigma = spec.snr.sigma();
  switch (spec.kind) {
    case ChannelKind::Awgn: return apply_awgn(x, sigma, rng);
    case ChannelKind::RayleighFast: return apply_rayleigh(x, sigma, rng);
    case ChannelKind::Bursty: return apply_bursty(x, sigma, spec.burst_prob, rng);
  }
  return {};
}

}  // namespace ccn
