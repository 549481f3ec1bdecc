#pragma once

// Finite-blocklength normal approximation
//   eps ~ Q((n C - n R + log2(n) / 2) / sqrt(n V))
// for the binary-input AWGN channel (C, V by Gauss-Hermite quadrature) and
// the real Gaussian-input AWGN channel (closed forms). SNR = 1 / sigma^2
// with sigma from Eb/N0 at rate R, unit-energy +-1 signalling.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "ccn/channels.hpp"
#include "ccn/errors.hpp"

namespace ccn {

enum class NaChannel { BiAwgn, RealAwgn };

inline std::string to_string(NaChannel c) { return c == NaChannel::BiAwgn ? "biawgn" : "awgn"; }

inline NaChannel parse_na_channel(const std::string& s) {
  if (s == "biawgn") return NaChannel::BiAwgn;
  if (s == "awgn") return NaChannel::RealAwgn;
  throw InvalidInput("unknown normal-approximation channel '" + s + "' (expected biawgn or awgn)");
}

struct CapacityDispersion {
  double capacity = 0.0;    // bits per channel use
  double dispersion = 0.0;  // bits^2 per channel use
};

struct GaussHermiteRule {
  std::vector<double> nodes;
  std::vector<double> weights;  // for weight function exp(-x^2)
};

// Golub-Welsch: nodes are eigenvalues of the symmetric Jacobi matrix,
// weights sqrt(pi) times the squared first eigenvector components.
inline GaussHermiteRule gauss_hermite(std::size_t n) {
  if (n == 0) throw InvalidInput("gauss_hermite: need at least one node");
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  Eigen::VectorXd sub(static_cast<Eigen::Index>(n > 1 ? n - 1 : 0));
  for (Eigen::Index i = 0; i < sub.size(); ++i) sub(i) = std::sqrt(static_cast<double>(i + 1) / 2.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  GaussHermiteRule rule;
  const double sqrt_pi = std::sqrt(std::acos(-1.0));
  for (std::size_t i = 0; i < n; ++i) {
    const auto j = static_cast<Eigen::Index>(i);
    rule.nodes.push_back(solver.eigenvalues()(j));
    const double v = solver.eigenvectors()(0, j);
    rule.weights.push_back(sqrt_pi * v * v);
  }
  return rule;
}

inline const GaussHermiteRule& default_gauss_hermite() {
  static const GaussHermiteRule rule = gauss_hermite(200);
  return rule;
}

// Information density of the BI-AWGN channel given x = +1 was sent:
//   i(y) = 1 - log2(1 + exp(-2 y / sigma^2)).
inline double biawgn_information_density(double y, double sigma2) {
  const double a = -2.0 * y / sigma2;
  const double softplus = a > 0.0 ? a + std::log1p(std::exp(-a)) : std::log1p(std::exp(a));
  return 1.0 - softplus / std::log(2.0);
}

inline CapacityDispersion biawgn_capacity_dispersion(double snr, const GaussHermiteRule& rule = default_gauss_hermite()) {
  if (!(snr > 0.0)) throw InvalidInput("biawgn_capacity_dispersion: SNR must be positive");
  const double sigma2 = 1.0 / snr;
  const double sigma = std::sqrt(sigma2);
  const double norm = 1.0 / std::sqrt(std::acos(-1.0));
  double m1 = 0.0;
  double m2 = 0.0;
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
    const double y = 1.0 + std::sqrt(2.0) * sigma * rule.nodes[k];
    const double i = biawgn_information_density(y, sigma2);
    m1 += rule.weights[k] * i;
    m2 += rule.weights[k] * i * i;
  }
  m1 *= norm;
  m2 *= norm;
  return {m1, std::max(0.0, m2 - m1 * m1)};
}

inline CapacityDispersion awgn_capacity_dispersion(double snr) {
  if (!(snr > 0.0)) throw InvalidInput("awgn_capacity_dispersion: SNR must be positive");
  const double log2e = 1.0 / std::log(2.0);
  return {0.5 * std::log2(1.0 + snr), snr * (snr + 2.0) / (2.0 * (snr + 1.0) * (snr + 1.0)) * log2e * log2e};
}

inline CapacityDispersion capacity_dispersion(NaChannel channel, double snr) {
  return channel == NaChannel::BiAwgn ? biawgn_capacity_dispersion(snr) : awgn_capacity_dispersion(snr);
}

struct NaResult {
  double epsilon = 1.0;
  bool reliable = false;  // R < C; otherwise epsilon is clamped to at least 0.5
  CapacityDispersion cv;
};

inline double q_function(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

inline NaResult normal_approximation(std::size_t n, double rate, NaChannel channel, double ebn0_db) {
  if (n == 0) throw InvalidInput("normal_approximation: blocklength must be positive");
  const double sigma = ebn0_to_sigma(ebn0_db, rate);
  NaResult r;
  r.cv = capacity_dispersion(channel, 1.0 / (sigma * sigma));
  const double nd = static_cast<double>(n);
  const double num = nd * (r.cv.capacity - rate) + 0.5 * std::log2(nd);
  const double den = std::sqrt(nd * r.cv.dispersion);
  r.epsilon = den > 0.0 ? q_function(num / den) : (num > 0.0 ? 0.0 : 1.0);
  r.reliable = rate < r.cv.capacity;
  if (!r.reliable) r.epsilon = std::max(r.epsilon, 0.5);
  return r;
}

// Smallest Eb/N0 (dB) at which the approximation reaches `target`; the
// approximation is decreasing in Eb/N0, so bisection on [lo, hi].
inline double normal_approximation_ebn0(std::size_t n, double rate, NaChannel channel, double target,
                                        double lo = -10.0, double hi = 30.0) {
  if (!(target > 0.0 && target < 0.5)) throw InvalidInput("normal_approximation_ebn0: target must lie in (0, 0.5)");
  if (normal_approximation(n, rate, channel, hi).epsilon > target) throw NumericalFault("target not reached below upper bound");
  for (int it = 0; it < 200 && hi - lo > 1e-10; ++it) {
    const double mid = 0.5 * (lo + hi);
    (normal_approximation(n, rate, channel, mid).epsilon > target ? lo : hi) = mid;
  }
  return hi;
}

}  // namespace ccn
