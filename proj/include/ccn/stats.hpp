#pragma once

#include <cstdint>

#include <boost/math/special_functions/beta.hpp>

#include "ccn/errors.hpp"

namespace ccn {

struct BinomialInterval {
  double lo = 0.0;
  double hi = 1.0;

  double half_width() const { return 0.5 * (hi - lo); }
  bool contains(double p) const { return lo <= p && p <= hi; }
};

// Exact (Clopper-Pearson) interval for k successes in n trials.
inline BinomialInterval clopper_pearson(std::uint64_t k, std::uint64_t n, double confidence = 0.95) {
  if (n == 0) return {0.0, 1.0};
  if (k > n) throw InvalidInput("clopper_pearson: k > n");
  const double alpha = 1.0 - confidence;
  const auto kd = static_cast<double>(k);
  const auto nd = static_cast<double>(n);
  BinomialInterval ci;
  ci.lo = k == 0 ? 0.0 : boost::math::ibeta_inv(kd, nd - kd + 1.0, alpha / 2.0);
  ci.hi = k == n ? 1.0 : boost::math::ibeta_inv(kd + 1.0, nd - kd, 1.0 - alpha / 2.0);
  return ci;
}

}  // namespace ccn
