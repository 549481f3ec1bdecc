#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "ccn/channels.hpp"
#include "ccn/rng.hpp"

namespace {

using ccn::ChannelKind;
using ccn::RandomStream;

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Kolmogorov-Smirnov statistic against a standard normal.
double ks_statistic(std::vector<double> x) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = normal_cdf(x[i]);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  return d;
}

TEST(Rng, SameKeySameSequenceDifferentPathsDiffer) {
  RandomStream a(42, {4, 0, 7});
  RandomStream b(42, {4, 0, 7});
  RandomStream c(42, {4, 0, 8});
  RandomStream d(43, {4, 0, 7});
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    EXPECT_EQ(x, b.next_u64());
    EXPECT_NE(x, c.next_u64());
    EXPECT_NE(x, d.next_u64());
  }
  EXPECT_NE(ccn::derive_key(1, {1, 2}), ccn::derive_key(1, {2, 1}));
}

TEST(Rng, UniformBelowIsUnbiasedAndInRange) {
  RandomStream r(7, {});
  std::vector<int> counts(7, 0);
  const int n = 70000;
  for (int i = 0; i < n; ++i) {
    const auto v = r.below(7);
    ASSERT_LT(v, 7u);
    ++counts[v];
  }
  // Chi-square with 6 dof; 22.46 is the 0.999 quantile.
  double chi2 = 0.0;
  for (int c : counts) chi2 += (c - n / 7.0) * (c - n / 7.0) / (n / 7.0);
  EXPECT_LT(chi2, 22.46);
  for (int i = 0; i < 1000; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(Rng, GaussianPassesKolmogorovSmirnov) {
  RandomStream r(2024, {static_cast<std::uint64_t>(ccn::StreamTag::kSelfTest)});
  std::vector<double> x(20000);
  for (auto& v : x) v = r.normal();
  // 1.63 / sqrt(n) is the 1% critical value.
  EXPECT_LT(ks_statistic(x), 1.63 / std::sqrt(static_cast<double>(x.size())));
}

TEST(Channels, EbN0ToSigma) {
  // Eb/N0 = 0 dB at R = 1/2: N0 = 1, sigma^2 = 1/2 * 1/(2R) ... = 1.
  EXPECT_NEAR(ccn::ebn0_to_sigma(0.0, 0.5), 1.0, 1e-15);
  EXPECT_NEAR(ccn::ebn0_to_sigma(10.0, 1.0), std::sqrt(1.0 / 20.0), 1e-15);
  const double r = 1784.0 / 3060.0;
  EXPECT_NEAR(ccn::ebn0_to_sigma(5.0, r), std::sqrt(1.0 / (2.0 * r * std::pow(10.0, 0.5))), 1e-15);
  EXPECT_THROW(ccn::ebn0_to_sigma(3.0, 0.0), ccn::InvalidInput);
  EXPECT_THROW(ccn::ebn0_to_sigma(3.0, 1.5), ccn::InvalidInput);
}

struct Moments {
  double mean = 0.0;
  double var = 0.0;
};

Moments moments(const std::vector<double>& x) {
  Moments m;
  for (double v : x) m.mean += v;
  m.mean /= static_cast<double>(x.size());
  for (double v : x) m.var += (v - m.mean) * (v - m.mean);
  m.var /= static_cast<double>(x.size());
  return m;
}

TEST(Channels, AwgnNoiseMoments) {
  RandomStream r(1, {});
  const double sigma = 0.7;
  const std::vector<double> x(200000, 0.0);
  const auto y = ccn::apply_awgn(x, sigma, r);
  const auto m = moments(y);
  EXPECT_NEAR(m.mean, 0.0, 5.0 * sigma / std::sqrt(2e5));
  EXPECT_NEAR(m.var, sigma * sigma, 0.01 * sigma * sigma);
  std::vector<double> z(y.begin(), y.begin() + 20000);
  for (auto& v : z) v /= sigma;
  EXPECT_LT(ks_statistic(z), 1.63 / std::sqrt(20000.0));
}

TEST(Channels, RayleighGainMoments) {
  RandomStream r(2, {});
  double s1 = 0.0, s2 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double h = ccn::rayleigh_gain(r);
    ASSERT_GE(h, 0.0);
    s1 += h;
    s2 += h * h;
  }
  EXPECT_NEAR(s2 / n, 1.0, 0.01);
  EXPECT_NEAR(s1 / n, std::sqrt(std::acos(-1.0)) / 2.0, 0.005);
}

TEST(Channels, RayleighOutputIsFadedSignalPlusNoise) {
  RandomStream r(3, {});
  const std::vector<double> x(100000, 1.0);
  const auto y = ccn::apply_rayleigh(x, 0.5, r);
  const auto m = moments(y);
  EXPECT_NEAR(m.mean, std::sqrt(std::acos(-1.0)) / 2.0, 0.01);
  // Var = Var(h) + sigma^2 = 1 - pi/4 + 0.25.
  EXPECT_NEAR(m.var, 1.0 - std::acos(-1.0) / 4.0 + 0.25, 0.01);
}

TEST(Channels, BurstyNoiseVariance) {
  RandomStream r(4, {});
  const double sigma = 0.5, p = 0.1;
  const std::vector<double> x(300000, 0.0);
  const auto y = ccn::apply_bursty(x, sigma, p, r);
  const auto m = moments(y);
  EXPECT_NEAR(m.var, sigma * sigma * (1.0 + 2.0 * p), 0.02 * sigma * sigma);
  // p = 0 reduces to AWGN.
  RandomStream r2(4, {});
  const auto y0 = ccn::apply_bursty(x, sigma, 0.0, r2);
  EXPECT_NEAR(moments(y0).var, sigma * sigma, 0.01 * sigma * sigma);
  EXPECT_THROW(ccn::apply_bursty(x, sigma, 1.5, r2), ccn::InvalidInput);
}

TEST(Channels, BatchSamplerMatchesElementwiseFunctions) {
  const Eigen::Index rows = 5, cols = 3;
  const std::vector<double> flat(15, 0.25);
  Eigen::MatrixXd x = Eigen::MatrixXd::Constant(rows, cols, 0.25);
  for (ChannelKind kind : {ChannelKind::Awgn, ChannelKind::RayleighFast, ChannelKind::Bursty}) {
    RandomStream a(9, {1}), b(9, {1});
    const auto draw = ccn::sample_channel(kind, rows, cols, 0.3, 0.2, a);
    const Eigen::MatrixXd y = draw.apply(x);
    std::vector<double> want;
    switch (kind) {
      case ChannelKind::Awgn: want = ccn::apply_awgn(flat, 0.3, b); break;
      case ChannelKind::RayleighFast: want = ccn::apply_rayleigh(flat, 0.3, b); break;
      case ChannelKind::Bursty: want = ccn::apply_bursty(flat, 0.3, 0.2, b); break;
    }
    for (Eigen::Index i = 0; i < rows; ++i)
      // Same draws; only FMA contraction may differ.
      for (Eigen::Index j = 0; j < cols; ++j) EXPECT_NEAR(y(i, j), want[static_cast<std::size_t>(i * cols + j)], 1e-14);
  }
}

TEST(Channels, ApplyChannelIsDeterministicPerSeed) {
  ccn::ChannelSpec spec;
  spec.kind = ChannelKind::Bursty;
  spec.snr = {3.0, 0.5};
  const std::vector<double> x{1.0, -1.0, 0.5, 0.0};
  RandomStream a(5, {}), b(5, {}), c(6, {});
  const auto ya = ccn::apply_channel(spec, x, a);
  EXPECT_EQ(ya, ccn::apply_channel(spec, x, b));
  EXPECT_NE(ya, ccn::apply_channel(spec, x, c));
}

TEST(Channels, NamesRoundTrip) {
  for (ChannelKind k : {ChannelKind::Awgn, ChannelKind::RayleighFast, ChannelKind::Bursty})
    EXPECT_EQ(ccn::parse_channel_kind(ccn::to_string(k)), k);
  EXPECT_THROW(ccn::parse_channel_kind("rician"), ccn::InvalidInput);
}

}  // namespace
