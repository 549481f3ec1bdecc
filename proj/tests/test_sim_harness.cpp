#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "ccn/normal_approx.hpp"
#include "ccn/sim_harness.hpp"
#include "ccn/trainer.hpp"
#include "support/oracles.hpp"

namespace {

using ccn::CcnCode;
using ccn::GfField;
using ccn::NeuralCodeModel;
using ccn::RsCode;
using ccn::SweepConfig;

NeuralCodeModel random_model(unsigned k1, unsigned n1, std::uint64_t seed) {
  ccn::RandomStream rng(seed, {});
  return NeuralCodeModel::initialized(k1, n1, rng);
}

const NeuralCodeModel& small_trained() {
  static const NeuralCodeModel model = [] {
    ccn::TrainConfig c = ccn::TrainConfig::reference_ae();
    c.samples_per_epoch = 15 * 4000;
    c.epochs = 1;
    c.seed = 31;
    c.eval_every = 0;
    return ccn::train_inner(c).model;
  }();
  return model;
}

std::string csv_of(const ccn::Curve& c) {
  std::ostringstream os;
  ccn::write_curve_csv(os, c);
  return os.str();
}

SweepConfig small_ccn_sweep() {
  SweepConfig s;
  s.code = CcnCode(RsCode(GfField::gf16(), 11), small_trained());
  s.thresholds = {0.0, 0.5};
  s.ebn0_grid_db = {0.0, 2.0, 4.0};
  s.min_block_errors = 50;
  s.max_blocks = 20000;
  s.seed = 5;
  return s;
}

TEST(SimHarness, ClopperPearsonCoversAtTheNominalRate) {
  ccn::RandomStream rng(1, {});
  const double q = 0.05;
  int covered = 0;
  for (int rep = 0; rep < 100; ++rep) {
    std::uint64_t k = 0;
    for (int i = 0; i < 2000; ++i) k += rng.bernoulli(q);
    covered += ccn::clopper_pearson(k, 2000).contains(q);
  }
  // The exact interval is conservative; 90 leaves room for binomial spread around 95+.
  EXPECT_GE(covered, 90);
  const auto zero = ccn::clopper_pearson(0, 100);
  EXPECT_EQ(zero.lo, 0.0);
  EXPECT_NEAR(zero.hi, 1.0 - std::pow(0.025, 0.01), 1e-12);
  const auto all = ccn::clopper_pearson(100, 100);
  EXPECT_EQ(all.hi, 1.0);
  EXPECT_NEAR(all.lo, std::pow(0.025, 0.01), 1e-12);
}

TEST(SimHarness, ConfigValidation) {
  SweepConfig s = small_ccn_sweep();
  s.ebn0_grid_db = {1.0, 1.0};
  EXPECT_THROW(s.validate(), ccn::InvalidInput);
  s = small_ccn_sweep();
  s.min_block_errors = 0;
  EXPECT_THROW(s.validate(), ccn::InvalidInput);
  s = small_ccn_sweep();
  s.thresholds = {1.0};
  EXPECT_THROW(s.validate(), ccn::InvalidInput);
  s.code = small_trained();
  s.thresholds = {0.5};
  EXPECT_THROW(s.validate(), ccn::InvalidInput);
}

TEST(SimHarness, CurvesAreConsistentAndMonotone) {
  const auto r = ccn::run_sweep(small_ccn_sweep());
  ASSERT_EQ(r.curves.size(), 2u);
  for (const auto& curve : r.curves) {
    ASSERT_EQ(curve.size(), 3u);
    for (const auto& p : curve) {
      EXPECT_DOUBLE_EQ(p.bler, static_cast<double>(p.block_errors) / static_cast<double>(p.blocks));
      EXPECT_LE(p.ber, p.bler);
      EXPECT_LE(p.bler_ci_lo, p.bler);
      EXPECT_GE(p.bler_ci_hi, p.bler);
      EXPECT_EQ(p.blocks % 15, 0u);
    }
    for (std::size_t i = 1; i < curve.size(); ++i) EXPECT_LE(curve[i].bler_ci_lo, curve[i - 1].bler_ci_hi);
  }
  // Both thresholds see the same blocks.
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(r.curves[0][i].blocks, r.curves[1][i].blocks);
    EXPECT_LE(r.curves[1][i].bler, r.curves[0][i].bler + 2 * r.curves[0][i].ci_half_width());
  }
  EXPECT_GE(r.curves[0][0].block_errors, 50u);
}

TEST(SimHarness, CsvReadsBackExactly) {
  const auto r = ccn::run_sweep(small_ccn_sweep());
  const std::string text = csv_of(r.curves[1]);
  std::istringstream is(text);
  EXPECT_EQ(csv_of(ccn::read_curve_csv(is)), text);
  std::istringstream bad("ebn0_db,bler\n1,2\n");
  EXPECT_THROW(ccn::read_curve_csv(bad), ccn::InvalidInput);
}

TEST(SimHarness, OutputIsByteIdenticalForAnyWorkerCount) {
  SweepConfig s = small_ccn_sweep();
  s.workers = 1;
  const std::string one = csv_of(ccn::run_sweep(s).curves[0]);
  s.workers = 3;
  const std::string three = csv_of(ccn::run_sweep(s).curves[0]);
  EXPECT_EQ(one, three);
  s.seed = 6;
  EXPECT_NE(one, csv_of(ccn::run_sweep(s).curves[0]));
  EXPECT_EQ(one.rfind("ebn0_db,bler,ber,blocks,block_errors,bit_errors,bler_ci_lo,bler_ci_hi\n", 0), 0u);
}

TEST(SimHarness, NoiselessPointOfAPerfectModelIsErrorFree) {
  SweepConfig s;
  s.code = CcnCode(RsCode(GfField::gf16(), 11), small_trained());
  s.ebn0_grid_db = {200.0};
  s.max_blocks = 3000;
  const auto p = ccn::run_sweep(s).curves[0][0];
  EXPECT_EQ(p.block_errors, 0u);
  EXPECT_EQ(p.bler, 0.0);
  EXPECT_EQ(p.ber, 0.0);
  EXPECT_GE(p.blocks, 3000u);
}

TEST(SimHarness, UntrainedLargeModelIsAtChanceLevel) {
  SweepConfig s;
  s.code = CcnCode(RsCode(GfField::gf256(), 223), random_model(8, 12, 2));
  s.ebn0_grid_db = {0.0};
  s.min_block_errors = 1;
  s.max_blocks = 255;
  const auto p = ccn::run_sweep(s).curves[0][0];
  EXPECT_EQ(p.blocks, 255u);
  EXPECT_EQ(p.block_errors, 255u);
  EXPECT_GT(p.ber, 0.3);
}

TEST(SimHarness, ReferenceSweepAndEarlyStop) {
  SweepConfig s;
  s.code = small_trained();
  s.ebn0_grid_db = {0.0, 4.0, 8.0, 12.0};
  s.min_block_errors = 100;
  s.max_blocks = 200000;
  s.stop_below_bler = 0.05;
  const auto curve = ccn::run_sweep(s).curves[0];
  ASSERT_GE(curve.size(), 2u);
  EXPECT_LT(curve.back().bler, 0.05);
  EXPECT_LT(curve.size(), 4u);
  for (const auto& p : curve) EXPECT_LE(p.ber, p.bler);
  EXPECT_EQ(csv_of(curve), csv_of(ccn::run_sweep(s).curves[0]));
}

TEST(SimHarness, CrossingInterpolationIsLogLinear) {
  ccn::Curve c(3);
  c[0].ebn0_db = 1.0;
  c[0].bler = 1e-1;
  c[1].ebn0_db = 2.0;
  c[1].bler = 1e-2;
  c[2].ebn0_db = 3.0;
  c[2].bler = 1e-4;
  EXPECT_NEAR(*ccn::ebn0_at_bler(c, 1e-3), 2.5, 1e-12);
  EXPECT_NEAR(*ccn::ebn0_at_bler(c, std::sqrt(10.0) * 1e-2), 1.5, 1e-12);
  EXPECT_FALSE(ccn::ebn0_at_bler(c, 1e-5).has_value());
  EXPECT_FALSE(ccn::ebn0_at_bler(c, 0.5).has_value());
  c[2].bler = 0.0;
  EXPECT_FALSE(ccn::ebn0_at_bler(c, 1e-3).has_value());
}

TEST(SimHarness, WorkerOverride) {
  EXPECT_EQ(ccn::resolve_workers(4), 4u);
  ::setenv("CCN_WORKERS", "2", 1);
  EXPECT_EQ(ccn::resolve_workers(0), 2u);
  ::setenv("CCN_WORKERS", "two", 1);
  EXPECT_THROW(ccn::resolve_workers(0), ccn::ConfigError);
  ::unsetenv("CCN_WORKERS");
  EXPECT_GE(ccn::resolve_workers(0), 1u);
}

TEST(NormalApprox, GaussHermiteRuleIsExactOnPolynomials) {
  const auto rule = ccn::gauss_hermite(40);
  const double sqrt_pi = std::sqrt(std::acos(-1.0));
  double m0 = 0, m2 = 0, m4 = 0, m3 = 0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double x = rule.nodes[i], w = rule.weights[i];
    m0 += w;
    m2 += w * x * x;
    m3 += w * x * x * x;
    m4 += w * x * x * x * x;
  }
  EXPECT_NEAR(m0, sqrt_pi, 1e-13);
  EXPECT_NEAR(m2, sqrt_pi / 2, 1e-13);
  EXPECT_NEAR(m3, 0.0, 1e-13);
  EXPECT_NEAR(m4, 3 * sqrt_pi / 4, 1e-12);
}

TEST(NormalApprox, BiAwgnQuadratureMatchesIntegrationOracle) {
  for (double snr_db : {-10.0, -5.0, 0.0, 2.0, 3.2, 5.0, 8.0, 10.0, 12.0}) {
    const double snr = std::pow(10.0, snr_db / 10.0);
    const auto q = ccn::biawgn_capacity_dispersion(snr);
    const auto o = oracle::biawgn(snr);
    EXPECT_NEAR(q.capacity, o.capacity, 1e-6) << snr_db << " dB";
    EXPECT_NEAR(q.dispersion, o.dispersion, 1e-6) << snr_db << " dB";
  }
}

TEST(NormalApprox, CapacityLimitsAndOrdering) {
  EXPECT_NEAR(ccn::biawgn_capacity_dispersion(1e4).capacity, 1.0, 1e-9);
  EXPECT_LT(ccn::biawgn_capacity_dispersion(1e-4).capacity, 1e-3);
  for (double snr : {0.1, 1.0, 3.0, 10.0}) {
    const auto bi = ccn::biawgn_capacity_dispersion(snr);
    const auto re = ccn::awgn_capacity_dispersion(snr);
    EXPECT_LT(bi.capacity, re.capacity);
    EXPECT_NEAR(re.capacity, 0.5 * std::log2(1 + snr), 1e-15);
  }
  // Real AWGN dispersion at SNR = 1: 3/8 log2(e)^2.
  EXPECT_NEAR(ccn::awgn_capacity_dispersion(1.0).dispersion, 0.375 / (std::log(2.0) * std::log(2.0)), 1e-15);
}

TEST(NormalApprox, EpsilonFallsWithEbN0AndFlagsRatesAboveCapacity) {
  double prev = 1.0;
  for (double e = 0.0; e <= 6.0; e += 0.25) {
    const auto r = ccn::normal_approximation(3060, 0.583, ccn::NaChannel::BiAwgn, e);
    EXPECT_LE(r.epsilon, prev);
    prev = r.epsilon;
  }
  const auto bad = ccn::normal_approximation(3060, 0.9, ccn::NaChannel::BiAwgn, -3.0);
  EXPECT_FALSE(bad.reliable);
  EXPECT_GE(bad.epsilon, 0.5);
  const double e3 = ccn::normal_approximation_ebn0(3060, 0.583, ccn::NaChannel::BiAwgn, 1e-3);
  EXPECT_NEAR(ccn::normal_approximation(3060, 0.583, ccn::NaChannel::BiAwgn, e3).epsilon, 1e-3, 1e-6);
  EXPECT_THROW(ccn::parse_na_channel("bsc"), ccn::InvalidInput);
}

}  // namespace
