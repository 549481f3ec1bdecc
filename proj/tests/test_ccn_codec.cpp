#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "ccn/ccn_codec.hpp"
#include "ccn/trainer.hpp"

namespace {

using ccn::CcnCode;
using ccn::GfField;
using ccn::NeuralCodeModel;
using ccn::RsCode;
using ccn::Symbol;

NeuralCodeModel random_model(unsigned k1, unsigned n1, std::uint64_t seed) {
  ccn::RandomStream rng(seed, {});
  return NeuralCodeModel::initialized(k1, n1, rng);
}

std::vector<std::vector<std::uint8_t>> random_messages(const CcnCode& code, std::mt19937_64& rng) {
  std::vector<std::vector<std::uint8_t>> msgs(code.n2(), std::vector<std::uint8_t>(code.message_bits()));
  for (auto& m : msgs)
    for (auto& b : m) b = static_cast<std::uint8_t>(rng() & 1u);
  return msgs;
}

// Small autoencoder trained just long enough to be error-free without noise.
const NeuralCodeModel& trained_small_model() {
  static const NeuralCodeModel model = [] {
    ccn::TrainConfig c = ccn::TrainConfig::reference_ae();
    c.samples_per_epoch = 15 * 4000;
    c.epochs = 1;
    c.seed = 21;
    c.eval_every = 0;
    return ccn::train_inner(c).model;
  }();
  return model;
}

TEST(CcnCodec, RateAndLength) {
  const auto small = ccn::ccn_rate_and_length(RsCode(GfField::gf16(), 11), 4, 7);
  EXPECT_EQ(small.n, 105u);
  EXPECT_EQ(small.k, 44u);
  EXPECT_NEAR(small.rate, 0.419, 5e-4);
  const auto large = ccn::ccn_rate_and_length(RsCode(GfField::gf256(), 223), 8, 12);
  EXPECT_EQ(large.n, 3060u);
  EXPECT_EQ(large.k, 1784u);
  EXPECT_NEAR(large.rate, 0.583, 5e-4);
  EXPECT_THROW(ccn::ccn_rate_and_length(RsCode(GfField::gf256(), 223), 4, 7), ccn::InvalidInput);
  EXPECT_THROW(CcnCode(RsCode(GfField::gf256(), 223), random_model(4, 7, 1)), ccn::InvalidInput);
}

TEST(CcnCodec, BitPackingIsBigEndianPerSymbol) {
  const std::vector<std::uint8_t> bits{1, 0, 1, 1, 0, 0, 0, 1};
  EXPECT_EQ(ccn::pack_symbols(bits, 4), (std::vector<Symbol>{0xB, 0x1}));
  EXPECT_EQ(ccn::pack_symbols(bits, 8), (std::vector<Symbol>{0xB1}));
  EXPECT_EQ(ccn::unpack_symbols(std::vector<Symbol>{0xB, 0x1}, 4), bits);
  EXPECT_THROW(ccn::pack_symbols(std::vector<std::uint8_t>{1, 0, 1}, 4), ccn::InvalidInput);
  EXPECT_THROW(ccn::pack_symbols(std::vector<std::uint8_t>{1, 0, 2, 0}, 4), ccn::InvalidInput);
}

TEST(CcnCodec, EncodedBlockShapeAndPowerPerColumnBatch) {
  const CcnCode code(RsCode(GfField::gf16(), 11), random_model(4, 7, 2));
  std::mt19937_64 rng(2);
  const auto block = ccn::ccn_encode_block_full(random_messages(code, rng), code);
  ASSERT_EQ(block.channel_input.rows(), 225);
  ASSERT_EQ(block.channel_input.cols(), 7);
  for (std::size_t c = 0; c < 15; ++c)
    EXPECT_TRUE(ccn::satisfies_power_constraint(block.channel_input.middleRows(static_cast<Eigen::Index>(c * 15), 15)));
  // Row p of the channel block carries stream symbol p = codeword (p % 15), position (p / 15).
  for (std::size_t p = 0; p < 225; ++p) EXPECT_EQ(block.stream[p], block.codewords[(p % 15) * 15 + p / 15]);
}

TEST(CcnCodec, MalformedMessagesAreRejected) {
  const CcnCode code(RsCode(GfField::gf16(), 11), random_model(4, 7, 3));
  std::mt19937_64 rng(3);
  auto msgs = random_messages(code, rng);
  msgs.pop_back();
  EXPECT_THROW(ccn::ccn_encode_block(msgs, code), ccn::InvalidInput);
  msgs = random_messages(code, rng);
  msgs[4].push_back(0);
  EXPECT_THROW(ccn::ccn_encode_block(msgs, code), ccn::InvalidInput);
  EXPECT_THROW(ccn::ccn_decode_block(ccn::Matrix::Zero(224, 7), code), ccn::InvalidInput);
}

TEST(CcnCodec, NoiselessRoundTripWithAnErrorFreeInnerCode) {
  const CcnCode code(RsCode(GfField::gf16(), 11), trained_small_model());
  ccn::RandomStream probe(1, {});
  const auto ser = ccn::estimate_symbol_error_rate(code.inner(), ccn::ChannelKind::Awgn, 0.0, 1e-9, 15000, 15, probe);
  ASSERT_EQ(ser.errors, 0u) << "inner model is not error-free at sigma -> 0";
  std::mt19937_64 rng(4);
  for (int rep = 0; rep < 5; ++rep) {
    const auto msgs = random_messages(code, rng);
    const auto block = ccn::ccn_encode_block_full(msgs, code);
    const auto reports = ccn::ccn_decode_block(block.channel_input, code, block.codewords);
    ASSERT_EQ(reports.size(), 15u);
    for (std::size_t i = 0; i < 15; ++i) {
      EXPECT_TRUE(reports[i].block_ok);
      EXPECT_EQ(reports[i].message_bits, msgs[i]);
      EXPECT_EQ(reports[i].rs_outcome.errors, 0u);
      EXPECT_EQ(reports[i].erasures_declared, 0u);
      EXPECT_EQ(reports[i].bit_errors, 0u);
    }
  }
}

// Symbol-layer fault injection; no neural model is involved in the decisions.
struct Injected {
  ccn::EncodedBlock block;
  ccn::InnerDecisions decisions;
};

Injected clean_decisions(const CcnCode& code, std::mt19937_64& rng) {
  Injected in;
  in.block = ccn::ccn_encode_block_full(random_messages(code, rng), code);
  in.decisions.symbols = in.block.stream;
  in.decisions.erased.assign(in.block.stream.size(), 0);
  return in;
}

// Stream index of (codeword r, position c).
std::size_t stream_index(std::size_t r, std::size_t c, std::size_t n2) { return c * n2 + r; }

TEST(CcnCodec, UpToTErrorsPerCodewordAlwaysDecode) {
  const CcnCode code(RsCode(GfField::gf256(), 223), random_model(8, 12, 5));
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 3; ++rep) {
    Injected in = clean_decisions(code, rng);
    std::vector<std::size_t> pos(255);
    std::iota(pos.begin(), pos.end(), 0);
    for (std::size_t r = 0; r < 255; ++r) {
      std::shuffle(pos.begin(), pos.end(), rng);
      const std::size_t e = r % 17;  // 0..16 = t
      for (std::size_t i = 0; i < e; ++i) in.decisions.symbols[stream_index(r, pos[i], 255)] ^= static_cast<Symbol>(1 + rng() % 255);
    }
    const auto reports = ccn::decode_symbol_stream(in.decisions, code, in.block.codewords);
    for (std::size_t r = 0; r < 255; ++r) {
      ASSERT_TRUE(reports[r].block_ok) << "codeword " << r;
      EXPECT_EQ(reports[r].rs_outcome.errors, r % 17);
      EXPECT_EQ(reports[r].inner_symbol_errors, r % 17);
    }
  }
}

TEST(CcnCodec, TPlusOneErrorsBreakOnlyTheirCodeword) {
  const CcnCode code(RsCode(GfField::gf16(), 11), random_model(4, 7, 6));
  std::mt19937_64 rng(6);
  int failures = 0;
  for (int rep = 0; rep < 200; ++rep) {
    Injected in = clean_decisions(code, rng);
    const std::size_t victim = rep % 15;
    std::vector<std::size_t> pos(15);
    std::iota(pos.begin(), pos.end(), 0);
    std::shuffle(pos.begin(), pos.end(), rng);
    // At least one hit in the message part, else a failed decode still
    // emits the right systematic symbols.
    std::iter_swap(pos.begin(), std::find_if(pos.begin(), pos.end(), [](std::size_t c) { return c < 11; }));
    for (std::size_t i = 0; i < 3; ++i) in.decisions.symbols[stream_index(victim, pos[i], 15)] ^= static_cast<Symbol>(1 + rng() % 15);
    const auto reports = ccn::decode_symbol_stream(in.decisions, code, in.block.codewords);
    for (std::size_t r = 0; r < 15; ++r) {
      if (r == victim) {
        EXPECT_FALSE(reports[r].block_ok);
        if (!reports[r].rs_outcome.corrected()) {
          ++failures;
          // Failure emits the received systematic symbols.
          std::vector<Symbol> sys(11);
          for (std::size_t c = 0; c < 11; ++c) sys[c] = in.decisions.symbols[stream_index(r, c, 15)];
          EXPECT_EQ(reports[r].message_bits, ccn::unpack_symbols(sys, 4));
        }
      } else {
        EXPECT_TRUE(reports[r].block_ok);
      }
    }
  }
  EXPECT_GT(failures, 0);
}

TEST(CcnCodec, ErasuresAreUsedOnlyAboveZeroThreshold) {
  const CcnCode base(RsCode(GfField::gf16(), 11), random_model(4, 7, 7));
  std::mt19937_64 rng(7);
  Injected in = clean_decisions(base, rng);
  // Codeword 0: one error plus two erasures with garbage symbols (2e + r = 4).
  in.decisions.symbols[stream_index(0, 1, 15)] ^= 5;
  for (std::size_t c : {4u, 9u}) {
    in.decisions.symbols[stream_index(0, c, 15)] ^= 7;
    in.decisions.erased[stream_index(0, c, 15)] = 1;
  }
  const auto with = ccn::decode_symbol_stream(in.decisions, base.with_threshold(0.5), in.block.codewords);
  EXPECT_TRUE(with[0].block_ok);
  EXPECT_EQ(with[0].erasures_declared, 2u);
  EXPECT_EQ(with[0].rs_outcome.erasures, 2u);
  EXPECT_EQ(with[0].inner_symbol_errors, 1u);
  // Threshold 0 decodes errors-only: three symbol errors exceed t = 2.
  const auto without = ccn::decode_symbol_stream(in.decisions, base, in.block.codewords);
  EXPECT_FALSE(without[0].block_ok);
  EXPECT_EQ(without[0].rs_outcome.erasures, 0u);
}

TEST(CcnCodec, ThresholdZeroNeverDeclaresErasures) {
  ccn::InnerSoftOutput soft{{1, 2, 3}, {0.2, 1e-300, 0.99}};
  const auto d0 = ccn::apply_threshold(soft, 0.0);
  EXPECT_EQ(d0.erased, (std::vector<std::uint8_t>{0, 0, 0}));
  const auto d5 = ccn::apply_threshold(soft, 0.5);
  EXPECT_EQ(d5.erased, (std::vector<std::uint8_t>{1, 1, 0}));
}

TEST(CcnCodec, FrozenNormalizationNeedsStatistics) {
  NeuralCodeModel m = random_model(4, 7, 8);
  const CcnCode code(RsCode(GfField::gf16(), 11), m, 0.0, ccn::NormalizationMode::Frozen);
  std::mt19937_64 rng(8);
  EXPECT_THROW(ccn::ccn_encode_block(random_messages(code, rng), code), ccn::InvalidInput);
  m.frozen_stats = ccn::codebook_stats(m);
  const CcnCode frozen(RsCode(GfField::gf16(), 11), m, 0.0, ccn::NormalizationMode::Frozen);
  const auto x = ccn::ccn_encode_block(random_messages(frozen, rng), frozen);
  EXPECT_EQ(x.rows(), 225);
}

}  // namespace
