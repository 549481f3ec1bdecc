#pragma once

// Concatenated classic + neural code:
//   n2 messages -> RS encode (rows) -> column-wise interleave -> one-hot ->
//   inner encoder, one normalization batch per matrix column (m = n2) ->
//   channel -> inner decoder -> threshold -> deinterleave -> RS decode.
//
// Message bits are packed big-endian into m-bit RS symbols, symbols in
// codeword order. A block whose RS decode fails emits its received
// systematic symbols as the message estimate.

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ccn/errors.hpp"
#include "ccn/galois.hpp"
#include "ccn/interleaver.hpp"
#include "ccn/neural_net.hpp"
#include "ccn/reed_solomon.hpp"

namespace ccn {

struct CodeDims {
  std::size_t n = 0;  // real channel uses per outer codeword
  std::size_t k = 0;  // information bits per outer codeword
  double rate = 0.0;
};

inline CodeDims ccn_rate_and_length(const RsCode& rs, unsigned k1, unsigned n1) {
  if (rs.field().bits() != k1) {
    throw InvalidInput("ccn_rate_and_length: log2(q) = " + std::to_string(rs.field().bits()) +
                       " does not match inner k1 = " + std::to_string(k1));
  }
  CodeDims d;
  d.n = rs.n() * n1;
  d.k = rs.k() * k1;
  d.rate = static_cast<double>(d.k) / static_cast<double>(d.n);
  return d;
}

inline CodeDims ccn_rate_and_length(const RsCode& rs, const NeuralCodeModel& inner) {
  return ccn_rate_and_length(rs, inner.k1, inner.n1);
}

inline std::vector<Symbol> pack_symbols(std::span<const std::uint8_t> bits, unsigned bits_per_symbol) {
  if (bits_per_symbol == 0 || bits_per_symbol > 8 || bits.size() % bits_per_symbol != 0)
    throw InvalidInput("pack_symbols: bit count is not a multiple of the symbol width");
  std::vector<Symbol> out(bits.size() / bits_per_symbol, 0);
  for (std::size_t s = 0; s < out.size(); ++s) {
    unsigned v = 0;
    for (unsigned b = 0; b < bits_per_symbol; ++b) {
      const std::uint8_t bit = bits[s * bits_per_symbol + b];
      if (bit > 1) throw InvalidInput("pack_symbols: bits must be 0 or 1");
      v = (v << 1) | bit;
    }
    out[s] = static_cast<Symbol>(v);
  }
  return out;
}

inline std::vector<std::uint8_t> unpack_symbols(std::span<const Symbol> symbols, unsigned bits_per_symbol) {
  std::vector<std::uint8_t> out(symbols.size() * bits_per_symbol);
  for (std::size_t s = 0; s < symbols.size(); ++s)
    for (unsigned b = 0; b < bits_per_symbol; ++b)
      out[s * bits_per_symbol + b] = static_cast<std::uint8_t>((symbols[s] >> (bits_per_symbol - 1 - b)) & 1u);
  return out;
}

class CcnCode {
 public:
  CcnCode(RsCode rs, NeuralCodeModel inner, double threshold = 0.0,
          NormalizationMode normalization = NormalizationMode::PerBatch)
      : rs_(std::move(rs)), inner_(std::move(inner)), threshold_(threshold), normalization_(normalization) {
    inner_.validate();
    dims_ = ccn_rate_and_length(rs_, inner_);
    if (!(threshold_ >= 0.0 && threshold_ < 1.0)) throw InvalidInput("CcnCode: threshold must lie in [0, 1)");
    codebook_ = encoder_codebook(inner_);
  }

  const RsCode& rs() const { return rs_; }
  const NeuralCodeModel& inner() const { return inner_; }
  double threshold() const { return threshold_; }
  NormalizationMode normalization() const { return normalization_; }
  const CodeDims& dims() const { return dims_; }
  std::size_t n2() const { return rs_.n(); }
  std::size_t message_bits() const { return dims_.k; }
  // Encoder outputs for every symbol value (row j = f(one-hot j)).
  const Matrix& codebook() const { return codebook_; }

  CcnCode with_threshold(double tau) const {
    CcnCode c = *this;
    if (!(tau >= 0.0 && tau < 1.0)) throw InvalidInput("CcnCode: threshold must lie in [0, 1)");
    c.threshold_ = tau;
    return c;
  }

 private:
  RsCode rs_;
  NeuralCodeModel inner_;
  double threshold_;
  NormalizationMode normalization_;
  CodeDims dims_;
  Matrix codebook_;
};

struct EncodedBlock {
  std::vector<Symbol> codewords;  // n2 x n2, row-major (row i = codeword i)
  std::vector<Symbol> stream;     // interleaved symbol stream
  Matrix channel_input;           // n2^2 x n1, row p carries stream symbol p
};

// Maps interleaved symbols to normalized channel inputs, one batch of n2
// consecutive stream symbols (one interleaver column) at a time.
inline Matrix inner_encode_stream(std::span<const Symbol> stream, const CcnCode& code) {
  const std::size_t n2 = code.n2();
  const auto n1 = static_cast<Eigen::Index>(code.inner().n1);
  if (stream.size() % n2 != 0) throw InvalidInput("inner_encode_stream: stream is not a whole number of batches");
  Matrix out(static_cast<Eigen::Index>(stream.size()), n1);
  Matrix raw(static_cast<Eigen::Index>(n2), n1);
  for (std::size_t b = 0; b < stream.size() / n2; ++b) {
    for (std::size_t i = 0; i < n2; ++i) raw.row(static_cast<Eigen::Index>(i)) = code.codebook().row(stream[b * n2 + i]);
    out.middleRows(static_cast<Eigen::Index>(b * n2), static_cast<Eigen::Index>(n2)) =
        normalize_for_transmission(raw, code.inner(), code.normalization());
  }
  return out;
}

inline EncodedBlock ccn_encode_block_full(const std::vector<std::vector<std::uint8_t>>& messages, const CcnCode& code) {
  const std::size_t n2 = code.n2();
  if (messages.size() != n2) {
    throw InvalidInput("ccn_encode_block: expected " + std::to_string(n2) + " messages, got " +
                       std::to_string(messages.size()));
  }
  EncodedBlock block;
  block.codewords.reserve(n2 * n2);
  for (const auto& bits : messages) {
    if (bits.size() != code.message_bits()) {
      throw InvalidInput("ccn_encode_block: message has " + std::to_string(bits.size()) + " bits, expected " +
                         std::to_string(code.message_bits()));
    }
    const auto cw = code.rs().encode(pack_symbols(bits, code.inner().k1));
    block.codewords.insert(block.codewords.end(), cw.begin(), cw.end());
  }
  block.stream = interleave<Symbol>(block.codewords, n2);
  block.channel_input = inner_encode_stream(block.stream, code);
  return block;
}

inline Matrix ccn_encode_block(const std::vector<std::vector<std::uint8_t>>& messages, const CcnCode& code) {
  return ccn_encode_block_full(messages, code).channel_input;
}

// Hard symbol and its softmax confidence for every received row.
struct InnerSoftOutput {
  std::vector<Symbol> symbols;
  std::vector<double> confidence;
};

inline InnerSoftOutput inner_decode(const Matrix& y, const NeuralCodeModel& model, Eigen::Index chunk = 4096) {
  InnerSoftOutput out;
  out.symbols.resize(static_cast<std::size_t>(y.rows()));
  out.confidence.resize(static_cast<std::size_t>(y.rows()));
  for (Eigen::Index start = 0; start < y.rows(); start += chunk) {
    const Eigen::Index len = std::min(chunk, y.rows() - start);
    const Matrix logits = decoder_forward(y.middleRows(start, len), model);
    for (Eigen::Index i = 0; i < len; ++i) {
      const SymbolDecision d = decide_from_logits(logits.row(i), 0.0);
      out.symbols[static_cast<std::size_t>(start + i)] = static_cast<Symbol>(d.symbol);
      out.confidence[static_cast<std::size_t>(start + i)] = d.confidence;
    }
  }
  return out;
}

struct InnerDecisions {
  std::vector<Symbol> symbols;
  std::vector<std::uint8_t> erased;  // 1 = erasure
};

inline InnerDecisions apply_threshold(const InnerSoftOutput& soft, double threshold) {
  InnerDecisions d;
  d.symbols = soft.symbols;
  d.erased.resize(soft.confidence.size());
  for (std::size_t i = 0; i < soft.confidence.size(); ++i) d.erased[i] = soft.confidence[i] <= threshold ? 1 : 0;
  return d;
}

struct CcnDecodeReport {
  std::vector<std::uint8_t> message_bits;
  // Decoded message equals the sent one when ground truth is supplied;
  // otherwise whether the RS decoder reported success.
  bool block_ok = false;
  std::size_t inner_symbol_errors = 0;  // unerased positions whose symbol differs from the sent one (needs truth)
  std::size_t erasures_declared = 0;
  std::size_t bit_errors = 0;  // needs truth
  RsDecodeOutcome rs_outcome;
};

// Outer decoding of one interleaver block of inner decisions given in
// stream order. `sent_codewords` (row-major n2 x n2) enables error counting.
inline std::vector<CcnDecodeReport> decode_symbol_stream(const InnerDecisions& decisions, const CcnCode& code,
                                                         std::span<const Symbol> sent_codewords = {}) {
  const std::size_t n2 = code.n2();
  const std::size_t k2 = code.rs().k();
  const unsigned bps = code.inner().k1;
  const std::vector<Symbol> rows = deinterleave<Symbol>(decisions.symbols, n2);
  const std::vector<std::uint8_t> flags = deinterleave<std::uint8_t>(decisions.erased, n2);
  const bool have_truth = !sent_codewords.empty();
  if (have_truth && sent_codewords.size() != n2 * n2) throw InvalidInput("decode_symbol_stream: truth has wrong size");

  std::vector<CcnDecodeReport> reports(n2);
  std::vector<std::size_t> erasures;
  for (std::size_t r = 0; r < n2; ++r) {
    const std::span<const Symbol> word(rows.data() + r * n2, n2);
    auto& rep = reports[r];
    erasures.clear();
    for (std::size_t c = 0; c < n2; ++c)
      if (flags[r * n2 + c]) erasures.push_back(c);
    rep.erasures_declared = erasures.size();

    if (code.threshold() > 0.0 && !erasures.empty()) {
      rep.rs_outcome = code.rs().decode_errors_erasures(word, erasures);
    } else {
      rep.rs_outcome = code.rs().decode_errors(word);
    }
    const std::span<const Symbol> estimate =
        rep.rs_outcome.corrected() ? std::span<const Symbol>(rep.rs_outcome.message) : word.first(k2);
    rep.message_bits = unpack_symbols(estimate, bps);

    if (have_truth) {
      const std::span<const Symbol> sent(sent_codewords.data() + r * n2, n2);
      for (std::size_t c = 0; c < n2; ++c)
        if (!flags[r * n2 + c] && word[c] != sent[c]) ++rep.inner_symbol_errors;
      for (std::size_t s = 0; s < k2; ++s) rep.bit_errors += static_cast<std::size_t>(std::popcount(static_cast<unsigned>(estimate[s] ^ sent[s])));
      rep.block_ok = rep.bit_errors == 0;
    } else {
      rep.block_ok = rep.rs_outcome.corrected();
    }
  }
  return reports;
}

inline std::vector<CcnDecodeReport> ccn_decode_block(const Matrix& y, const CcnCode& code,
                                                     std::span<const Symbol> sent_codewords = {}) {
  const std::size_t n2 = code.n2();
  if (static_cast<std::size_t>(y.rows()) != n2 * n2 || y.cols() != static_cast<Eigen::Index>(code.inner().n1))
    throw InvalidInput("ccn_decode_block: received block has the wrong shape");
  const InnerSoftOutput soft = inner_decode(y, code.inner());
  return decode_symbol_stream(apply_threshold(soft, code.threshold()), code, sent_codewords);
}

}  // namespace ccn
