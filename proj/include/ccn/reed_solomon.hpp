#pragma once

// Systematic, narrow-sense, primitive-length Reed-Solomon codes over GF(2^m).
//
// Symbol layout: index i of a codeword array holds the coefficient of
// x^(n-1-i). The k message symbols come first, the n-k parity symbols last,
// so c(x) = m(x) x^(n-k) + (m(x) x^(n-k) mod g(x)), with
// g(x) = prod_{i=1}^{n-k} (x - alpha^i).
//
// Decoding: syndromes, Berlekamp-Massey seeded with the erasure locator,
// Chien search, Forney's formula. Decoding is bounded-distance: a pattern
// outside the radius yields either Failure or a valid but wrong codeword.

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ccn/errors.hpp"
#include "ccn/galois.hpp"

namespace ccn {

struct RsDecodeOutcome {
  enum class Status { Corrected, Failure };

  Status status = Status::Failure;
  std::vector<Symbol> message;   // k symbols, present iff Corrected
  std::vector<Symbol> codeword;  // n symbols, present iff Corrected
  std::size_t errors = 0;        // e: corrected positions outside the erasure set
  std::size_t erasures = 0;      // r: size of the erasure set

  bool corrected() const { return status == Status::Corrected; }
};

class RsCode {
 public:
  RsCode(GfField field, std::size_t k) : field_(std::move(field)), n_(field_.order()), k_(k) {
    if (k_ == 0 || k_ >= n_) {
      throw InvalidInput("RsCode: need 0 < k < n = " + std::to_string(n_) + ", got k = " +
                         std::to_string(k_));
    }
    GfPoly g = GfPoly::constant(1);
    for (std::size_t i = 1; i <= parity(); ++i) {
      g = poly_mul(g, GfPoly{field_.alpha_pow(static_cast<long long>(i)), 1}, field_);
    }
    generator_ = std::move(g);
  }

  const GfField& field() const { return field_; }
  std::size_t n() const { return n_; }
  std::size_t k() const { return k_; }
  std::size_t parity() const { return n_ - k_; }
  // Errors-only correction radius.
  std::size_t t() const { return parity() / 2; }
  const GfPoly& generator() const { return generator_; }

  std::vector<Symbol> encode(std::span<const Symbol> msg) const {
    if (msg.size() != k_) {
      throw InvalidInput("RsCode::encode: message has " + std::to_string(msg.size()) +
                         " symbols, expected " + std::to_string(k_));
    }
    const std::size_t p = parity();
    const auto& g = generator_.coeffs();
    // rem[0] holds the coefficient of x^(p-1).
    std::vector<Symbol> rem(p, 0);
    for (Symbol s : msg) {
      if (!field_.contains(s)) throw InvalidInput("RsCode::encode: symbol outside the field");
      const Symbol fb = s ^ rem[0];
      std::copy(rem.begin() + 1, rem.end(), rem.begin());
      rem[p - 1] = 0;
      if (fb != 0) {
        for (std::size_t j = 0; j < p; ++j) rem[j] ^= field_.mul(fb, g[p - 1 - j]);
      }
    }
    std::vector<Symbol> out(msg.begin(), msg.end());
    out.insert(out.end(), rem.begin(), rem.end());
    return out;
  }

  // S_j = r(alpha^j) for j = 1..n-k, returned in index order j-1.
  std::vector<Symbol> syndromes(std::span<const Symbol> received) const {
    std::vector<Symbol> s(parity(), 0);
    for (std::size_t j = 0; j < parity(); ++j) {
      const Symbol x = field_.alpha_pow(static_cast<long long>(j + 1));
      Symbol acc = 0;
      for (Symbol r : received) acc = field_.mul(acc, x) ^ r;
      s[j] = acc;
    }
    return s;
  }

  RsDecodeOutcome decode_errors(std::span<const Symbol> received) const {
    RsDecodeOutcome out = decode_errors_erasures(received, {});
    if (out.corrected() && out.errors > t()) return failure(0);
    return out;
  }

  // Erased positions may hold any placeholder value; it is ignored.
  RsDecodeOutcome decode_errors_erasures(std::span<const Symbol> received,
                                         std::span<const std::size_t> erasures) const {
    if (received.size() != n_) {
      throw InvalidInput("RsCode::decode: received word has " + std::to_string(received.size()) +
                         " symbols, expected " + std::to_string(n_));
    }
    std::vector<bool> erased(n_, false);
    for (std::size_t pos : erasures) {
      if (pos >= n_) throw InvalidInput("RsCode::decode: erasure position out of range");
      if (erased[pos]) throw InvalidInput("RsCode::decode: duplicate erasure position");
      erased[pos] = true;
    }
    const std::size_t r = erasures.size();
    const std::size_t p = parity();
    if (r > p) return failure(r);

    std::vector<Symbol> word(received.begin(), received.end());
    for (std::size_t i = 0; i < n_; ++i) {
      if (!field_.contains(word[i])) throw InvalidInput("RsCode::decode: symbol outside the field");
      if (erased[i]) word[i] = 0;
    }

    const std::vector<Symbol> synd = syndromes(word);
    const bool clean = std::all_of(synd.begin(), synd.end(), [](Symbol s) { return s == 0; });
    if (clean) return success(std::move(word), 0, r);

    // Erasure locator Gamma(x) = prod (1 - X_l x).
    GfPoly gamma = GfPoly::constant(1);
    for (std::size_t pos : erasures) gamma = poly_mul(gamma, GfPoly{1, locator(pos)}, field_);

    // Berlekamp-Massey seeded with Gamma; L counts erasures plus errors.
    GfPoly lambda = gamma;
    GfPoly prev = gamma;
    std::size_t len = r;
    for (std::size_t step = r + 1; step <= p; ++step) {
      Symbol delta = 0;
      for (int j = 0; j <= lambda.degree(); ++j) {
        if (static_cast<std::size_t>(j) >= step) break;
        delta ^= field_.mul(lambda.coeff(static_cast<std::size_t>(j)), synd[step - 1 - static_cast<std::size_t>(j)]);
      }
      if (delta == 0) {
        prev = poly_shift(prev, 1);
        continue;
      }
      GfPoly next = poly_add(lambda, poly_scale(poly_shift(prev, 1), delta, field_));
      if (2 * len <= step - 1 + r) {
        prev = poly_scale(lambda, field_.inv(delta), field_);
        len = step + r - len;
      } else {
        prev = poly_shift(prev, 1);
      }
      lambda = std::move(next);
    }

    const auto deg = static_cast<std::size_t>(std::max(lambda.degree(), 0));
    if (deg != len || deg < r) return failure(r);
    if (2 * (deg - r) + r > p) return failure(r);

    // Chien search over every position.
    std::vector<std::size_t> roots;
    for (std::size_t i = 0; i < n_; ++i) {
      const Symbol x_inv = field_.inv(locator(i));
      if (poly_eval(lambda, x_inv, field_) == 0) roots.push_back(i);
    }
    if (roots.size() != deg) return failure(r);

    // Omega(x) = S(x) Lambda(x) mod x^(n-k), S(x) = sum S_{j+1} x^j.
    GfPoly omega = poly_mul(GfPoly(synd), lambda, field_);
    if (omega.coeffs().size() > p) {
      omega = GfPoly(std::vector<Symbol>(omega.coeffs().begin(), omega.coeffs().begin() + static_cast<std::ptrdiff_t>(p)));
    }
    const GfPoly dlambda = poly_derivative(lambda);

    std::size_t errors = 0;
    for (std::size_t pos : roots) {
      const Symbol x_inv = field_.inv(locator(pos));
      const Symbol denom = poly_eval(dlambda, x_inv, field_);
      if (denom == 0) return failure(r);
      const Symbol magnitude = field_.div(poly_eval(omega, x_inv, field_), denom);
      if (!erased[pos]) {
        if (magnitude == 0) return failure(r);
        ++errors;
      }
      word[pos] ^= magnitude;
    }

    const std::vector<Symbol> check = syndromes(word);
    if (!std::all_of(check.begin(), check.end(), [](Symbol s) { return s == 0; })) return failure(r);
    if (2 * errors + r > p) return failure(r);
    return success(std::move(word), errors, r);
  }

 private:
  // Error locator X_i = alpha^(n-1-i) of array position i.
  Symbol locator(std::size_t pos) const { return field_.alpha_pow(static_cast<long long>(n_ - 1 - pos)); }

  RsDecodeOutcome success(std::vector<Symbol> word, std::size_t errors, std::size_t erasures) const {
    RsDecodeOutcome out;
    out.status = RsDecodeOutcome::Status::Corrected;
    out.message.assign(word.begin(), word.begin() + static_cast<std::ptrdiff_t>(k_));
    out.codeword = std::move(word);
    out.errors = errors;
    out.erasures = erasures;
    return out;
  }

  static RsDecodeOutcome failure(std::size_t erasures) {
    RsDecodeOutcome out;
    out.erasures = erasures;
    return out;
  }

  GfField field_;
  std::size_t n_;
  std::size_t k_;
  GfPoly generator_;
};

}  // namespace ccn
