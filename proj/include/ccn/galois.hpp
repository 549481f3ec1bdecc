#pragma once

// Arithmetic in GF(2^m), m in {4, 8}, and dense polynomials over it.
//
// Elements are bitmasks: bit i is the coefficient of x^i, so addition is XOR.
// The primitive element is alpha = 0x02 in both supported fields.

#include <algorithm>
#include <cassert>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

#include "ccn/errors.hpp"

namespace ccn {

using Symbol = std::uint8_t;

class GfField {
 public:
  static constexpr unsigned kPoly16 = 0x13;   // x^4 + x + 1
  static constexpr unsigned kPoly256 = 0x11D;  // x^8 + x^4 + x^3 + x^2 + 1

  explicit GfField(unsigned m) : m_(m) {
    if (m == 4) {
      poly_ = kPoly16;
    } else if (m == 8) {
      poly_ = kPoly256;
    } else {
      throw InvalidInput("GfField: only m = 4 and m = 8 are supported, got " + std::to_string(m));
    }
    q_ = 1u << m;
    const unsigned order = q_ - 1;
    exp_.assign(2 * order, 0);
    log_.assign(q_, -1);
    unsigned x = 1;
    for (unsigned i = 0; i < order; ++i) {
      if (log_[x] != -1) throw InvalidInput("GfField: reduction polynomial is not primitive");
      exp_[i] = static_cast<Symbol>(x);
      exp_[i + order] = static_cast<Symbol>(x);
      log_[x] = static_cast<int>(i);
      x <<= 1;
      if (x & q_) x ^= poly_;
    }
    if (x != 1) throw InvalidInput("GfField: alpha does not have order q - 1");
  }

  static GfField gf16() { return GfField(4); }
  static GfField gf256() { return GfField(8); }

  unsigned bits() const { return m_; }
  unsigned size() const { return q_; }
  unsigned order() const { return q_ - 1; }
  unsigned primitive_poly() const { return poly_; }

  bool contains(unsigned v) const { return v < q_; }

  static Symbol add(Symbol a, Symbol b) { return a ^ b; }

  Symbol mul(Symbol a, Symbol b) const {
    assert(a < q_ && b < q_);
    if (a == 0 || b == 0) return 0;
    return exp_[static_cast<unsigned>(log_[a] + log_[b])];
  }

  Symbol inv(Symbol a) const {
    if (a == 0) throw DivisionByZero("GF inverse of zero");
    return exp_[(order() - static_cast<unsigned>(log_[a])) % order()];
  }

  Symbol div(Symbol a, Symbol b) const {
    if (b == 0) throw DivisionByZero("GF division by zero");
    if (a == 0) return 0;
    return exp_[static_cast<unsigned>(log_[a] + static_cast<int>(order()) - log_[b])];
  }

  // alpha^e for any integer exponent.
  Symbol alpha_pow(long long e) const {
    const long long ord = order();
    long long r = e % ord;
    if (r < 0) r += ord;
    return exp_[static_cast<std::size_t>(r)];
  }

  Symbol pow(Symbol a, long long e) const {
    if (a == 0) return e == 0 ? 1 : 0;
    return alpha_pow(static_cast<long long>(log_[a]) * e);
  }

  // Discrete log base alpha; a must be nonzero.
  unsigned log(Symbol a) const {
    if (a == 0) throw DivisionByZero("GF log of zero");
    return static_cast<unsigned>(log_[a]);
  }

  Symbol antilog(unsigned i) const { return exp_[i % order()]; }

 private:
  unsigned m_ = 0;
  unsigned q_ = 0;
  unsigned poly_ = 0;
  std::vector<Symbol> exp_;  // doubled so log sums never need a reduction
  std::vector<int> log_;     // log_[0] == -1
};

// Polynomial over GF(2^m), coefficients lowest degree first. The zero
// polynomial is the empty coefficient list; trailing zeros are trimmed.
class GfPoly {
 public:
  GfPoly() = default;
  explicit GfPoly(std::vector<Symbol> coeffs) : c_(std::move(coeffs)) { trim(); }
  GfPoly(std::initializer_list<Symbol> coeffs) : c_(coeffs) { trim(); }

  static GfPoly constant(Symbol c) { return GfPoly(std::vector<Symbol>{c}); }

  static GfPoly monomial(Symbol c, std::size_t degree) {
    std::vector<Symbol> v(degree + 1, 0);
    v[degree] = c;
    return GfPoly(std::move(v));
  }

  bool is_zero() const { return c_.empty(); }
  // -1 for the zero polynomial.
  int degree() const { return static_cast<int>(c_.size()) - 1; }
  Symbol coeff(std::size_t i) const { return i < c_.size() ? c_[i] : Symbol{0}; }
  Symbol leading() const { return c_.empty() ? Symbol{0} : c_.back(); }
  const std::vector<Symbol>& coeffs() const { return c_; }

  friend bool operator==(const GfPoly&, const GfPoly&) = default;

 private:
  void trim() {
    while (!c_.empty() && c_.back() == 0) c_.pop_back();
  }

  std::vector<Symbol> c_;
};

// Horner evaluation.
inline Symbol poly_eval(const GfPoly& p, Symbol x, const GfField& f) {
  Symbol acc = 0;
  const auto& c = p.coeffs();
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = f.mul(acc, x) ^ *it;
  return acc;
}

inline GfPoly poly_add(const GfPoly& a, const GfPoly& b) {
  std::vector<Symbol> out(std::max(a.coeffs().size(), b.coeffs().size()), 0);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.coeff(i) ^ b.coeff(i);
  return GfPoly(std::move(out));
}

inline GfPoly poly_scale(const GfPoly& p, Symbol s, const GfField& f) {
  std::vector<Symbol> out(p.coeffs());
  for (auto& c : out) c = f.mul(c, s);
  return GfPoly(std::move(out));
}

// Multiply by x^k.
inline GfPoly poly_shift(const GfPoly& p, std::size_t k) {
  if (p.is_zero()) return p;
  std::vector<Symbol> out(k, 0);
  out.insert(out.end(), p.coeffs().begin(), p.coeffs().end());
  return GfPoly(std::move(out));
}

inline GfPoly poly_mul(const GfPoly& a, const GfPoly& b, const GfField& f) {
  if (a.is_zero() || b.is_zero()) return {};
  std::vector<Symbol> out(a.coeffs().size() + b.coeffs().size() - 1, 0);
  for (std::size_t i = 0; i < a.coeffs().size(); ++i) {
    const Symbol ai = a.coeffs()[i];
    if (ai == 0) continue;
    for (std::size_t j = 0; j < b.coeffs().size(); ++j) out[i + j] ^= f.mul(ai, b.coeffs()[j]);
  }
  return GfPoly(std::move(out));
}

// Returns (quotient, remainder) with p = quotient * d + remainder and
// deg(remainder) < deg(d).
inline std::pair<GfPoly, GfPoly> poly_divmod(const GfPoly& p, const GfPoly& d, const GfField& f) {
  if (d.is_zero()) throw DivisionByZero("polynomial division by the zero polynomial");
  if (p.degree() < d.degree()) return {GfPoly{}, p};
  std::vector<Symbol> rem(p.coeffs());
  const auto dd = static_cast<std::size_t>(d.degree());
  std::vector<Symbol> quot(rem.size() - dd, 0);
  const Symbol lead_inv = f.inv(d.leading());
  for (std::size_t i = rem.size(); i-- > dd;) {
    const Symbol c = rem[i];
    if (c == 0) continue;
    const Symbol factor = f.mul(c, lead_inv);
    quot[i - dd] = factor;
    for (std::size_t j = 0; j <= dd; ++j) rem[i - dd + j] ^= f.mul(factor, d.coeffs()[j]);
  }
  rem.resize(dd);
  return {GfPoly(std::move(quot)), GfPoly(std::move(rem))};
}

// Formal derivative; in characteristic 2 only odd-degree terms survive.
inline GfPoly poly_derivative(const GfPoly& p) {
  if (p.degree() < 1) return {};
  std::vector<Symbol> out(p.coeffs().size() - 1, 0);
  for (std::size_t i = 1; i < p.coeffs().size(); i += 2) out[i - 1] = p.coeffs()[i];
  return GfPoly(std::move(out));
}

}  // namespace ccn
