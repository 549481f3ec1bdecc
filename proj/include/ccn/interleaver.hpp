#pragma once

// Row-column block interleaver. n2 codewords are the rows of an n2 x n2
// matrix (row-major input); the interleaved stream reads it column by column,
// so stream index c*n2 + r carries matrix element (r, c). Any run of n2
// consecutive stream symbols touches every row exactly once.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ccn/errors.hpp"
#include "ccn/galois.hpp"

namespace ccn {

struct InterleaverBlock {
  std::size_t n2 = 0;
  std::vector<Symbol> symbols;  // row-major, row i = codeword i

  std::span<const Symbol> row(std::size_t i) const { return std::span(symbols).subspan(i * n2, n2); }
};

namespace detail {
inline void check_square(std::size_t len, std::size_t n2, const char* what) {
  if (n2 == 0 || len != n2 * n2) {
    throw InvalidInput(std::string(what) + ": expected " + std::to_string(n2 * n2) + " entries for n2 = " +
                       std::to_string(n2) + ", got " + std::to_string(len));
  }
}
}  // namespace detail

// Works for any per-symbol payload (symbols, erasure flags, confidences).
template <class T>
std::vector<T> interleave(std::span<const T> row_major, std::size_t n2) {
  detail::check_square(row_major.size(), n2, "interleave");
  std::vector<T> out(row_major.size());
  for (std::size_t r = 0; r < n2; ++r)
    for (std::size_t c = 0; c < n2; ++c) out[c * n2 + r] = row_major[r * n2 + c];
  return out;
}

template <class T>
std::vector<T> deinterleave(std::span<const T> stream, std::size_t n2) {
  detail::check_square(stream.size(), n2, "deinterleave");
  std::vector<T> out(stream.size());
  for (std::size_t c = 0; c < n2; ++c)
    for (std::size_t r = 0; r < n2; ++r) out[r * n2 + c] = stream[c * n2 + r];
  return out;
}

inline std::vector<Symbol> interleave(const InterleaverBlock& block) {
  return interleave<Symbol>(block.symbols, block.n2);
}

inline InterleaverBlock deinterleave_block(std::span<const Symbol> stream, std::size_t n2) {
  return InterleaverBlock{n2, deinterleave<Symbol>(stream, n2)};
}

}  // namespace ccn
