#pragma once

// Randomized radius checks: encode a random message, apply e symbol errors
// and r erasures at distinct random positions, decode, compare.

#include <cstddef>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "ccn/reed_solomon.hpp"
#include "ccn/rng.hpp"

namespace ccn {

struct RadiusCase {
  std::size_t errors = 0;
  std::size_t erasures = 0;
};

struct RadiusResult {
  RadiusCase pattern;
  std::size_t trials = 0;
  std::size_t corrected = 0;  // decoded to the transmitted codeword with matching (e, r)

  bool all_corrected() const { return corrected == trials; }
};

inline RadiusResult run_radius_case(const RsCode& rs, RadiusCase pattern, std::size_t trials, RandomStream& rng) {
  if (2 * pattern.errors + pattern.erasures > rs.parity())
    throw InvalidInput("run_radius_case: pattern lies outside the decoding radius");
  const unsigned q = rs.field().size();
  RadiusResult res{pattern, trials, 0};
  std::vector<Symbol> msg(rs.k());
  std::vector<std::size_t> pos(rs.n());
  std::vector<std::size_t> erasures;
  for (std::size_t t = 0; t < trials; ++t) {
    for (auto& s : msg) s = static_cast<Symbol>(rng.below(q));
    const auto cw = rs.encode(msg);
    auto word = cw;
    std::iota(pos.begin(), pos.end(), std::size_t{0});
    // Partial Fisher-Yates: the first e + r entries are distinct random positions.
    const std::size_t touched = pattern.errors + pattern.erasures;
    for (std::size_t i = 0; i < touched; ++i) std::swap(pos[i], pos[i + rng.below(rs.n() - i)]);
    for (std::size_t i = 0; i < pattern.errors; ++i) word[pos[i]] ^= static_cast<Symbol>(1 + rng.below(q - 1));
    erasures.assign(pos.begin() + static_cast<std::ptrdiff_t>(pattern.errors),
                    pos.begin() + static_cast<std::ptrdiff_t>(touched));
    for (std::size_t p : erasures) word[p] = static_cast<Symbol>(rng.below(q));
    const RsDecodeOutcome out =
        erasures.empty() ? rs.decode_errors(word) : rs.decode_errors_erasures(word, erasures);
    if (out.corrected() && out.codeword == cw && out.message == msg && out.errors == pattern.errors &&
        out.erasures == pattern.erasures)
      ++res.corrected;
  }
  return res;
}

// Every (e, r) with 2e + r <= n - k.
inline std::vector<RadiusCase> all_radius_cases(const RsCode& rs) {
  std::vector<RadiusCase> cases;
  for (std::size_t e = 0; 2 * e <= rs.parity(); ++e)
    for (std::size_t r = 0; 2 * e + r <= rs.parity(); ++r) cases.push_back({e, r});
  return cases;
}

}  // namespace ccn
