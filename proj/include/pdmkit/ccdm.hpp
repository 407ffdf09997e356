#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <span>

#include <gmpxx.h>

#include "pdmkit/constellation.hpp"

namespace pdmkit {

enum class DecodeStatus {
  Ok,
  CompositionViolation,  // wrong number of ones
  OutOfCodebook,         // valid composition, but rank >= 2^k
  InvalidSymbol,         // amplitude not in the channel's alphabet
};

const char* to_string(DecodeStatus s);

struct DecodeResult {
  DecodeStatus status = DecodeStatus::Ok;
  Bits bits;

  bool ok() const { return status == DecodeStatus::Ok; }
};

/// Fixed-to-fixed binary constant-composition matcher.
///
/// Maps k input bits to n output bits with exactly n1 ones. The input is read
/// as an unsigned integer (first bit most significant) and unranked into the
/// weight-n1 words in colexicographic order: a word with ones at positions
/// c_1 < ... < c_n1 has rank sum_j C(c_j, j). k = floor(log2 C(n, n1)).
class MatcherCode {
 public:
  MatcherCode(std::size_t n, std::size_t n1);
  /// Uses only k <= floor(log2 C(n, n1)) input bits.
  MatcherCode(std::size_t n, std::size_t n1, std::size_t k);

  std::size_t n() const { return n_; }
  std::size_t ones() const { return n1_; }
  std::size_t k() const { return k_; }
  /// Largest feasible k for this composition.
  std::size_t max_k() const { return max_k_; }
  /// k / n.
  double rate() const;

  Bits encode(std::span<const std::uint8_t> data) const;
  DecodeResult decode(std::span<const std::uint8_t> word) const;

  /// Colex rank of a weight-n1 word, without codebook membership check.
  mpz_class rank(std::span<const std::uint8_t> word) const;

  /// (P(0), P(1)) averaged over the codebook; equals the composition.
  std::array<double, 2> output_distribution() const;

 private:
  std::size_t n_;
  std::size_t n1_;
  std::size_t k_;
  std::size_t max_k_;
  mpz_class top_binomial_;  // C(n - 1, n1)
};

/// Composition n1 = nearest integer to n * p1, ties toward fewer ones.
std::size_t composition_ones(std::size_t n, double p1);

MatcherCode design_matcher(std::size_t n, double p1);

inline double matcher_rate(const MatcherCode& code) { return code.rate(); }

/// Relative symbol frequencies of an arbitrary sequence.
std::map<int, double> empirical_distribution(std::span<const int> seq);
std::array<double, 2> empirical_distribution(std::span<const std::uint8_t> bits);

}  // namespace pdmkit
