#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "pdmkit/allocation.hpp"
#include "pdmkit/ccdm.hpp"

namespace pdmkit {

/// Product distribution matcher: one binary matcher per amplitude level.
///
/// Slots are channel uses ordered by descending exponent. The level-i matcher
/// has output length n_i = number of slots with exponent >= i, and its j-th
/// output bit is level i of slot j. Data bits are consumed by level 2 first.
/// The single-channel matcher of length n is the special case of n slots with
/// the same exponent.
struct PdmConfig {
  int m = 2;                         // largest exponent
  std::vector<MatcherCode> levels;   // levels[0] is level 2
  std::vector<int> slot_exponents;   // descending
  std::vector<std::size_t> slot_channel;  // physical channel of each slot

  std::size_t slots() const { return slot_exponents.size(); }
  std::size_t input_bits() const;  // sum k_i
  std::vector<std::size_t> level_inputs() const;   // k_i
  std::vector<std::size_t> level_lengths() const;  // n_i
};

/// Amplitudes of one frame, aligned with PdmConfig slots.
struct AmplitudeFrame {
  std::vector<int> amplitudes;  // odd, 1 .. 2^{m_s} - 1
  std::vector<int> exponents;
};

/// Single-channel matcher: 2^m-ASK amplitudes, output length n.
/// `p1` holds the target P(B_i = 1) for levels 2..m.
PdmConfig build_pdm(int m, std::size_t n, std::span<const double> p1);
/// As above, with explicit input lengths k_i (each at most the level's capacity).
PdmConfig build_pdm(int m, std::size_t n, std::span<const double> p1,
                    std::span<const std::size_t> k);

/// Matcher for parallel channels sharing amplitude levels.
PdmConfig build_parallel_pdm(const BitLoadingPlan& plan, std::span<const double> p1);

/// Amplitude of a slot with exponent `m` from its level bits (level 2 first),
/// using the complemented natural-binary amplitude label.
int amplitude_from_level_bits(std::span<const std::uint8_t> level_bits, int m);
/// Level bit `level` (2..m) of an amplitude.
int level_bit_of_amplitude(int amplitude, int m, int level);

AmplitudeFrame pdm_encode(const PdmConfig& cfg, std::span<const std::uint8_t> data);

struct PdmDecodeResult {
  DecodeStatus status = DecodeStatus::Ok;
  int level = 0;  // offending level (2..m) when status != Ok
  Bits bits;

  bool ok() const { return status == DecodeStatus::Ok; }
};

PdmDecodeResult pdm_decode(const PdmConfig& cfg, std::span<const int> amplitudes);

/// sum k_i / L.
double parallel_pdm_rate(const PdmConfig& cfg);
/// (sum_i H_i n_i) / L, the large-blocklength limit.
double asymptotic_pdm_rate(std::span<const double> level_entropies,
                           std::span<const std::size_t> level_lengths, std::size_t slots);

/// Exact amplitude marginal of a slot with exponent m: product of the level
/// compositions n1_i / n_i. Indexed by amplitude rank (amplitude 2r + 1).
std::vector<double> slot_amplitude_marginal(const PdmConfig& cfg, int m);

}  // namespace pdmkit
