#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "pdmkit/allocation.hpp"
#include "pdmkit/constellation.hpp"
#include "pdmkit/pdm.hpp"

namespace pdmkit {

/// gamma = 1 - (1 - R_c) m. Throws ConfigError outside [0, 1].
double gamma_from_code_rate(double code_rate, int m);
/// R_c = (m - 1 + gamma) / m.
double code_rate_from_gamma(double gamma, int m);

/// R_c = sum_i (i - 1 + gamma) nu_i / sum_i i nu_i.
double parallel_code_rate(const BitLoadingPlan& plan, double gamma);
/// gamma = 1 - (1 - R_c) sum_i i nu_i / sum_i nu_i.
double parallel_gamma(const BitLoadingPlan& plan, double code_rate);

/// R_tx = DM rate + gamma.
double transmission_rate(double dm_rate, double gamma);

/// n_c = L + sum_i n_i.
inline std::size_t fec_frame_length(const BitLoadingPlan& plan) { return plan.fec_length(); }

/// Systematic encoder interface: parity bits for a block of systematic bits.
class ParityEncoder {
 public:
  virtual ~ParityEncoder() = default;
  virtual Bits parity(std::span<const std::uint8_t> systematic, std::size_t count) const = 0;
};

/// Random linear code [I | P] with P drawn from a splitmix64 sequence.
///
/// Parity bit j is the XOR of the systematic bits selected by row j of P;
/// row j, word w is splitmix64(seed + (j << 32) + w), one bit per systematic
/// position (word w covers positions 64w .. 64w + 63).
class PseudoRandomParity : public ParityEncoder {
 public:
  explicit PseudoRandomParity(std::uint64_t seed) : seed_(seed) {}
  Bits parity(std::span<const std::uint8_t> systematic, std::size_t count) const override;

 private:
  std::uint64_t seed_;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Signed, scaled channel symbols of one frame.
struct SymbolFrame {
  std::vector<double> symbols;
  Bits sign_bits;                 // 0 -> negative
  std::vector<std::uint8_t> data_sign;  // 1 where the sign carries a data bit
  std::size_t data_signs = 0;
  std::size_t parity_signs = 0;
};

/// Bits presented to the FEC encoder: for every slot, the BRGC amplitude
/// label bits b2..b_m of its amplitude, followed by the data sign bits.
Bits systematic_bits(const AmplitudeFrame& frame, std::span<const std::uint8_t> data_signs);

/// Sign bits of a frame: the first data_signs.size() slots carry data, the
/// remaining slots carry parity from `encoder`.
Bits make_sign_bits(const AmplitudeFrame& frame, std::span<const std::uint8_t> data_signs,
                    const ParityEncoder& encoder);

/// x = (2 s - 1) a delta per slot; `data_sign_count` leading slots are data.
SymbolFrame assemble_frame(const AmplitudeFrame& frame, std::span<const std::uint8_t> sign_bits,
                           std::size_t data_sign_count, std::span<const double> scalings);

}  // namespace pdmkit
