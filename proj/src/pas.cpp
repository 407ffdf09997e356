#include "pdmkit/pas.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "pdmkit/error.hpp"

namespace pdmkit {

namespace {

double check_gamma(double gamma) {
  constexpr double slack = 1e-12;
  if (!(gamma >= -slack && gamma <= 1.0 + slack)) {
    throw ConfigError("PAS requires 0 <= gamma <= 1, got gamma = " + std::to_string(gamma));
  }
  return std::clamp(gamma, 0.0, 1.0);
}

struct PlanSums {
  double channels = 0.0;  // sum nu_i
  double bits = 0.0;      // sum i nu_i
};

PlanSums plan_sums(const BitLoadingPlan& plan) {
  plan.validate();
  PlanSums s;
  for (const auto& [i, nu] : plan.group_counts()) {
    s.channels += static_cast<double>(nu);
    s.bits += static_cast<double>(i) * static_cast<double>(nu);
  }
  return s;
}

}  // namespace

double gamma_from_code_rate(double code_rate, int m) {
  if (m < 2) throw ConfigError("constellation exponent must be >= 2");
  return check_gamma(1.0 - (1.0 - code_rate) * m);
}

double code_rate_from_gamma(double gamma, int m) {
  if (m < 2) throw ConfigError("constellation exponent must be >= 2");
  check_gamma(gamma);
  return (m - 1.0 + gamma) / m;
}

double parallel_code_rate(const BitLoadingPlan& plan, double gamma) {
  check_gamma(gamma);
  const auto s = plan_sums(plan);
  return (s.bits - s.channels + gamma * s.channels) / s.bits;
}

double parallel_gamma(const BitLoadingPlan& plan, double code_rate) {
  const auto s = plan_sums(plan);
  return check_gamma(1.0 - (1.0 - code_rate) * s.bits / s.channels);
}

double transmission_rate(double dm_rate, double gamma) {
  if (dm_rate < 0.0 || gamma < 0.0) throw ConfigError("rates must be nonnegative");
  return dm_rate + gamma;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

Bits PseudoRandomParity::parity(std::span<const std::uint8_t> systematic, std::size_t count) const {
  const std::size_t words = (systematic.size() + 63) / 64;
  std::vector<std::uint64_t> packed(words, 0);
  for (std::size_t i = 0; i < systematic.size(); ++i) {
    if (systematic[i]) packed[i / 64] |= std::uint64_t{1} << (i % 64);
  }
  Bits out(count);
  for (std::size_t j = 0; j < count; ++j) {
    std::uint64_t acc = 0;
    for (std::size_t w = 0; w < words; ++w) {
      acc ^= packed[w] & splitmix64(seed_ + (static_cast<std::uint64_t>(j) << 32) + w);
    }
    out[j] = static_cast<std::uint8_t>(std::popcount(acc) & 1);
  }
  return out;
}

Bits systematic_bits(const AmplitudeFrame& frame, std::span<const std::uint8_t> data_signs) {
  Bits out;
  for (std::size_t s = 0; s < frame.amplitudes.size(); ++s) {
    const int m = frame.exponents[s];
    const Labeling fec(LabelingKind::Brgc, m);
    // positive point with this amplitude has ascending index 2^{m-1} + (a - 1) / 2
    const std::size_t point = (std::size_t{1} << (m - 1)) + static_cast<std::size_t>((frame.amplitudes[s] - 1) / 2);
    for (int level = 2; level <= m; ++level) out.push_back(static_cast<std::uint8_t>(fec.bit(point, level)));
  }
  out.insert(out.end(), data_signs.begin(), data_signs.end());
  return out;
}

Bits make_sign_bits(const AmplitudeFrame& frame, std::span<const std::uint8_t> data_signs,
                    const ParityEncoder& encoder) {
  const std::size_t L = frame.amplitudes.size();
  if (data_signs.size() > L) throw ConfigError("more data sign bits than channel uses");
  const Bits sys = systematic_bits(frame, data_signs);
  const Bits par = encoder.parity(sys, L - data_signs.size());
  Bits signs(data_signs.begin(), data_signs.end());
  signs.insert(signs.end(), par.begin(), par.end());
  return signs;
}

SymbolFrame assemble_frame(const AmplitudeFrame& frame, std::span<const std::uint8_t> sign_bits,
                           std::size_t data_sign_count, std::span<const double> scalings) {
  const std::size_t L = frame.amplitudes.size();
  if (sign_bits.size() != L) {
    throw ConfigError("frame needs " + std::to_string(L) + " sign bits, got " + std::to_string(sign_bits.size()));
  }
  if (scalings.size() != L) throw ConfigError("one scaling per channel use required");
  if (data_sign_count > L) throw ConfigError("data sign count exceeds frame length");
  SymbolFrame out;
  out.symbols.resize(L);
  out.sign_bits.assign(sign_bits.begin(), sign_bits.end());
  out.data_sign.assign(L, 0);
  for (std::size_t s = 0; s < L; ++s) {
    const double sign = sign_bits[s] ? 1.0 : -1.0;
    out.symbols[s] = sign * frame.amplitudes[s] * scalings[s];
    if (s < data_sign_count) out.data_sign[s] = 1;
  }
  out.data_signs = data_sign_count;
  out.parity_signs = L - data_sign_count;
  return out;
}

}  // namespace pdmkit
