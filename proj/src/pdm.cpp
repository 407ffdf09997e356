#include "pdmkit/pdm.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "pdmkit/error.hpp"

namespace pdmkit {

std::size_t PdmConfig::input_bits() const {
  std::size_t k = 0;
  for (const auto& code : levels) k += code.k();
  return k;
}

std::vector<std::size_t> PdmConfig::level_inputs() const {
  std::vector<std::size_t> k;
  for (const auto& code : levels) k.push_back(code.k());
  return k;
}

std::vector<std::size_t> PdmConfig::level_lengths() const {
  std::vector<std::size_t> n;
  for (const auto& code : levels) n.push_back(code.n());
  return n;
}

namespace {

void check_targets(int m, std::span<const double> p1) {
  if (m < 2 || m > 16) throw ConfigError("PDM exponent must be in [2, 16]");
  if (p1.size() != static_cast<std::size_t>(m - 1)) {
    throw ConfigError("expected " + std::to_string(m - 1) + " level targets, got " +
                      std::to_string(p1.size()));
  }
}

}  // namespace

PdmConfig build_pdm(int m, std::size_t n, std::span<const double> p1) {
  check_targets(m, p1);
  if (n == 0) throw ConfigError("PDM output length must be positive");
  PdmConfig cfg;
  cfg.m = m;
  for (double p : p1) cfg.levels.push_back(design_matcher(n, p));
  cfg.slot_exponents.assign(n, m);
  cfg.slot_channel.assign(n, 0);
  return cfg;
}

PdmConfig build_pdm(int m, std::size_t n, std::span<const double> p1,
                    std::span<const std::size_t> k) {
  PdmConfig cfg = build_pdm(m, n, p1);
  if (k.size() != cfg.levels.size()) throw ConfigError("one input length per level required");
  for (std::size_t i = 0; i < k.size(); ++i) {
    const auto& code = cfg.levels[i];
    cfg.levels[i] = MatcherCode(code.n(), code.ones(), k[i]);
  }
  return cfg;
}

PdmConfig build_parallel_pdm(const BitLoadingPlan& plan, std::span<const double> p1) {
  if (plan.size() == 0) throw ConfigError("bit-loading plan is empty");
  plan.validate();
  const int m = plan.max_exponent();
  check_targets(m, p1);

  std::vector<std::size_t> order(plan.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return plan.exponents[a] > plan.exponents[b];
  });

  PdmConfig cfg;
  cfg.m = m;
  for (std::size_t s : order) {
    cfg.slot_exponents.push_back(plan.exponents[s]);
    cfg.slot_channel.push_back(plan.channel[s]);
  }
  const auto n = plan.dm_lengths();
  for (std::size_t i = 0; i < n.size(); ++i) cfg.levels.push_back(design_matcher(n[i], p1[i]));
  return cfg;
}

int amplitude_from_level_bits(std::span<const std::uint8_t> level_bits, int m) {
  int rank = 0;
  for (int i = 2; i <= m; ++i) {
    rank = (rank << 1) | (level_bits[static_cast<std::size_t>(i - 2)] ? 0 : 1);
  }
  return 2 * rank + 1;
}

int level_bit_of_amplitude(int amplitude, int m, int level) {
  const int rank = (amplitude - 1) / 2;
  return ((rank >> (m - level)) & 1) ? 0 : 1;
}

AmplitudeFrame pdm_encode(const PdmConfig& cfg, std::span<const std::uint8_t> data) {
  const std::size_t k = cfg.input_bits();
  if (data.size() != k) {
    throw ConfigError("PDM expects " + std::to_string(k) + " data bits, got " +
                      std::to_string(data.size()));
  }
  std::vector<Bits> planes;
  planes.reserve(cfg.levels.size());
  std::size_t offset = 0;
  for (const auto& code : cfg.levels) {
    planes.push_back(code.encode(data.subspan(offset, code.k())));
    offset += code.k();
  }

  AmplitudeFrame frame;
  frame.exponents = cfg.slot_exponents;
  frame.amplitudes.resize(cfg.slots());
  std::vector<std::uint8_t> bits;
  for (std::size_t s = 0; s < cfg.slots(); ++s) {
    const int ms = cfg.slot_exponents[s];
    bits.assign(static_cast<std::size_t>(ms - 1), 0);
    for (int i = 2; i <= ms; ++i) bits[i - 2] = planes[static_cast<std::size_t>(i - 2)][s];
    frame.amplitudes[s] = amplitude_from_level_bits(bits, ms);
  }
  return frame;
}

PdmDecodeResult pdm_decode(const PdmConfig& cfg, std::span<const int> amplitudes) {
  if (amplitudes.size() != cfg.slots()) {
    throw ConfigError("PDM expects " + std::to_string(cfg.slots()) + " amplitudes, got " +
                      std::to_string(amplitudes.size()));
  }
  for (std::size_t s = 0; s < amplitudes.size(); ++s) {
    const int a = amplitudes[s];
    if (a < 1 || a % 2 == 0 || a > (1 << cfg.slot_exponents[s]) - 1) {
      return {DecodeStatus::InvalidSymbol, 0, {}};
    }
  }

  PdmDecodeResult res;
  res.bits.reserve(cfg.input_bits());
  Bits plane;
  for (std::size_t li = 0; li < cfg.levels.size(); ++li) {
    const int level = static_cast<int>(li) + 2;
    const auto& code = cfg.levels[li];
    plane.resize(code.n());
    for (std::size_t j = 0; j < code.n(); ++j) {
      plane[j] = static_cast<std::uint8_t>(
          level_bit_of_amplitude(amplitudes[j], cfg.slot_exponents[j], level));
    }
    auto dec = code.decode(plane);
    if (!dec.ok()) return {dec.status, level, {}};
    res.bits.insert(res.bits.end(), dec.bits.begin(), dec.bits.end());
  }
  return res;
}

double parallel_pdm_rate(const PdmConfig& cfg) {
  if (cfg.slots() == 0) return 0.0;
  return static_cast<double>(cfg.input_bits()) / static_cast<double>(cfg.slots());
}

double asymptotic_pdm_rate(std::span<const double> level_entropies,
                           std::span<const std::size_t> level_lengths, std::size_t slots) {
  if (level_entropies.size() != level_lengths.size()) {
    throw ConfigError("entropy and length lists differ in size");
  }
  if (slots == 0) throw ConfigError("slot count must be positive");
  double sum = 0.0;
  for (std::size_t i = 0; i < level_entropies.size(); ++i) {
    sum += level_entropies[i] * static_cast<double>(level_lengths[i]);
  }
  return sum / static_cast<double>(slots);
}

std::vector<double> slot_amplitude_marginal(const PdmConfig& cfg, int m) {
  if (m < 2 || m > cfg.m) throw ConfigError("slot exponent outside the configuration");
  const std::size_t count = std::size_t{1} << (m - 1);
  std::vector<double> pa(count, 1.0);
  for (std::size_t r = 0; r < count; ++r) {
    const int a = static_cast<int>(2 * r + 1);
    for (int i = 2; i <= m; ++i) {
      const double p1 = cfg.levels[static_cast<std::size_t>(i - 2)].output_distribution()[1];
      pa[r] *= level_bit_of_amplitude(a, m, i) ? p1 : 1.0 - p1;
    }
  }
  return pa;
}

}  // namespace pdmkit
