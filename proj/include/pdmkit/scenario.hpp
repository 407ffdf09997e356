#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "pdmkit/constellation.hpp"
#include "pdmkit/optimizer.hpp"
#include "pdmkit/pdm.hpp"

namespace pdmkit {

/// Parallel-channel scenario file (schemas/scenario.schema.json).
struct Scenario {
  std::vector<double> gains;
  double target_se = 3.0;
  std::optional<double> gamma;
  std::optional<double> code_rate;
  std::optional<double> sum_power_db;
  std::vector<double> power_grid_db;
  int m_max = 16;
  std::size_t channels_per_group = 1;
  std::uint64_t seed = 1;
  double quadrature_tolerance = 1e-7;

  /// gamma, or the gamma implied by code_rate on the plan at the target SE.
  double resolved_gamma() const;
  ParallelScenario parallel() const;
};

Scenario parse_scenario(const nlohmann::json& j);
Scenario load_scenario(const std::string& path);

/// "start:stop:step" (inclusive) or a comma-separated list; empty gives {}.
std::vector<double> parse_grid(const std::string& spec);

/// Nine significant digits, as used in every CSV output.
std::string format_number(double v);

/// Bits packed MSB-first into bytes, zero padded, as lowercase hex.
std::string bits_to_hex(std::span<const std::uint8_t> bits);
/// Exactly ceil(bits / 8) bytes are required and padding bits must be zero.
Bits hex_to_bits(const std::string& hex, std::size_t bits);

/// Matcher configuration file: a plan (exponents per physical channel plus
/// channels_per_group) or a single constellation with a length, and level
/// targets as p1 or upper_probs. Optional k overrides the level input lengths
/// (single-channel form only).
PdmConfig parse_pdm_config(const nlohmann::json& j);
PdmConfig load_pdm_config(const std::string& path);

std::string read_file(const std::string& path);

}  // namespace pdmkit
