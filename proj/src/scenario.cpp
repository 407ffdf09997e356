#include "pdmkit/scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "pdmkit/allocation.hpp"
#include "pdmkit/error.hpp"
#include "pdmkit/pas.hpp"
#include "pdmkit/rates.hpp"

namespace pdmkit {

using nlohmann::json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

json parse_json_file(const std::string& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

template <class T>
T get(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("field '") + key + "': " + e.what());
  }
}

void reject_unknown(const json& j, std::initializer_list<const char*> known) {
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw ConfigError("unknown field '" + key + "'");
  }
}

}  // namespace

double Scenario::resolved_gamma() const {
  if (gamma) return *gamma;
  if (!code_rate) throw ConfigError("scenario needs gamma or code_rate");
  const double power = waterfilling_power_for_se(gains, target_se);
  const auto plan = bit_load(waterfill({gains, power}), m_max);
  return parallel_gamma(plan, *code_rate);
}

ParallelScenario Scenario::parallel() const {
  ParallelScenario p;
  p.gains = gains;
  p.gamma = resolved_gamma();
  p.m_max = m_max;
  p.quad.tolerance = quadrature_tolerance;
  return p;
}

Scenario parse_scenario(const json& j) {
  if (!j.is_object()) throw ConfigError("scenario must be a JSON object");
  reject_unknown(j, {"gains", "target_se", "gamma", "code_rate", "sum_power_db", "power_grid_db",
                     "m_max", "channels_per_group", "seed", "quadrature_tolerance"});
  Scenario s;
  s.gains = get<std::vector<double>>(j, "gains");
  ParallelChannelSet{s.gains, 1.0}.validate();
  if (j.contains("target_se")) s.target_se = get<double>(j, "target_se");
  if (!(s.target_se > 0.0)) throw ConfigError("target_se must be positive");
  if (j.contains("gamma")) s.gamma = get<double>(j, "gamma");
  if (j.contains("code_rate")) s.code_rate = get<double>(j, "code_rate");
  if (s.gamma && s.code_rate) throw ConfigError("give either gamma or code_rate, not both");
  if (!s.gamma && !s.code_rate) s.gamma = 1.0 / 3.0;
  if (s.gamma && (*s.gamma < 0.0 || *s.gamma > 1.0)) throw ConfigError("gamma must lie in [0, 1]");
  if (s.code_rate && (*s.code_rate <= 0.0 || *s.code_rate > 1.0)) throw ConfigError("code_rate must lie in (0, 1]");
  if (j.contains("sum_power_db")) s.sum_power_db = get<double>(j, "sum_power_db");
  if (j.contains("power_grid_db")) {
    const auto& g = j.at("power_grid_db");
    if (g.is_string()) {
      s.power_grid_db = parse_grid(g.get<std::string>());
    } else {
      s.power_grid_db = get<std::vector<double>>(j, "power_grid_db");
    }
  }
  if (j.contains("m_max")) s.m_max = get<int>(j, "m_max");
  if (s.m_max < 2 || s.m_max > 16) throw ConfigError("m_max must lie in [2, 16]");
  if (j.contains("channels_per_group")) s.channels_per_group = get<std::size_t>(j, "channels_per_group");
  if (s.channels_per_group == 0) throw ConfigError("channels_per_group must be positive");
  if (j.contains("seed")) s.seed = get<std::uint64_t>(j, "seed");
  if (j.contains("quadrature_tolerance")) s.quadrature_tolerance = get<double>(j, "quadrature_tolerance");
  if (!(s.quadrature_tolerance > 0.0) || s.quadrature_tolerance > 1e-6) {
    throw ConfigError("quadrature_tolerance must lie in (0, 1e-6]");
  }
  return s;
}

Scenario load_scenario(const std::string& path) { return parse_scenario(parse_json_file(path)); }

std::vector<double> parse_grid(const std::string& spec) {
  std::vector<double> out;
  if (spec.find_first_not_of(" \t") == std::string::npos) return out;
  auto to_double = [&](const std::string& s) {
    try {
      std::size_t pos = 0;
      const double v = std::stod(s, &pos);
      if (s.find_first_not_of(" \t", pos) != std::string::npos) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw ConfigError("bad number '" + s + "' in grid '" + spec + "'");
    }
  };
  if (spec.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    if (parts.size() != 3) throw ConfigError("grid range must be start:stop:step");
    const double a = to_double(parts[0]), b = to_double(parts[1]), step = to_double(parts[2]);
    if (!(step > 0.0) || b < a) throw ConfigError("grid range needs step > 0 and stop >= start");
    const auto count = static_cast<std::size_t>(std::floor((b - a) / step + 1e-9)) + 1;
    for (std::size_t i = 0; i < count; ++i) out.push_back(a + step * static_cast<double>(i));
    return out;
  }
  std::stringstream ss(spec);
  for (std::string p; std::getline(ss, p, ',');) out.push_back(to_double(p));
  return out;
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::string bits_to_hex(std::span<const std::uint8_t> bits) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  const std::size_t bytes = (bits.size() + 7) / 8;
  for (std::size_t b = 0; b < bytes; ++b) {
    unsigned v = 0;
    for (std::size_t i = 0; i < 8; ++i) {
      const std::size_t idx = 8 * b + i;
      v = (v << 1) | (idx < bits.size() && bits[idx] ? 1u : 0u);
    }
    out.push_back(digits[v >> 4]);
    out.push_back(digits[v & 15]);
  }
  return out;
}

Bits hex_to_bits(const std::string& hex, std::size_t bits) {
  std::string digits;
  for (char ch : hex) {
    if (std::isspace(static_cast<unsigned char>(ch))) continue;
    if (!std::isxdigit(static_cast<unsigned char>(ch))) throw ConfigError("payload is not hexadecimal");
    digits.push_back(ch);
  }
  const std::size_t bytes = (bits + 7) / 8;
  if (digits.size() != 2 * bytes) {
    throw ConfigError("payload must hold exactly " + std::to_string(bits) + " bits (" + std::to_string(bytes) +
                      " bytes), got " + std::to_string(digits.size() / 2) + " bytes");
  }
  Bits out(bits);
  for (std::size_t b = 0; b < bytes; ++b) {
    const unsigned v = static_cast<unsigned>(std::stoul(digits.substr(2 * b, 2), nullptr, 16));
    for (std::size_t i = 0; i < 8; ++i) {
      const std::size_t idx = 8 * b + i;
      const auto bit = static_cast<std::uint8_t>((v >> (7 - i)) & 1u);
      if (idx < bits) {
        out[idx] = bit;
      } else if (bit) {
        throw ConfigError("payload padding bits must be zero");
      }
    }
  }
  return out;
}

PdmConfig parse_pdm_config(const json& j) {
  if (!j.is_object()) throw ConfigError("matcher configuration must be a JSON object");
  reject_unknown(j, {"exponents", "channels_per_group", "constellation", "length", "p1", "upper_probs", "k"});
  std::vector<double> p1;
  if (j.contains("p1") == j.contains("upper_probs")) throw ConfigError("give exactly one of p1 or upper_probs");
  if (j.contains("p1")) {
    p1 = get<std::vector<double>>(j, "p1");
  } else {
    for (double q : get<std::vector<double>>(j, "upper_probs")) p1.push_back(1.0 - q);
  }
  for (double p : p1) {
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("level probabilities must lie in [0, 1]");
  }

  if (j.contains("exponents")) {
    if (j.contains("constellation") || j.contains("length")) {
      throw ConfigError("give either exponents or constellation/length");
    }
    if (j.contains("k")) throw ConfigError("k overrides are only supported for a single constellation");
    BitLoadingPlan plan;
    const auto exps = get<std::vector<int>>(j, "exponents");
    for (std::size_t l = 0; l < exps.size(); ++l) {
      plan.exponents.push_back(exps[l]);
      plan.channel.push_back(l);
    }
    plan.validate();
    std::size_t copies = 1;
    if (j.contains("channels_per_group")) copies = get<std::size_t>(j, "channels_per_group");
    return build_parallel_pdm(plan.replicate(copies), p1);
  }
  if (j.contains("channels_per_group")) throw ConfigError("channels_per_group needs the exponents form");
  const int m = get<int>(j, "constellation");
  const auto n = get<std::size_t>(j, "length");
  if (j.contains("k")) {
    const auto k = get<std::vector<std::size_t>>(j, "k");
    return build_pdm(m, n, p1, k);
  }
  return build_pdm(m, n, p1);
}

PdmConfig load_pdm_config(const std::string& path) { return parse_pdm_config(parse_json_file(path)); }

}  // namespace pdmkit
