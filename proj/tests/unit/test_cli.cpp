#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "commands.hpp"
#include "pdmkit/error.hpp"
#include "pdmkit/scenario.hpp"

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::initializer_list<const char*> args) {
  std::vector<const char*> argv{"pdmkit"};
  argv.insert(argv.end(), args.begin(), args.end());
  std::ostringstream out, err;
  const int code = pdmkit::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> v;
  std::istringstream is(s);
  for (std::string l; std::getline(is, l);) v.push_back(l);
  return v;
}

std::vector<std::string> fields(const std::string& line) {
  std::vector<std::string> v;
  std::istringstream is(line);
  for (std::string f; std::getline(is, f, ',');) v.push_back(f);
  return v;
}

std::filesystem::path temp_file(const std::string& name, const std::string& content) {
  const auto p = std::filesystem::temp_directory_path() / ("pdmkit_test_" + name);
  std::ofstream(p, std::ios::binary) << content;
  return p;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(is), {});
}

const std::string kScenarios = std::string(PDMKIT_SOURCE_DIR) + "/scenarios/";

}  // namespace

TEST_CASE("usage errors and help") {
  CHECK(run({}).code == 2);
  CHECK(run({"rates", "--bogus"}).code == 2);
  CHECK(run({"rates", "--snr-grid", "0:1:1", "--scheme", "nope"}).code == 2);
  CHECK(run({"rates", "--snr-grid", "0:1:1", "--constellation", "1"}).code == 2);
  CHECK(run({"rates", "--snr-grid", "1:0:x"}).code == 2);
  CHECK(run({"--help"}).code == 0);
  CHECK(run({"rates", "--help"}).code == 0);
}

TEST_CASE("rates csv") {
  const auto empty = run({"rates", "--snr-grid", ""});
  CHECK(empty.code == 0);
  CHECK(lines(empty.out).size() == 1);

  const auto cap = run({"rates", "--scheme", "capacity", "--snr-grid", "27.0842"});
  REQUIRE(cap.code == 0);
  const auto rows = lines(cap.out);
  REQUIRE(rows.size() == 2);
  CHECK(std::abs(std::stod(fields(rows[1])[1]) - 4.5) < 1e-4);

  const auto a = run({"rates", "--scheme", "pdm", "--constellation", "3", "--snr-grid", "0:10:5"});
  const auto b = run({"rates", "--scheme", "pdm", "--constellation", "3", "--snr-grid", "0:10:5"});
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(lines(a.out).size() == 4);

  for (const char* scheme : {"bmd-uniform", "bmd-mb"}) {
    const auto r = run({"rates", "--scheme", scheme, "--constellation", "3", "--snr-grid", "5,15"});
    CHECK(r.code == 0);
    CHECK(lines(r.out).size() == 3);
  }
}

TEST_CASE("table2 csv") {
  const auto r = run({"table2"});
  REQUIRE(r.code == 0);
  const auto rows = lines(r.out);
  REQUIRE(rows.size() == 7);
  CHECK(rows[0] == "configuration,required_snr_db,gap_to_capacity_db");
  const double cap = 10 * std::log10(511.0);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto f = fields(rows[i]);
    REQUIRE(f.size() == 3);
    CHECK(std::stod(f[2]) == doctest::Approx(std::stod(f[1]) - cap).epsilon(1e-6));
  }
}

TEST_CASE("fig5 curves and summary") {
  const auto curves = std::filesystem::temp_directory_path() / "pdmkit_test_curves.csv";
  const auto summary = std::filesystem::temp_directory_path() / "pdmkit_test_summary.json";
  const std::string sc = kScenarios + "fig5.json";
  const auto r = run({"fig5", "--scenario", sc.c_str(), "--power-grid", "10:20:5", "--curves", curves.c_str(),
                      "--summary", summary.c_str()});
  REQUIRE(r.code == 0);
  const auto rows = lines(slurp(curves));
  REQUIRE(rows.size() == 4);
  CHECK(rows[0] == "power_db,waterfilling_bpcu,shaped_bpcu,uniform_bpcu,constellations");
  const auto j = nlohmann::json::parse(slurp(summary));
  CHECK(j["plan"]["fec_length"] == 3600);
  CHECK(j["plan"]["constellation_sizes"] == nlohmann::json({32, 16, 8}));
  CHECK(j["shaped_gap_db"].get<double>() <= 0.35);
  CHECK(std::abs(j["uniform_gap_db"].get<double>() - 1.22) <= 0.15);

  const auto bad = temp_file("bad_scenario.json", R"({"gains": [1.0], "target_se": 1.0, "colour": 3})");
  CHECK(run({"fig5", "--scenario", bad.c_str()}).code == 2);
  CHECK(run({"fig5", "--scenario", "/nonexistent/scenario.json"}).code == 2);
}

TEST_CASE("pdm encode and decode round trip") {
  const std::string cfg = kScenarios + "ask8_pdm.json";
  const auto in = temp_file("payload.hex", "3a5c1c\n");
  const auto amps = std::filesystem::temp_directory_path() / "pdmkit_test_amps.csv";
  const auto back = std::filesystem::temp_directory_path() / "pdmkit_test_back.hex";
  REQUIRE(run({"pdm", "encode", "--config", cfg.c_str(), "--in", in.c_str(), "--out", amps.c_str()}).code == 0);
  const auto csv = slurp(amps);
  CHECK(fields(lines(csv)[0]).size() == 16);
  REQUIRE(run({"pdm", "decode", "--config", cfg.c_str(), "--in", amps.c_str(), "--out", back.c_str()}).code == 0);
  CHECK(slurp(back) == "3a5c1c\n");

  // swapping amplitudes 1 and 3 flips one bit of the last level
  auto tampered = csv;
  tampered[0] = tampered[0] == '1' ? '3' : '1';
  const auto t = temp_file("tampered.csv", tampered);
  const auto dec = run({"pdm", "decode", "--config", cfg.c_str(), "--in", t.c_str()});
  CHECK(dec.code == 4);
  CHECK(dec.err.find("decode failed") != std::string::npos);

  const auto short_in = temp_file("short.hex", "3a5c\n");
  const auto enc = run({"pdm", "encode", "--config", cfg.c_str(), "--in", short_in.c_str()});
  CHECK(enc.code == 2);
  CHECK(enc.err.find("22 bits") != std::string::npos);

  const auto padded = temp_file("padded.hex", "3a5c1f\n");
  CHECK(run({"pdm", "encode", "--config", cfg.c_str(), "--in", padded.c_str()}).code == 2);

  const auto few = temp_file("few.csv", "1,3,5\n");
  CHECK(run({"pdm", "decode", "--config", cfg.c_str(), "--in", few.c_str()}).code == 2);
}

TEST_CASE("selftest") {
  const auto ok = run({"selftest"});
  CHECK(ok.code == 0);
  CHECK(ok.out.find("selftest passed") != std::string::npos);
  const auto bad = run({"selftest", "--inject-quadrature-fault"});
  CHECK(bad.code == 1);
  CHECK(bad.out.find("FAIL") != std::string::npos);
}

TEST_CASE("grid, number and hex formats") {
  CHECK(pdmkit::parse_grid("").empty());
  CHECK(pdmkit::parse_grid("0:1:0.25") == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
  CHECK(pdmkit::parse_grid("0:30:2").size() == 16);
  CHECK(pdmkit::parse_grid("3, 1.5,7") == std::vector<double>{3.0, 1.5, 7.0});
  CHECK_THROWS_AS(pdmkit::parse_grid("1:0:1"), pdmkit::ConfigError);
  CHECK_THROWS_AS(pdmkit::parse_grid("0:1:0"), pdmkit::ConfigError);
  CHECK_THROWS_AS(pdmkit::parse_grid("1,x"), pdmkit::ConfigError);
  CHECK(pdmkit::format_number(27.08418) == "27.08418");
  CHECK(pdmkit::format_number(1.0 / 3.0) == "0.333333333");

  const pdmkit::Bits bits{1, 0, 1, 1, 0, 0, 0, 1, 1, 1};
  CHECK(pdmkit::bits_to_hex(bits) == "b1c0");
  CHECK(pdmkit::hex_to_bits("B1C0", 10) == bits);
  CHECK(pdmkit::hex_to_bits("b1 c0\n", 10) == bits);
  CHECK_THROWS_AS(pdmkit::hex_to_bits("b1c1", 10), pdmkit::ConfigError);
  CHECK_THROWS_AS(pdmkit::hex_to_bits("b1", 10), pdmkit::ConfigError);
  CHECK_THROWS_AS(pdmkit::hex_to_bits("b1zz", 10), pdmkit::ConfigError);
}

TEST_CASE("scenario and matcher configuration files") {
  const auto sc = pdmkit::load_scenario(kScenarios + "fig5.json");
  CHECK(sc.gains == std::vector<double>{2.0, 1.0, 0.5});
  CHECK(sc.power_grid_db.size() == 16);
  CHECK(sc.channels_per_group == 300);
  CHECK(sc.resolved_gamma() == doctest::Approx(1.0 / 3.0));

  using nlohmann::json;
  const auto by_rate = pdmkit::parse_scenario(json{{"gains", {2.0, 1.0, 0.5}}, {"code_rate", 5.0 / 6.0}});
  CHECK(by_rate.resolved_gamma() == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
  CHECK_THROWS_AS(pdmkit::parse_scenario(json{{"gains", {1.0}}, {"gamma", 0.3}, {"code_rate", 0.9}}),
                  pdmkit::ConfigError);
  CHECK_THROWS_AS(pdmkit::parse_scenario(json{{"gains", {1.0}}, {"quadrature_tolerance", 1e-5}}), pdmkit::ConfigError);
  CHECK_THROWS_AS(pdmkit::parse_scenario(json{{"gains", {1.0}}, {"m_max", 17}}), pdmkit::ConfigError);
  CHECK_THROWS_AS(pdmkit::parse_scenario(json{{"gains", "two"}}), pdmkit::ConfigError);

  const auto t3 = pdmkit::load_pdm_config(kScenarios + "parallel_pdm.json");
  CHECK(t3.slots() == 900);
  CHECK(t3.input_bits() == 2378);
  const auto ask8 = pdmkit::load_pdm_config(kScenarios + "ask8_pdm.json");
  CHECK(ask8.input_bits() == 22);
  CHECK_THROWS_AS(pdmkit::parse_pdm_config(json{{"constellation", 3}, {"length", 16}}), pdmkit::ConfigError);
  CHECK_THROWS_AS(pdmkit::parse_pdm_config(
                      json{{"constellation", 3}, {"length", 16}, {"p1", {0.7, 0.6}}, {"upper_probs", {0.3, 0.4}}}),
                  pdmkit::ConfigError);
  CHECK_THROWS_AS(
      pdmkit::parse_pdm_config(json{{"constellation", 3}, {"length", 16}, {"p1", {0.7, 0.6}}, {"channels_per_group", 2}}),
      pdmkit::ConfigError);
  CHECK_THROWS_AS(pdmkit::parse_pdm_config(json{{"exponents", {3, 2}}, {"p1", {0.7, 0.6}}, {"k", {1, 1}}}),
                  pdmkit::ConfigError);
  const auto with_k = pdmkit::parse_pdm_config(json{{"constellation", 3}, {"length", 16}, {"p1", {0.75, 0.6}}, {"k", {5, 4}}});
  CHECK(with_k.input_bits() == 9);
}
