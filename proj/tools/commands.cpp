#include "commands.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pdmkit/allocation.hpp"
#include "pdmkit/ccdm.hpp"
#include "pdmkit/constellation.hpp"
#include "pdmkit/error.hpp"
#include "pdmkit/montecarlo.hpp"
#include "pdmkit/optimizer.hpp"
#include "pdmkit/parallel.hpp"
#include "pdmkit/pas.hpp"
#include "pdmkit/pdm.hpp"
#include "pdmkit/rates.hpp"
#include "pdmkit/scenario.hpp"

namespace pdmkit::cli {

namespace {

using nlohmann::json;

// Writes to the named file, or to `fallback` when the name is empty.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary);
      if (!file_) throw ConfigError("cannot write " + path);
      stream_ = &file_;
    }
  }
  std::ostream& get() { return *stream_; }

 private:
  std::ofstream file_;
  std::ostream* stream_;
};

std::string join(std::span<const double> v, const char* sep = ";") {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += sep;
    s += format_number(v[i]);
  }
  return s;
}

// ---- rates -----------------------------------------------------------------

struct RatesOptions {
  int m = 6;
  std::string scheme = "capacity";
  std::string grid;
  std::string out;
};

int cmd_rates(const RatesOptions& o, std::ostream& out) {
  const auto grid = parse_grid(o.grid);
  make_ask(o.m);
  static const std::map<std::string, int> schemes{{"capacity", 0}, {"bmd-uniform", 1}, {"bmd-mb", 2}, {"pdm", 3}};
  const int scheme = schemes.at(o.scheme);

  std::vector<std::pair<double, std::string>> rows(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) {
    const double snr = db_to_linear(grid[i]);
    if (scheme == 0) {
      rows[i] = {awgn_capacity(snr), ""};
      return;
    }
    const RateScheme rs = scheme == 1 ? RateScheme::UniformBmd
                          : scheme == 2 ? RateScheme::MaxwellBoltzmannBmd
                                        : RateScheme::ProductBmd;
    const auto res = maximize_rate_at_snr(rs, o.m, snr);
    std::string params = "delta=" + format_number(res.scalings.at(0));
    if (rs == RateScheme::MaxwellBoltzmannBmd) params = "nu=" + format_number(res.mb_parameter) + ";" + params;
    if (rs == RateScheme::ProductBmd) params = "upper_probs=" + join(res.upper_probs, "/") + ";" + params;
    rows[i] = {res.objective, params};
  });

  Sink sink(o.out, out);
  auto& os = sink.get();
  os << "snr_db,rate_bpcu,scheme,params\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    os << format_number(grid[i]) << ',' << format_number(rows[i].first) << ',' << o.scheme << ','
       << rows[i].second << '\n';
  }
  return kOk;
}

// ---- table2 ----------------------------------------------------------------

struct Table2Options {
  int m = 6;
  double r_dm = 4.1;
  double gamma = 0.4;
  std::string out;
};

int cmd_table2(const Table2Options& o, std::ostream& out) {
  const double target = transmission_rate(o.r_dm, o.gamma);
  const double capacity_db = linear_to_db(std::exp2(2.0 * target) - 1.0);
  const AskConstellation c = make_ask(o.m);
  const Labeling fec(LabelingKind::Brgc, o.m);

  struct Row {
    std::string name;
    SnrRate rate;
  };
  std::vector<Row> rows;
  {
    const double nu = maxwell_boltzmann_nu(o.m, o.r_dm);
    const auto px = symmetric_from_amplitudes(maxwell_boltzmann_amplitudes(o.m, nu));
    rows.push_back({std::to_string(1 << (o.m - 1)) + "-ary DM", fixed_distribution_rate(px, fec, c)});
  }
  for (int s = 1; s <= o.m - 1; ++s) {
    if (!(o.r_dm > o.m - 1 - s)) continue;  // infeasible with s shaped levels
    const auto res = min_energy_product_dist(o.m, o.r_dm, s);
    rows.push_back({"PDM " + std::to_string(s) + (s == 1 ? " bit shaped" : " bits shaped"),
                    fixed_product_rate(res.distribution())});
  }

  std::vector<double> required(rows.size());
  parallel_for(rows.size(), [&](std::size_t i) {
    required[i] = required_snr_db(rows[i].rate, target, {capacity_db - 1.0, capacity_db + 10.0, 1e-7});
  });

  Sink sink(o.out, out);
  auto& os = sink.get();
  os << "configuration,required_snr_db,gap_to_capacity_db\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    os << rows[i].name << ',' << format_number(required[i]) << ',' << format_number(required[i] - capacity_db)
       << '\n';
  }
  return kOk;
}

// ---- fig5 ------------------------------------------------------------------

struct Fig5Options {
  std::string scenario;
  std::string curves;
  std::string summary;
  std::string grid;
  std::size_t channels_per_group = 0;
};

int cmd_fig5(const Fig5Options& o, std::ostream& out, std::ostream& err) {
  Scenario sc = load_scenario(o.scenario);
  if (!o.grid.empty()) sc.power_grid_db = parse_grid(o.grid);
  if (o.channels_per_group) sc.channels_per_group = o.channels_per_group;
  const ParallelScenario ps = sc.parallel();

  const auto curve = shaped_parallel_curve(ps, sc.power_grid_db);
  const CurveGaps gaps = parallel_gaps_at_se(ps, sc.target_se);

  // Plan echo at the waterfilling power of the target SE.
  const ParallelPoint at = evaluate_parallel_point(ps, gaps.waterfilling_db);
  const BitLoadingPlan plan = at.plan.replicate(sc.channels_per_group);
  const PdmConfig cfg = build_parallel_pdm(plan, at.distribution.p1());
  std::vector<int> sizes;
  for (int e : at.plan.exponents) sizes.push_back(1 << e);
  std::vector<double> entropies;
  for (double q : at.distribution.upper_probs) entropies.push_back(binary_entropy(q));
  json groups = json::object();
  for (const auto& [i, nu] : plan.group_counts()) groups[std::to_string(i)] = nu;

  json summary = {
      {"target_se", sc.target_se},
      {"waterfilling_power_db", gaps.waterfilling_db},
      {"shaped_power_db", gaps.shaped_db},
      {"uniform_power_db", gaps.uniform_db},
      {"shaped_gap_db", gaps.shaped_gap_db()},
      {"uniform_gap_db", gaps.uniform_gap_db()},
      {"plan",
       {{"constellation_sizes", sizes},
        {"channel_powers", at.allocation.powers},
        {"channel_se", at.allocation.se},
        {"channels_per_group", sc.channels_per_group},
        {"group_counts", groups},
        {"dm_lengths", plan.dm_lengths()},
        {"dm_inputs", cfg.level_inputs()},
        {"channel_uses", plan.size()},
        {"fec_length", plan.fec_length()},
        {"gamma", ps.gamma},
        {"code_rate", parallel_code_rate(plan, ps.gamma)},
        {"r_dm", at.r_dm},
        {"upper_probs", at.distribution.upper_probs},
        {"entropies", entropies}}},
  };

  {
    Sink sink(o.curves, out);
    auto& os = sink.get();
    os << "power_db,waterfilling_bpcu,shaped_bpcu,uniform_bpcu,constellations\n";
    for (const auto& p : curve) {
      std::string cons;
      for (std::size_t l = 0; l < p.plan.size(); ++l) {
        if (l) cons += '/';
        cons += std::to_string(1 << p.plan.exponents[l]);
      }
      os << format_number(p.power_db) << ',' << format_number(p.waterfilling) << ',' << format_number(p.shaped)
         << ',' << format_number(p.uniform) << ',' << cons << '\n';
    }
  }
  Sink sink(o.summary, o.curves.empty() ? err : out);
  sink.get() << summary.dump(2) << '\n';
  return kOk;
}

// ---- pdm -------------------------------------------------------------------

struct PdmOptions {
  std::string config;
  std::string in;
  std::string out;
};

int cmd_pdm_encode(const PdmOptions& o, std::ostream& out) {
  const PdmConfig cfg = load_pdm_config(o.config);
  const Bits data = hex_to_bits(read_file(o.in), cfg.input_bits());
  const AmplitudeFrame frame = pdm_encode(cfg, data);
  Sink sink(o.out, out);
  auto& os = sink.get();
  for (std::size_t s = 0; s < frame.amplitudes.size(); ++s) {
    if (s) os << ',';
    os << frame.amplitudes[s];
  }
  os << '\n';
  return kOk;
}

int cmd_pdm_decode(const PdmOptions& o, std::ostream& out) {
  const PdmConfig cfg = load_pdm_config(o.config);
  std::string text = read_file(o.in);
  for (char& ch : text) {
    if (ch == ',' || ch == ';') ch = ' ';
  }
  std::istringstream ss(text);
  std::vector<int> amps;
  for (std::string tok; ss >> tok;) {
    try {
      std::size_t pos = 0;
      amps.push_back(std::stoi(tok, &pos));
      if (pos != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw ConfigError("bad amplitude '" + tok + "'");
    }
  }
  if (amps.size() != cfg.slots()) {
    throw ConfigError("expected " + std::to_string(cfg.slots()) + " amplitudes, got " + std::to_string(amps.size()));
  }
  const auto res = pdm_decode(cfg, amps);
  if (!res.ok()) {
    std::string msg = std::string("decode failed: ") + to_string(res.status);
    if (res.level) msg += " at level " + std::to_string(res.level);
    throw DataIntegrityError(msg);
  }
  Sink sink(o.out, out);
  sink.get() << bits_to_hex(res.bits) << '\n';
  return kOk;
}

// ---- selftest --------------------------------------------------------------

struct SuiteResult {
  std::string name;
  int passed = 0;
  int total = 0;
  std::string error;
};

int cmd_selftest(bool inject_quadrature_fault, std::ostream& out) {
  QuadratureSpec quad;
  if (inject_quadrature_fault) {
    quad.tolerance = 0.0;
    quad.max_halvings = 1;
  }
  std::vector<SuiteResult> results;
  auto suite = [&](const std::string& name, const std::function<void(SuiteResult&)>& body) {
    SuiteResult r;
    r.name = name;
    try {
      body(r);
    } catch (const std::exception& e) {
      r.error = e.what();
      ++r.total;
    }
    results.push_back(r);
  };
  auto check = [](SuiteResult& r, bool ok) {
    ++r.total;
    r.passed += ok ? 1 : 0;
  };

  suite("matcher bijectivity", [&](SuiteResult& r) {
    for (std::size_t n = 1; n <= 10; ++n) {
      for (std::size_t n1 = 0; n1 <= n; ++n1) {
        const MatcherCode code(n, n1);
        bool ok = true;
        for (std::uint64_t d = 0; d < (std::uint64_t{1} << code.k()); ++d) {
          Bits in(code.k());
          for (std::size_t i = 0; i < code.k(); ++i) in[i] = (d >> (code.k() - 1 - i)) & 1;
          const auto word = code.encode(in);
          std::size_t w = 0;
          for (auto b : word) w += b;
          const auto dec = code.decode(word);
          ok = ok && w == n1 && dec.ok() && dec.bits == in;
        }
        check(r, ok);
      }
    }
  });

  suite("pdm round trip", [&](SuiteResult& r) {
    const std::vector<double> p1{0.8, 0.65, 0.55};
    const PdmConfig cfg = build_pdm(4, 64, p1);
    const RandomStream rs(7);
    for (std::uint64_t t = 0; t < 20; ++t) {
      Bits d(cfg.input_bits());
      for (std::size_t i = 0; i < d.size(); ++i) d[i] = rs.substream(t).bits(i) & 1;
      const auto dec = pdm_decode(cfg, pdm_encode(cfg, d).amplitudes);
      check(r, dec.ok() && dec.bits == d);
    }
  });

  suite("entropy identity", [&](SuiteResult& r) {
    const RandomStream rs(11);
    for (std::uint64_t t = 0; t < 20; ++t) {
      const int m = 2 + static_cast<int>(t % 5);
      std::vector<double> p1;
      for (int i = 0; i < m - 1; ++i) p1.push_back(rs.substream(t).uniform(i));
      const auto dist = ProductInputDistribution::from_p1(p1);
      const auto px = induced_symbol_distribution(dist, Labeling(LabelingKind::Nbbc, m), make_ask(m));
      check(r, std::abs(entropy(px) - dist.entropy()) < 1e-12);
    }
  });

  suite("rate identities", [&](SuiteResult& r) {
    for (int m : {2, 3}) {
      AskConstellation c = make_ask(m);
      const Labeling dm(LabelingKind::Nbbc, m), fec(LabelingKind::Brgc, m);
      std::vector<double> p1(static_cast<std::size_t>(m - 1), 0.7);
      const auto dist = ProductInputDistribution::from_p1(p1);
      const auto px = induced_symbol_distribution(dist, dm, c);
      c = scaled_to_snr(c, px, 10.0);
      const double bmd = bmd_rate(px, fec, c, quad);
      check(r, std::abs(pdm_bmd_rate(dist, dm, fec, c, quad) - bmd) < 1e-9);
      check(r, std::abs(gmi_rate(px, bmd_metric(px, fec, c), c, quad) - bmd) < 1e-9);
      const auto pu = uniform_distribution(c);
      const double u1 = bmd_rate(pu, fec, c, quad), u2 = bicm_capacity(pu, fec, c, quad);
      check(r, std::abs(u1 - u2) < 1e-9);
      check(r, std::abs(bicm_capacity(pu, dm, c, quad) - bmd_rate(pu, dm, c, quad)) < 1e-9);
    }
  });

  suite("monte carlo vs quadrature", [&](SuiteResult& r) {
    AskConstellation c = make_ask(3);
    const auto px = uniform_distribution(c);
    c = scaled_to_snr(c, px, 10.0);
    const Labeling fec(LabelingKind::Brgc, 3);
    const auto h = conditional_bit_entropies(px, fec, c, quad);
    const auto mc = estimate_bmd_terms(px, fec, c, 20000, 3);
    for (std::size_t i = 0; i < h.size(); ++i) {
      check(r, std::abs(mc[i].value - h[i]) <= std::max(3.0 * mc[i].std_error, 0.005));
    }
  });

  suite("waterfilling", [&](SuiteResult& r) {
    const auto a = waterfill({{2.0, 1.0, 0.5}, 62.25});
    check(r, std::abs(a.lambda - 1.0 / 64.0) < 1e-12);
    check(r, std::abs(a.sum_se - 3.0) < 1e-12);
    const auto plan = bit_load(a, 16);
    check(r, plan.exponents == std::vector<int>{5, 4, 3});
  });

  bool all = true;
  for (const auto& r : results) {
    const bool ok = r.error.empty() && r.passed == r.total;
    all = all && ok;
    out << (ok ? "PASS " : "FAIL ") << r.name << ": " << r.passed << "/" << r.total;
    if (!r.error.empty()) out << " (" << r.error << ")";
    out << '\n';
  }
  out << (all ? "selftest passed" : "selftest FAILED") << '\n';
  return all ? kOk : kSelftestFailed;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Product distribution matching and probabilistic amplitude shaping toolkit", "pdmkit"};
  app.require_subcommand(1);

  RatesOptions ro;
  auto* rates = app.add_subcommand("rates", "Achievable rates over an SNR grid (CSV)");
  rates->add_option("--constellation", ro.m, "ASK exponent m (2^m points)")->check(CLI::Range(2, 16));
  rates->add_option("--scheme", ro.scheme, "capacity | bmd-uniform | bmd-mb | pdm")
      ->check(CLI::IsMember({"capacity", "bmd-uniform", "bmd-mb", "pdm"}));
  rates->add_option("--snr-grid", ro.grid, "start:stop:step or comma list, in dB")->required();
  rates->add_option("--out", ro.out, "output file (default stdout)");

  Table2Options to;
  auto* table2 = app.add_subcommand("table2", "Required SNRs of the DM configurations (CSV)");
  table2->add_option("--constellation", to.m, "ASK exponent m")->check(CLI::Range(2, 16));
  table2->add_option("--r-dm", to.r_dm, "DM rate in bits per amplitude");
  table2->add_option("--gamma", to.gamma, "fraction of data-carrying signs")->check(CLI::Range(0.0, 1.0));
  table2->add_option("--out", to.out, "output file (default stdout)");

  Fig5Options fo;
  auto* fig5 = app.add_subcommand("fig5", "Waterfilling, shaped and uniform curves for parallel channels");
  fig5->add_option("--scenario", fo.scenario, "scenario JSON file")->required();
  fig5->add_option("--curves", fo.curves, "curve CSV file (default stdout)");
  fig5->add_option("--summary", fo.summary, "summary JSON file");
  fig5->add_option("--power-grid", fo.grid, "override the scenario power grid (dB)");
  fig5->add_option("--channels-per-group", fo.channels_per_group, "channel uses per channel and frame");

  PdmOptions po;
  auto* pdm = app.add_subcommand("pdm", "Encode or decode with a product distribution matcher");
  pdm->require_subcommand(1);
  for (auto* sub : {pdm->add_subcommand("encode", "hex payload -> amplitude CSV"),
                    pdm->add_subcommand("decode", "amplitude CSV -> hex payload")}) {
    sub->add_option("--config", po.config, "matcher configuration JSON")->required();
    sub->add_option("--in", po.in, "input file")->required();
    sub->add_option("--out", po.out, "output file (default stdout)");
  }

  bool inject = false;
  auto* selftest = app.add_subcommand("selftest", "Run the built-in invariant suites");
  selftest->add_flag("--inject-quadrature-fault", inject, "test hook: make the quadrature fail");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsage;
  }

  try {
    if (*rates) return cmd_rates(ro, out);
    if (*table2) return cmd_table2(to, out);
    if (*fig5) return cmd_fig5(fo, out, err);
    if (*pdm) {
      return pdm->got_subcommand("encode") ? cmd_pdm_encode(po, out) : cmd_pdm_decode(po, out);
    }
    if (*selftest) return cmd_selftest(inject, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const DataIntegrityError& e) {
    err << "data integrity: " << e.what() << '\n';
    return kDataIntegrity;
  }
  return kUsage;
}

}  // namespace pdmkit::cli
