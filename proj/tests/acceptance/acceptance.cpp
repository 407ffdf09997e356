// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "pdmkit/allocation.hpp"
#include "pdmkit/ccdm.hpp"
#include "pdmkit/constellation.hpp"
#include "pdmkit/montecarlo.hpp"
#include "pdmkit/optimizer.hpp"
#include "pdmkit/pas.hpp"
#include "pdmkit/pdm.hpp"
#include "pdmkit/rates.hpp"
#include "pdmkit/scenario.hpp"

using namespace pdmkit;

namespace {

// Collects failed checks with a message; a criterion passes when none failed.
struct Criterion {
  std::vector<std::string> failures;
  std::vector<std::string> notes;

  void check(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
  void note(const std::string& s) { notes.push_back(s); }
};

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

bool near(double value, double expected, double tol) { return std::abs(value - expected) <= tol; }

std::string run_cli(std::vector<const char*> args) {
  args.insert(args.begin(), "pdmkit");
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(args.size()), args.data(), out, err);
  if (code != 0) throw std::runtime_error("pdmkit " + std::string(args[1]) + " exited with " + std::to_string(code) + ": " + err.str());
  return out.str();
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream is(text);
  for (std::string line; std::getline(is, line);) {
    std::vector<std::string> f;
    std::istringstream ls(line);
    for (std::string x; std::getline(ls, x, ',');) f.push_back(x);
    rows.push_back(f);
  }
  return rows;
}

void capacity_anchor(Criterion& c) {
  const double closed = 10 * std::log10(511.0);
  const double root = required_snr_db([](double s) { return awgn_capacity(s); }, 4.5);
  c.check(near(closed, 27.08, 0.01), "closed form " + fmt(closed));
  c.check(near(root, 27.08, 0.01), "root search " + fmt(root));
  c.check(near(root, closed, 1e-6), "root vs closed form");
  c.note("required " + fmt(root) + " dB");
}

void dm_configurations(Criterion& c) {
  const auto rows = parse_csv(run_cli({"table2"}));
  const std::vector<std::pair<std::string, double>> expect{
      {"32-ary DM", 27.13},         {"PDM 1 bit shaped", 28.29},  {"PDM 2 bits shaped", 27.48},
      {"PDM 3 bits shaped", 27.35}, {"PDM 4 bits shaped", 27.32}, {"PDM 5 bits shaped", 27.31}};
  c.check(rows.size() == expect.size() + 1, "row count");
  for (std::size_t i = 0; i < expect.size() && i + 1 < rows.size(); ++i) {
    const auto& r = rows[i + 1];
    const double tol = i == 1 ? 0.15 : 0.10;
    const double v = std::stod(r.at(1));
    c.check(r.at(0) == expect[i].first, "row name " + r.at(0));
    c.check(near(v, expect[i].second, tol), r.at(0) + " " + fmt(v));
    c.note(r.at(0) + "=" + fmt(v, 3));
  }
}

void ask64_deltas(Criterion& c) {
  const RootSearch search{20.0, 30.0, 1e-6};
  const double pdm = required_snr_db(optimized_rate(RateScheme::ProductBmd, 6), 4.0, search);
  const double mb = required_snr_db(optimized_rate(RateScheme::MaxwellBoltzmannBmd, 6), 4.0, search);
  const double uni = required_snr_db(optimized_rate(RateScheme::UniformBmd, 6), 4.0, search);
  c.check(near(pdm - mb, 0.16, 0.05), "pdm vs mb " + fmt(pdm - mb));
  c.check(near(uni - pdm, 1.8, 0.1), "uniform vs pdm " + fmt(uni - pdm));
  c.note("pdm-mb=" + fmt(pdm - mb, 3) + " uniform-pdm=" + fmt(uni - pdm, 3));
}

void waterfilling_example(Criterion& c) {
  const std::vector<double> gains{2.0, 1.0, 0.5};
  const double power = waterfilling_power_for_se(gains, 3.0);
  const auto a = waterfill({gains, power});
  c.check(near(a.lambda, 1.0 / 64.0, 1e-6), "lambda");
  const double p[] = {63.75, 63.0, 60.0}, se[] = {4.0, 3.0, 2.0};
  for (std::size_t l = 0; l < 3; ++l) {
    c.check(near(a.powers[l], p[l], 1e-6), "power " + std::to_string(l));
    c.check(near(a.se[l], se[l], 1e-6), "se " + std::to_string(l));
  }
  c.check(near(power, 62.25, 1e-6), "sum power " + fmt(power, 9));
  c.check(near(10 * std::log10(power), 17.94, 0.005), "sum power in dB");
  c.note("P=" + fmt(power, 6) + " (" + fmt(10 * std::log10(power), 3) + " dB)");
}

void parallel_design(Criterion& c) {
  const std::vector<double> gains{2.0, 1.0, 0.5};
  const double power = waterfilling_power_for_se(gains, 3.0);
  const auto base = bit_load(waterfill({gains, power}), 16);
  c.check(base.exponents == std::vector<int>{5, 4, 3}, "bit loading");
  const auto plan = base.replicate(300);
  c.check(plan.dm_lengths() == std::vector<std::size_t>{900, 900, 600, 300}, "level lengths");
  c.check(plan.fec_length() == 3600, "fec length");
  const double gamma = 1.0 / 3.0;
  c.check(near(parallel_code_rate(plan, gamma), 5.0 / 6.0, 1e-12), "code rate");
  c.check(near(parallel_gamma(plan, 5.0 / 6.0), gamma, 1e-12), "gamma");
  const auto r = min_weighted_energy_parallel(plan, gains, 3.0 - gamma);
  const double q[] = {0.1995, 0.3736, 0.4408, 0.4709}, h[] = {0.7208, 0.9534, 0.9898, 0.9976};
  std::string s;
  for (std::size_t i = 0; i < 4; ++i) {
    const double hi = binary_entropy(r.upper_probs[i]);
    c.check(near(r.upper_probs[i], q[i], 0.01), "P(B=0) level " + std::to_string(i + 2) + " " + fmt(r.upper_probs[i]));
    c.check(near(hi, h[i], 0.005), "H level " + std::to_string(i + 2) + " " + fmt(hi));
    s += (i ? "/" : "") + fmt(r.upper_probs[i]);
  }
  c.note("P(B=0)=" + s);
}

void parallel_gaps(Criterion& c) {
  ParallelScenario sc;
  sc.gains = {2.0, 1.0, 0.5};
  const auto g = parallel_gaps_at_se(sc, 3.0);
  c.check(g.shaped_gap_db() <= 0.35, "shaped gap " + fmt(g.shaped_gap_db()));
  c.check(g.shaped_gap_db() >= 0.0, "shaped gap is negative");
  c.check(near(g.uniform_gap_db(), 1.22, 0.15), "uniform gap " + fmt(g.uniform_gap_db()));
  c.note("shaped=" + fmt(g.shaped_gap_db(), 3) + " uniform=" + fmt(g.uniform_gap_db(), 3) + " dB");
}

void matcher_properties(Criterion& c) {
  // exhaustive bijectivity for every n <= 16 and every composition
  std::size_t codes = 0;
  for (std::size_t n = 1; n <= 16; ++n) {
    for (std::size_t n1 = 0; n1 <= n; ++n1) {
      const MatcherCode code(n, n1);
      const std::size_t words = std::size_t{1} << code.k();
      std::vector<std::uint8_t> seen(std::size_t{1} << n, 0);
      bool ok = true;
      for (std::size_t v = 0; v < words && ok; ++v) {
        Bits data(code.k());
        for (std::size_t b = 0; b < code.k(); ++b) data[b] = (v >> (code.k() - 1 - b)) & 1u;
        const Bits out = code.encode(data);
        std::size_t key = 0, ones = 0;
        for (std::size_t j = 0; j < n; ++j) {
          key |= std::size_t{out[j]} << j;
          ones += out[j];
        }
        const auto back = code.decode(out);
        ok = ones == n1 && !seen[key] && back.ok() && back.bits == data;
        seen[key] = 1;
      }
      c.check(ok, "n=" + std::to_string(n) + " n1=" + std::to_string(n1));
      ++codes;
    }
  }
  // randomized round trips at n = 10800
  std::mt19937_64 rng(10800);
  for (double p1 : {0.2, 0.35, 0.5}) {
    const auto code = design_matcher(10800, p1);
    const int trials = p1 == 0.2 ? 1000 : 50;
    for (int t = 0; t < trials; ++t) {
      Bits data(code.k());
      for (auto& b : data) b = rng() & 1u;
      const auto back = code.decode(code.encode(data));
      c.check(back.ok() && back.bits == data, "round trip n=10800 p1=" + fmt(p1, 2));
    }
  }
  const auto big = design_matcher(10000, 0.2);
  c.check(std::abs(big.rate() - binary_entropy(0.2)) <= 0.01, "rate " + fmt(big.rate()));
  c.note(std::to_string(codes) + " codes exhaustive, k/n=" + fmt(big.rate()) + " H=" + fmt(binary_entropy(0.2)));
}

void identity_suite(Criterion& c) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> uni(0.05, 0.95);
  double worst = 0.0;
  for (int m : {2, 3, 4, 5, 6}) {
    const auto c0 = make_ask(m);
    const Labeling dm(LabelingKind::Nbbc, m), gray(LabelingKind::Brgc, m);
    for (double snr_db : {0.0, 8.0, 16.0, 24.0}) {
      std::vector<double> p1(static_cast<std::size_t>(m - 1));
      for (auto& v : p1) v = uni(rng);
      const auto dist = ProductInputDistribution::from_p1(p1);
      const auto px = induced_symbol_distribution(dist, dm, c0);
      const auto cs = scaled_to_snr(c0, px, db_to_linear(snr_db));
      const double bmd = bmd_rate(px, gray, cs);
      const double d1 = std::abs(pdm_bmd_rate(dist, dm, gray, cs) - bmd);
      const double d2 = std::abs(gmi_rate(px, bmd_metric(px, gray, cs), cs) - bmd);

      const auto pu = uniform_distribution(c0);
      const auto cu = scaled_to_snr(c0, pu, db_to_linear(snr_db));
      const double ug = bmd_rate(pu, gray, cu), un = bmd_rate(pu, dm, cu);
      const double d3 = std::abs(ug - bicm_capacity(pu, gray, cu));
      const double d4 = std::abs(un - bicm_capacity(pu, dm, cu));
      const double d5 = std::abs(pdm_bmd_rate(ProductInputDistribution::uniform(m), dm, gray, cu) - ug);
      for (double d : {d1, d2, d3, d4, d5}) worst = std::max(worst, d);
      c.check(d1 <= 1e-9, "product identity m=" + std::to_string(m));
      c.check(d2 <= 1e-9, "gmi identity m=" + std::to_string(m));
      c.check(d3 <= 1e-9 && d4 <= 1e-9, "bicm identity m=" + std::to_string(m));
      c.check(d5 <= 1e-9, "uniform product m=" + std::to_string(m));
    }
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "max deviation %.2e", worst);
  c.note(buf);
}

void monte_carlo(Criterion& c) {
  std::size_t compared = 0;
  double worst = 0.0;
  for (const auto& [m, grid] : std::vector<std::pair<int, std::vector<double>>>{
           {3, {0.0, 5.0, 10.0, 15.0, 20.0}}, {6, {10.0, 15.0, 20.0, 25.0, 30.0}}}) {
    const auto c0 = make_ask(m);
    const Labeling gray(LabelingKind::Brgc, m), dm(LabelingKind::Nbbc, m);
    const auto shaped = min_energy_product_dist(m, m - 1.5, m - 1);
    const std::vector<std::vector<double>> inputs{uniform_distribution(c0),
                                                  induced_symbol_distribution(shaped.distribution(), dm, c0)};
    for (const auto& px : inputs) {
      for (double snr_db : grid) {
        const auto cs = scaled_to_snr(c0, px, db_to_linear(snr_db));
        const auto q = conditional_bit_entropies(px, gray, cs);
        const auto mc = estimate_bmd_terms(px, gray, cs, 100000, 2024);
        for (std::size_t i = 0; i < q.size(); ++i) {
          const double tol = std::max(3.0 * mc[i].std_error, 0.005);
          const double d = std::abs(mc[i].value - q[i]);
          worst = std::max(worst, d / tol);
          c.check(d <= tol, "m=" + std::to_string(m) + " snr=" + fmt(snr_db, 1) + " level " + std::to_string(i + 1) +
                                 " mc=" + fmt(mc[i].value) + " quad=" + fmt(q[i]));
          ++compared;
        }
      }
    }
    // worker-count independence
    const auto cs = scaled_to_snr(c0, inputs[1], db_to_linear(grid[2]));
    const auto a = estimate_bmd_terms(inputs[1], gray, cs, 50000, 99, 1);
    const auto b = estimate_bmd_terms(inputs[1], gray, cs, 50000, 99, 4);
    bool same = true;
    for (std::size_t i = 0; i < a.size(); ++i) same = same && a[i].value == b[i].value && a[i].std_error == b[i].std_error;
    c.check(same, "worker determinism m=" + std::to_string(m));
  }
  c.note(std::to_string(compared) + " level estimates, worst |diff|/tol=" + fmt(worst, 3));
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Criterion&)>>> criteria{
      {"1 capacity anchor", capacity_anchor},
      {"2 DM configuration required SNRs", dm_configurations},
      {"3 64-ASK deltas at 4 bpcu", ask64_deltas},
      {"4 waterfilling example", waterfilling_example},
      {"5 three-channel PDM design", parallel_design},
      {"6 parallel-channel gaps at SE 3.0", parallel_gaps},
      {"7 matcher properties", matcher_properties},
      {"8 identity suite", identity_suite},
      {"9 monte carlo vs quadrature", monte_carlo},
  };
  int failed = 0;
  for (const auto& [name, body] : criteria) {
    Criterion c;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      body(c);
    } catch (const std::exception& e) {
      c.failures.push_back(std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool ok = c.failures.empty();
    failed += ok ? 0 : 1;
    std::cout << (ok ? "PASS " : "FAIL ") << name << " (" << fmt(secs, 1) << " s)";
    for (const auto& n : c.notes) std::cout << " | " << n;
    std::cout << '\n';
    for (const auto& f : c.failures) std::cout << "    " << f << '\n';
    std::cout.flush();
  }
  std::cout << (failed ? std::to_string(failed) + " criteria failed" : std::string("all criteria passed")) << '\n';
  return failed ? 1 : 0;
}
