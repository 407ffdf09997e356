#include "pdmkit/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <string>

#include "pdmkit/error.hpp"
#include "pdmkit/parallel.hpp"

namespace pdmkit {

std::vector<double> OptimizationResult::p1() const {
  std::vector<double> out;
  for (double q : upper_probs) out.push_back(1.0 - q);
  return out;
}

ProductInputDistribution OptimizationResult::distribution() const {
  const auto p = p1();
  return ProductInputDistribution::from_p1(p);
}

double product_amplitude_energy(std::span<const double> upper_probs) {
  const int m = static_cast<int>(upper_probs.size()) + 1;
  double mean = 1.0, var = 0.0;
  for (int i = 2; i <= m; ++i) {
    const double c = std::ldexp(1.0, m - i + 1);
    const double q = upper_probs[static_cast<std::size_t>(i - 2)];
    mean += c * q;
    var += c * c * q * (1.0 - q);
  }
  return mean * mean + var;
}

namespace {

// Weighted minimum-energy problem over shared levels 2..m.
struct LevelProblem {
  std::map<int, double> exponent_weight;  // channel exponent -> summed objective weight
  std::vector<double> level_weight;       // entropy-constraint weight per level
  std::vector<bool> free;                 // level optimized (else fixed uniform)
  double target = 0.0;

  double objective(std::span<const double> q) const {
    double f = 0.0;
    for (const auto& [e, w] : exponent_weight) {
      f += w * product_amplitude_energy(q.first(static_cast<std::size_t>(e - 1)));
    }
    return f;
  }

  double constraint(std::span<const double> q) const {
    double g = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) g += level_weight[i] * binary_entropy(q[i]);
    return g;
  }

  double max_constraint() const {
    double g = 0.0;
    for (double w : level_weight) g += w;
    return g;
  }

  double min_constraint() const {
    double g = 0.0;
    for (std::size_t i = 0; i < free.size(); ++i) {
      if (!free[i]) g += level_weight[i];
    }
    return g;
  }
};

// Coordinate minimization of objective - mu * constraint. The objective is
// multilinear in q, so each coordinate step has the closed form
// q_i = 1 / (1 + 2^{a_i / (mu w_i)}), a_i = F(q_i = 1) - F(q_i = 0).
int minimize_lagrangian(const LevelProblem& p, double mu, std::vector<double>& q) {
  std::vector<double> probe = q;
  for (int sweep = 1; sweep <= 100000; ++sweep) {
    double change = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
      if (!p.free[i]) continue;
      probe = q;
      probe[i] = 1.0;
      const double f1 = p.objective(probe);
      probe[i] = 0.0;
      const double f0 = p.objective(probe);
      const double next = 1.0 / (1.0 + std::exp2((f1 - f0) / (mu * p.level_weight[i])));
      change = std::max(change, std::abs(next - q[i]));
      q[i] = next;
    }
    if (change < 1e-15) return sweep;
  }
  throw NumericalError("energy minimization: coordinate sweeps did not converge");
}

OptimizationResult solve(const LevelProblem& p, std::span<const double> initial) {
  const std::size_t levels = p.level_weight.size();
  const double gmax = p.max_constraint(), gmin = p.min_constraint();
  if (!(p.target > gmin + 1e-12) || p.target > gmax + 1e-12) {
    throw ConfigError("infeasible DM rate " + std::to_string(p.target) + ": must lie in (" +
                      std::to_string(gmin) + ", " + std::to_string(gmax) + "]");
  }

  OptimizationResult res;
  std::vector<double> q(levels, 0.5);
  if (p.target >= gmax - 1e-12) {
    res.upper_probs = q;
    res.objective = p.objective(q);
    res.residual = std::abs(p.constraint(q) - p.target);
    return res;
  }

  std::vector<double> start(levels, 0.25);
  if (!initial.empty()) {
    if (initial.size() != levels) throw ConfigError("initial point has the wrong number of levels");
    start.assign(initial.begin(), initial.end());
  }
  for (std::size_t i = 0; i < levels; ++i) {
    if (!p.free[i]) start[i] = 0.5;
  }

  int iterations = 0;
  auto evaluate = [&](double mu) {
    q = start;
    iterations += minimize_lagrangian(p, mu, q);
    return p.constraint(q);
  };

  // The constraint value is increasing in mu.
  double lo = 1e-3, hi = 1e3;
  while (evaluate(lo) > p.target) {
    lo *= 1e-3;
    if (lo < 1e-300) throw NumericalError("energy minimization: lower multiplier bracket not found");
  }
  while (evaluate(hi) < p.target) {
    hi *= 1e3;
    if (hi > 1e300) throw NumericalError("energy minimization: upper multiplier bracket not found");
  }
  double g = 0.0;
  for (int it = 0; it < 400; ++it) {
    const double mid = std::sqrt(lo * hi);
    g = evaluate(mid);
    if (std::abs(g - p.target) <= 1e-12) break;
    if (g < p.target) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi / lo - 1.0 < 1e-15) break;
  }
  res.residual = std::abs(g - p.target);
  if (res.residual > 1e-6) throw NumericalError("energy minimization: constraint residual too large");
  res.upper_probs = q;
  res.objective = p.objective(q);
  res.iterations = iterations;
  return res;
}

}  // namespace

OptimizationResult min_energy_product_dist(int m, double r_dm, int shaped_levels,
                                           std::span<const double> initial) {
  if (m < 2 || m > 16) throw ConfigError("constellation exponent must be in [2, 16]");
  if (shaped_levels < 0 || shaped_levels > m - 1) throw ConfigError("shaped level count out of range");
  LevelProblem p;
  p.exponent_weight[m] = 1.0;
  p.level_weight.assign(static_cast<std::size_t>(m - 1), 1.0);
  p.free.assign(static_cast<std::size_t>(m - 1), false);
  for (int i = 0; i < shaped_levels; ++i) p.free[static_cast<std::size_t>(i)] = true;
  p.target = r_dm;
  return solve(p, initial);
}

OptimizationResult min_weighted_energy_parallel(const BitLoadingPlan& plan,
                                                std::span<const double> gains, double r_dm,
                                                std::span<const double> initial) {
  plan.validate();
  LevelProblem p;
  for (std::size_t l = 0; l < plan.size(); ++l) {
    if (plan.channel[l] >= gains.size()) throw ConfigError("plan refers to a channel without a gain");
    const double h = gains[plan.channel[l]];
    if (!(h > 0.0)) throw ConfigError("channel gains must be positive");
    p.exponent_weight[plan.exponents[l]] += 1.0 / (h * h);
  }
  const auto n = plan.dm_lengths();
  for (std::size_t ni : n) {
    p.level_weight.push_back(static_cast<double>(ni) / static_cast<double>(plan.size()));
  }
  p.free.assign(n.size(), true);
  p.target = r_dm;
  return solve(p, initial);
}

std::vector<double> maxwell_boltzmann_amplitudes(int m, double nu) {
  if (nu < 0.0) throw ConfigError("Maxwell-Boltzmann parameter must be nonnegative");
  const std::size_t count = std::size_t{1} << (m - 1);
  std::vector<double> pa(count);
  double total = 0.0;
  for (std::size_t r = 0; r < count; ++r) {
    const double a = static_cast<double>(2 * r + 1);
    pa[r] = std::exp(-nu * (a * a - 1.0));
    total += pa[r];
  }
  for (double& v : pa) v /= total;
  return pa;
}

double maxwell_boltzmann_nu(int m, double amplitude_entropy) {
  if (!(amplitude_entropy > 0.0) || amplitude_entropy > m - 1) {
    throw ConfigError("amplitude entropy must lie in (0, m-1]");
  }
  if (amplitude_entropy >= m - 1 - 1e-15) return 0.0;
  auto h = [&](double nu) { return entropy(maxwell_boltzmann_amplitudes(m, nu)); };
  double lo = 0.0, hi = 1e-3;
  while (h(hi) > amplitude_entropy) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-17 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (h(mid) > amplitude_entropy) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

const char* to_string(RateScheme s) {
  switch (s) {
    case RateScheme::UniformBmd: return "bmd-uniform";
    case RateScheme::MaxwellBoltzmannBmd: return "bmd-mb";
    case RateScheme::ProductBmd: return "pdm";
  }
  return "unknown";
}

namespace {

// Golden-section maximization on [a, b]; returns (argmax, value).
std::pair<double, double> golden_max(const std::function<double(double)>& f, double a, double b,
                                     double tol, int& evaluations) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - inv_phi * (b - a), x2 = a + inv_phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  evaluations += 2;
  while (b - a > tol) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    }
    ++evaluations;
  }
  return f1 >= f2 ? std::pair{x1, f1} : std::pair{x2, f2};
}

}  // namespace

OptimizationResult maximize_rate_at_snr(RateScheme scheme, int m, double snr,
                                        const QuadratureSpec& quad) {
  if (!(snr > 0.0)) throw ConfigError("SNR must be positive");
  const AskConstellation c = make_ask(m);
  const Labeling fec(LabelingKind::Brgc, m);
  OptimizationResult res;

  if (scheme == RateScheme::UniformBmd) {
    res.px = uniform_distribution(c);
    const auto scaled = scaled_to_snr(c, res.px, snr);
    res.objective = bmd_rate(res.px, fec, scaled, quad);
    res.upper_probs.assign(static_cast<std::size_t>(m - 1), 0.5);
    res.scalings = {scaled.delta};
    return res;
  }

  if (scheme == RateScheme::MaxwellBoltzmannBmd) {
    auto rate_of_entropy = [&](double h) {
      const auto px = symmetric_from_amplitudes(maxwell_boltzmann_amplitudes(m, maxwell_boltzmann_nu(m, h)));
      return bmd_rate(px, fec, scaled_to_snr(c, px, snr), quad);
    };
    const auto [h, rate] = golden_max(rate_of_entropy, 0.05, m - 1.0, 1e-6, res.iterations);
    const double at_uniform = rate_of_entropy(m - 1.0);
    const double best_h = at_uniform >= rate ? m - 1.0 : h;
    res.mb_parameter = maxwell_boltzmann_nu(m, best_h);
    res.px = symmetric_from_amplitudes(maxwell_boltzmann_amplitudes(m, res.mb_parameter));
    const auto scaled = scaled_to_snr(c, res.px, snr);
    res.objective = bmd_rate(res.px, fec, scaled, quad);
    res.scalings = {scaled.delta};
    return res;
  }

  // Product levels: start on the minimum-energy family, then refine each
  // level by golden-section sweeps.
  const Labeling dm(LabelingKind::Nbbc, m);
  auto rate_of = [&](std::span<const double> upper) {
    std::vector<double> p1(upper.size());
    for (std::size_t i = 0; i < upper.size(); ++i) p1[i] = 1.0 - upper[i];
    const auto dist = ProductInputDistribution::from_p1(p1);
    const auto px = induced_symbol_distribution(dist, dm, c);
    return pdm_bmd_rate(dist, dm, fec, scaled_to_snr(c, px, snr), quad);
  };
  auto family = [&](double h) {
    return min_energy_product_dist(m, h, m - 1).upper_probs;
  };
  auto [h0, rate0] = golden_max([&](double h) { return rate_of(family(h)); }, 0.05, m - 1.0, 1e-4,
                                res.iterations);
  std::vector<double> q(static_cast<std::size_t>(m - 1), 0.5);
  double best = rate_of(q);
  if (rate0 > best) {
    q = family(h0);
    best = rate0;
  }

  constexpr int kMaxPasses = 50;
  for (int pass = 1;; ++pass) {
    if (pass > kMaxPasses) throw NumericalError("rate maximization: iteration cap exceeded");
    const double before = best;
    for (std::size_t i = 0; i < q.size(); ++i) {
      std::vector<double> trial = q;
      auto along = [&](double v) {
        trial[i] = v;
        return rate_of(trial);
      };
      const double a = std::max(0.0, q[i] - 0.05), b = std::min(0.5, q[i] + 0.05);
      const auto [v, r] = golden_max(along, a, b, 1e-7, res.iterations);
      if (r > best) {
        best = r;
        q[i] = v;
      }
    }
    res.residual = best - before;
    if (best - before < 1e-5) break;
  }
  res.upper_probs = q;
  res.objective = best;
  res.px = induced_symbol_distribution(res.distribution(), dm, c);
  res.scalings = {scaled_to_snr(c, res.px, snr).delta};
  return res;
}

SnrRate optimized_rate(RateScheme scheme, int m, QuadratureSpec quad) {
  return [scheme, m, quad](double snr) { return maximize_rate_at_snr(scheme, m, snr, quad).objective; };
}

ParallelPoint evaluate_parallel_point(const ParallelScenario& scenario, double power_db) {
  ParallelPoint pt;
  pt.power_db = power_db;
  const ParallelChannelSet set{scenario.gains, db_to_linear(power_db)};
  pt.allocation = waterfill(set);
  pt.waterfilling = pt.allocation.sum_se;
  pt.plan = bit_load(pt.allocation, scenario.m_max);
  if (pt.plan.size() == 0) throw NumericalError("no active channel at " + std::to_string(power_db) + " dB");

  // DM rate per plan channel use so that the system SE equals C_WF.
  const double total = static_cast<double>(set.size());
  const double active = static_cast<double>(pt.plan.size());
  double ceiling = 0.0;
  for (std::size_t n : pt.plan.dm_lengths()) ceiling += static_cast<double>(n) / active;
  pt.r_dm = std::clamp(pt.waterfilling * total / active - scenario.gamma, 1e-3, ceiling);

  try {
    pt.distribution = min_weighted_energy_parallel(pt.plan, scenario.gains, pt.r_dm);
  } catch (const std::exception& e) {
    throw NumericalError("power point " + std::to_string(power_db) + " dB: " + e.what());
  }

  double shaped = 0.0, uniform = 0.0;
  for (std::size_t l = 0; l < pt.plan.size(); ++l) {
    const std::size_t ch = pt.plan.channel[l];
    const int e = pt.plan.exponents[l];
    const double h = scenario.gains[ch];
    const double snr = h * h * pt.allocation.powers[ch];
    const AskConstellation c = make_ask(e);
    const Labeling dm(LabelingKind::Nbbc, e), fec(LabelingKind::Brgc, e);

    std::vector<double> p1;
    for (int i = 2; i <= e; ++i) p1.push_back(1.0 - pt.distribution.upper_probs[static_cast<std::size_t>(i - 2)]);
    const auto dist = ProductInputDistribution::from_p1(p1);
    const auto px = induced_symbol_distribution(dist, dm, c);
    const auto scaled = scaled_to_snr(c, px, snr);
    pt.distribution.scalings.push_back(scaled.delta / h);
    shaped += pdm_bmd_rate(dist, dm, fec, scaled, scenario.quad);

    const auto pu = uniform_distribution(c);
    uniform += bmd_rate(pu, fec, scaled_to_snr(c, pu, snr), scenario.quad);
  }
  pt.shaped = shaped / total;
  pt.uniform = uniform / total;
  return pt;
}

std::vector<ParallelPoint> shaped_parallel_curve(const ParallelScenario& scenario,
                                                 std::span<const double> power_grid_db) {
  std::vector<ParallelPoint> out(power_grid_db.size());
  parallel_for(power_grid_db.size(),
               [&](std::size_t i) { out[i] = evaluate_parallel_point(scenario, power_grid_db[i]); });
  return out;
}

CurveGaps parallel_gaps_at_se(const ParallelScenario& scenario, double target_se) {
  CurveGaps gaps;
  gaps.target_se = target_se;
  gaps.waterfilling_db = linear_to_db(waterfilling_power_for_se(scenario.gains, target_se));
  const RootSearch search{gaps.waterfilling_db - 0.5, gaps.waterfilling_db + 6.0, 1e-6};
  gaps.shaped_db = required_snr_db(
      [&](double p) { return evaluate_parallel_point(scenario, linear_to_db(p)).shaped; }, target_se, search);
  gaps.uniform_db = required_snr_db(
      [&](double p) { return evaluate_parallel_point(scenario, linear_to_db(p)).uniform; }, target_se, search);
  return gaps;
}

}  // namespace pdmkit
