#include "pdmkit/allocation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "pdmkit/error.hpp"

namespace pdmkit {

void ParallelChannelSet::validate() const {
  if (gains.empty()) throw ConfigError("channel set is empty");
  for (double h : gains) {
    if (!(h > 0.0) || !std::isfinite(h)) throw ConfigError("channel gains must be positive");
  }
  if (!(power > 0.0) || !std::isfinite(power)) throw ConfigError("power budget must be positive");
}

namespace {

double mean_power(std::span<const double> inv_gain2, double lambda) {
  double sum = 0.0;
  for (double g : inv_gain2) sum += std::max(1.0 / lambda - g, 0.0);
  return sum / static_cast<double>(inv_gain2.size());
}

}  // namespace

Allocation waterfill(const ParallelChannelSet& channels) {
  channels.validate();
  const std::size_t L = channels.size();
  std::vector<double> inv_gain2(L);
  double g2_min = INFINITY, g2_max = 0.0;
  for (std::size_t l = 0; l < L; ++l) {
    const double g2 = channels.gains[l] * channels.gains[l];
    inv_gain2[l] = 1.0 / g2;
    g2_min = std::min(g2_min, g2);
    g2_max = std::max(g2_max, g2);
  }

  // mean_power is decreasing in lambda; bisect in the log domain.
  double lo = g2_min * std::ldexp(1.0, -128);
  double hi = g2_max;
  for (int it = 0; it < 200; ++it) {
    const double mid = std::sqrt(lo * hi);
    if (mean_power(inv_gain2, mid) > channels.power) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  double lambda = std::sqrt(lo * hi);

  // Closed form on the active set: 1/lambda = (L P + sum_active 1/h^2) / |active|.
  for (int pass = 0; pass < 4; ++pass) {
    double inv_sum = 0.0;
    std::size_t active = 0;
    for (double g : inv_gain2) {
      if (g < 1.0 / lambda) {
        inv_sum += g;
        ++active;
      }
    }
    if (active == 0) break;
    const double refined = static_cast<double>(active) / (static_cast<double>(L) * channels.power + inv_sum);
    if (refined == lambda) break;
    lambda = refined;
  }

  Allocation a;
  a.lambda = lambda;
  a.powers.resize(L);
  a.se.resize(L);
  for (std::size_t l = 0; l < L; ++l) {
    a.powers[l] = std::max(1.0 / lambda - inv_gain2[l], 0.0);
    a.se[l] = a.powers[l] > 0.0 ? 0.5 * std::log2(1.0 / (inv_gain2[l] * lambda)) : 0.0;
  }
  a.sum_se = std::accumulate(a.se.begin(), a.se.end(), 0.0) / static_cast<double>(L);
  return a;
}

double waterfilling_sum_se(const ParallelChannelSet& channels) { return waterfill(channels).sum_se; }

double waterfilling_power_for_se(std::span<const double> gains, double target_se) {
  if (!(target_se > 0.0)) throw ConfigError("target SE must be positive");
  ParallelChannelSet set{{gains.begin(), gains.end()}, 1.0};
  double lo = 1e-12, hi = 1e12;
  for (int it = 0; it < 200 && hi / lo > 1.0 + 1e-15; ++it) {
    set.power = std::sqrt(lo * hi);
    if (waterfilling_sum_se(set) < target_se) {
      lo = set.power;
    } else {
      hi = set.power;
    }
  }
  return std::sqrt(lo * hi);
}

int BitLoadingPlan::max_exponent() const {
  return exponents.empty() ? 0 : *std::max_element(exponents.begin(), exponents.end());
}

std::map<int, std::size_t> BitLoadingPlan::group_counts() const {
  std::map<int, std::size_t> nu;
  for (int m : exponents) ++nu[m];
  return nu;
}

std::vector<std::size_t> BitLoadingPlan::dm_lengths() const {
  const int m = max_exponent();
  std::vector<std::size_t> n(m >= 2 ? static_cast<std::size_t>(m - 1) : 0, 0);
  for (int e : exponents) {
    for (int i = 2; i <= e; ++i) ++n[static_cast<std::size_t>(i - 2)];
  }
  return n;
}

std::size_t BitLoadingPlan::fec_length() const {
  const auto n = dm_lengths();
  return size() + std::accumulate(n.begin(), n.end(), std::size_t{0});
}

BitLoadingPlan BitLoadingPlan::replicate(std::size_t copies) const {
  if (copies == 0) throw ConfigError("replication count must be positive");
  BitLoadingPlan out;
  for (std::size_t j = 0; j < size(); ++j) {
    for (std::size_t c = 0; c < copies; ++c) {
      out.exponents.push_back(exponents[j]);
      out.channel.push_back(channel[j]);
    }
  }
  return out;
}

void BitLoadingPlan::validate() const {
  if (exponents.empty()) throw ConfigError("bit-loading plan is empty");
  if (channel.size() != exponents.size()) throw ConfigError("bit-loading plan channel map size mismatch");
  for (int m : exponents) {
    if (m < 2 || m > 16) throw ConfigError("plan exponent out of range [2, 16]: " + std::to_string(m));
  }
}

BitLoadingPlan BitLoadingPlan::from_group_counts(const std::map<int, std::size_t>& nu) {
  BitLoadingPlan plan;
  std::size_t group = 0;
  for (auto it = nu.rbegin(); it != nu.rend(); ++it, ++group) {
    for (std::size_t j = 0; j < it->second; ++j) {
      plan.exponents.push_back(it->first);
      plan.channel.push_back(group);
    }
  }
  plan.validate();
  return plan;
}

BitLoadingPlan bit_load(const Allocation& allocation, int m_max) {
  if (m_max < 2) throw ConfigError("largest constellation exponent must be >= 2");
  BitLoadingPlan plan;
  for (std::size_t l = 0; l < allocation.powers.size(); ++l) {
    if (!(allocation.powers[l] > 0.0)) continue;
    const int m = static_cast<int>(std::floor(allocation.se[l] + 1.5));
    plan.exponents.push_back(std::clamp(m, 2, m_max));
    plan.channel.push_back(l);
  }
  return plan;
}

namespace {

// argmax over [0, upper] of f by golden-section search
double golden_max(const std::function<double(double)>& f, double upper) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = 0.0, b = upper;
  double x1 = b - inv_phi * (b - a), x2 = a + inv_phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < 200 && b - a > 1e-13 * std::max(1.0, upper); ++it) {
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
  }
  const double mid = 0.5 * (a + b);
  // boundaries are not sampled by the interior probes
  const double fm = f(mid), f0 = f(0.0), fu = f(upper);
  if (f0 >= fm && f0 >= fu) return 0.0;
  if (fu > fm) return upper;
  return mid;
}

}  // namespace

Allocation discrete_power_allocation(const ParallelChannelSet& channels,
                                     std::span<const RateFunction> rates) {
  channels.validate();
  const std::size_t L = channels.size();
  if (rates.size() != L) throw ConfigError("need one rate function per channel");
  const double budget = static_cast<double>(L) * channels.power;

  std::vector<double> powers(L);
  auto solve = [&](double mu) {
    double total = 0.0;
    for (std::size_t l = 0; l < L; ++l) {
      const auto& r = rates[l];
      powers[l] = golden_max([&](double p) { return r(p) - mu * p; }, budget);
      total += powers[l];
    }
    return total;
  };

  const double eps = 1e-7 * std::max(1.0, channels.power);
  double mu_hi = 0.0;
  for (std::size_t l = 0; l < L; ++l) {
    mu_hi = std::max(mu_hi, (rates[l](eps) - rates[l](0.0)) / eps);
  }
  mu_hi = std::max(mu_hi * 2.0, 1e-300);
  double mu_lo = mu_hi * 1e-16;
  if (solve(mu_lo) < budget) {
    throw NumericalError("discrete power allocation: budget exceeds what the rate functions absorb");
  }

  int it = 0;
  for (; it < 300; ++it) {
    const double mid = std::sqrt(mu_lo * mu_hi);
    const double total = solve(mid);
    if (std::abs(total - budget) <= 1e-11 * budget) {
      mu_lo = mu_hi = mid;
      break;
    }
    if (total > budget) {
      mu_lo = mid;
    } else {
      mu_hi = mid;
    }
    if (mu_hi / mu_lo - 1.0 < 1e-15) break;
  }
  if (it == 300) throw NumericalError("discrete power allocation did not converge");
  const double mu = std::sqrt(mu_lo * mu_hi);
  const double total = solve(mu);
  if (total > 0.0) {
    for (double& p : powers) p *= budget / total;
  }

  Allocation a;
  a.powers = powers;
  a.iterations = it;
  a.lambda = 2.0 * std::log(2.0) * mu;  // waterfilling convention for rates in bits
  a.se.resize(L);
  double residual = 0.0;
  for (std::size_t l = 0; l < L; ++l) {
    a.se[l] = rates[l](powers[l]);
    const double h = 1e-5 * std::max(1.0, powers[l]);
    if (powers[l] > h) {
      const double d = (rates[l](powers[l] + h) - rates[l](powers[l] - h)) / (2.0 * h);
      residual = std::max(residual, std::abs(d - mu));
    } else {
      const double d = (rates[l](powers[l] + h) - rates[l](powers[l])) / h;
      residual = std::max(residual, std::max(0.0, d - mu));
    }
  }
  a.kkt_residual = residual;
  a.sum_se = std::accumulate(a.se.begin(), a.se.end(), 0.0) / static_cast<double>(L);
  return a;
}

}  // namespace pdmkit
