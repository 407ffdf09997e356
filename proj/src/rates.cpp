#include "pdmkit/rates.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "pdmkit/error.hpp"

namespace pdmkit {

double awgn_capacity(double snr) {
  if (snr < 0.0) throw ConfigError("SNR must be nonnegative");
  return 0.5 * std::log2(1.0 + snr);
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
double linear_to_db(double linear) { return 10.0 * std::log10(linear); }

AskConstellation scaled_to_snr(const AskConstellation& c, std::span<const double> px, double snr) {
  if (snr < 0.0) throw ConfigError("SNR must be nonnegative");
  AskConstellation out = c;
  out.delta = 1.0;
  const double e = second_moment(px, out);
  out.delta = std::sqrt(snr / e);
  return out;
}

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014327;

// Trapezoidal rule with step halving. `add` accumulates the integrand at y
// into a vector of `dims` components.
template <class Integrand>
std::vector<double> integrate(double a, double b, std::size_t dims, const QuadratureSpec& spec,
                              Integrand&& add, const char* what) {
  const double width = b - a;
  std::size_t intervals = std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(width / spec.initial_step)));
  double h = width / static_cast<double>(intervals);

  std::vector<double> ends(dims, 0.0), sum(dims, 0.0);
  add(a, ends);
  add(b, ends);
  for (std::size_t j = 1; j < intervals; ++j) add(a + h * static_cast<double>(j), sum);

  std::vector<double> estimate(dims);
  for (std::size_t d = 0; d < dims; ++d) estimate[d] = h * (0.5 * ends[d] + sum[d]);

  std::vector<double> mid(dims);
  for (int halving = 1; halving <= spec.max_halvings; ++halving) {
    std::fill(mid.begin(), mid.end(), 0.0);
    for (std::size_t j = 0; j < intervals; ++j) add(a + h * (static_cast<double>(j) + 0.5), mid);
    intervals *= 2;
    h *= 0.5;
    double change = 0.0;
    for (std::size_t d = 0; d < dims; ++d) {
      sum[d] += mid[d];
      const double next = h * (0.5 * ends[d] + sum[d]);
      change = std::max(change, std::abs(next - estimate[d]));
      estimate[d] = next;
    }
    if (change < spec.tolerance) return estimate;
  }
  throw NumericalError(std::string(what) + ": quadrature did not reach tolerance " +
                       std::to_string(spec.tolerance) + " bits");
}

struct MixtureSupport {
  std::vector<double> x;      // scaled points with nonzero probability
  std::vector<double> log_p;  // log P_X
  std::vector<std::size_t> index;
  double lo = 0.0, hi = 0.0;
};

MixtureSupport support(std::span<const double> px, const AskConstellation& c, double range) {
  if (px.size() != c.size()) throw ConfigError("distribution size does not match the constellation");
  MixtureSupport s;
  double total = 0.0;
  for (std::size_t j = 0; j < c.size(); ++j) {
    if (px[j] < 0.0) throw ConfigError("negative probability");
    total += px[j];
    if (px[j] > 0.0) {
      s.x.push_back(c.delta * c.points[j]);
      s.log_p.push_back(std::log(px[j]));
      s.index.push_back(j);
    }
  }
  if (std::abs(total - 1.0) > 1e-9) throw ConfigError("distribution is not normalized");
  s.lo = c.delta * c.points.front() - range;
  s.hi = c.delta * c.points.back() + range;
  return s;
}

// Fills w_j = exp(log p_j - (y - x_j)^2 / 2 - shift) and returns shift.
double mixture_weights(const MixtureSupport& s, double y, std::vector<double>& w) {
  double shift = -INFINITY;
  for (std::size_t j = 0; j < s.x.size(); ++j) {
    const double d = y - s.x[j];
    w[j] = s.log_p[j] - 0.5 * d * d;
    shift = std::max(shift, w[j]);
  }
  for (double& v : w) v = std::exp(v - shift);
  return shift;
}

}  // namespace

std::vector<double> conditional_bit_entropies(std::span<const double> px, const Labeling& lab,
                                              const AskConstellation& c,
                                              const QuadratureSpec& spec) {
  if (lab.m() != c.m) throw ConfigError("labeling and constellation sizes differ");
  const MixtureSupport s = support(px, c, spec.range);
  const int m = c.m;
  const std::size_t count = s.x.size();

  // ones[i][j]: bit i+1 of the j-th supported point
  std::vector<std::vector<std::uint8_t>> ones(m, std::vector<std::uint8_t>(count));
  for (int i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < count; ++j) ones[i][j] = static_cast<std::uint8_t>(lab.bit(s.index[j], i + 1));
  }

  std::vector<double> w(count);
  auto add = [&](double y, std::vector<double>& acc) {
    const double shift = mixture_weights(s, y, w);
    double total = 0.0;
    for (double v : w) total += v;
    const double scale = std::exp(shift) * kInvSqrt2Pi;
    if (scale == 0.0) return;
    for (int i = 0; i < m; ++i) {
      double s0 = 0.0, s1 = 0.0;
      const auto& bits = ones[i];
      for (std::size_t j = 0; j < count; ++j) (bits[j] ? s1 : s0) += w[j];
      const double lt = std::log2(total);
      double v = 0.0;
      if (s0 > 0.0) v += s0 * (lt - std::log2(s0));
      if (s1 > 0.0) v += s1 * (lt - std::log2(s1));
      acc[i] += scale * v;
    }
  };
  return integrate(s.lo, s.hi, static_cast<std::size_t>(m), spec, add, "conditional bit entropies");
}

double bmd_rate(std::span<const double> px, const Labeling& lab, const AskConstellation& c,
                const QuadratureSpec& spec) {
  const auto h = conditional_bit_entropies(px, lab, c, spec);
  double sum = 0.0;
  for (double v : h) sum += v;
  return std::max(0.0, entropy(px) - sum);
}

double bicm_capacity(std::span<const double> px, const Labeling& lab, const AskConstellation& c,
                     const QuadratureSpec& spec) {
  const auto h = conditional_bit_entropies(px, lab, c, spec);
  double sum = 0.0;
  for (int i = 1; i <= c.m; ++i) {
    double p1 = 0.0;
    for (std::size_t j = 0; j < c.size(); ++j) p1 += lab.bit(j, i) ? px[j] : 0.0;
    sum += binary_entropy(p1) - h[static_cast<std::size_t>(i - 1)];
  }
  return std::max(0.0, sum);
}

double pdm_bmd_rate(const ProductInputDistribution& dist, const Labeling& dm, const Labeling& fec,
                    const AskConstellation& c, const QuadratureSpec& spec) {
  const auto px = induced_symbol_distribution(dist, dm, c);
  const auto h = conditional_bit_entropies(px, fec, c, spec);
  double sum = 0.0;
  for (double v : h) sum += v;
  return std::max(0.0, dist.entropy() - sum);
}

LogMetric bmd_metric(std::span<const double> px, const Labeling& lab, const AskConstellation& c) {
  const MixtureSupport s = support(px, c, 0.0);
  return [s, lab, m = c.m, size = c.size()](double y, std::span<double> log_q) {
    std::vector<double> w(s.x.size());
    mixture_weights(s, y, w);
    double total = 0.0;
    for (double v : w) total += v;
    std::fill(log_q.begin(), log_q.end(), 0.0);
    for (int i = 1; i <= m; ++i) {
      double s0 = 0.0, s1 = 0.0;
      for (std::size_t j = 0; j < s.x.size(); ++j) (lab.bit(s.index[j], i) ? s1 : s0) += w[j];
      const double lt = std::log(total);
      const double l1 = std::log(s1) - lt, l0 = std::log(s0) - lt;
      for (std::size_t j = 0; j < size; ++j) log_q[j] += lab.bit(j, i) ? l1 : l0;
    }
  };
}

LogMetric symbol_metric(std::span<const double> px, const AskConstellation& c) {
  const MixtureSupport s = support(px, c, 0.0);
  return [s, size = c.size()](double y, std::span<double> log_q) {
    std::vector<double> w(s.x.size());
    mixture_weights(s, y, w);
    double total = 0.0;
    for (double v : w) total += v;
    std::fill(log_q.begin(), log_q.end(), -INFINITY);
    for (std::size_t j = 0; j < s.x.size(); ++j) log_q[s.index[j]] = std::log(w[j]) - std::log(total);
    (void)size;
  };
}

double gmi_rate(std::span<const double> px, const LogMetric& metric, const AskConstellation& c,
                const QuadratureSpec& spec) {
  const MixtureSupport s = support(px, c, spec.range);
  std::vector<double> log_q(c.size());
  auto add = [&](double y, std::vector<double>& acc) {
    metric(y, log_q);
    double qmax = -INFINITY;
    for (double v : log_q) qmax = std::max(qmax, v);
    double qsum = 0.0;
    for (double v : log_q) qsum += std::exp(v - qmax);
    const double log_norm = qmax + std::log(qsum);
    double v = 0.0;
    for (std::size_t j = 0; j < s.x.size(); ++j) {
      const double d = y - s.x[j];
      const double p = std::exp(s.log_p[j] - 0.5 * d * d) * kInvSqrt2Pi;
      if (p == 0.0) continue;
      v += p * (log_norm - log_q[s.index[j]]);
    }
    acc[0] += v / std::numbers::ln2;
  };
  const auto cross = integrate(s.lo, s.hi, 1, spec, add, "GMI");
  return std::max(0.0, entropy(px) - cross[0]);
}

double required_snr_db(const SnrRate& rate, double target, const RootSearch& search) {
  double a = search.lo_db, b = search.hi_db;
  double fa = rate(db_to_linear(a)) - target;
  double fb = rate(db_to_linear(b)) - target;
  if (fa > 0.0 || fb < 0.0) {
    throw NumericalError("required SNR: target rate " + std::to_string(target) +
                         " not bracketed by [" + std::to_string(a) + ", " + std::to_string(b) + "] dB");
  }
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  // Illinois variant of regula falsi on the dB axis.
  int side = 0;
  for (int it = 0; it < 200; ++it) {
    const double x = (a * fb - b * fa) / (fb - fa);
    const double fx = rate(db_to_linear(x)) - target;
    if (std::abs(fx) <= search.rate_tolerance || b - a < 1e-10) return x;
    if (fx < 0.0) {
      a = x;
      fa = fx;
      if (side == -1) fb *= 0.5;
      side = -1;
    } else {
      b = x;
      fb = fx;
      if (side == 1) fa *= 0.5;
      side = 1;
    }
  }
  throw NumericalError("required SNR: root search did not converge");
}

SnrRate fixed_distribution_rate(SymbolDistribution px, Labeling fec, AskConstellation c,
                                QuadratureSpec spec) {
  return [px = std::move(px), fec = std::move(fec), c = std::move(c), spec](double snr) {
    return bmd_rate(px, fec, scaled_to_snr(c, px, snr), spec);
  };
}

SnrRate fixed_product_rate(ProductInputDistribution dist, QuadratureSpec spec) {
  const int m = dist.m();
  AskConstellation c = make_ask(m);
  Labeling dm(LabelingKind::Nbbc, m), fec(LabelingKind::Brgc, m);
  SymbolDistribution px = induced_symbol_distribution(dist, dm, c);
  return [dist = std::move(dist), px = std::move(px), dm, fec, c, spec](double snr) {
    return pdm_bmd_rate(dist, dm, fec, scaled_to_snr(c, px, snr), spec);
  };
}

}  // namespace pdmkit
