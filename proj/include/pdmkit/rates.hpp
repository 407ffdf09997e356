#pragma once

#include <functional>
#include <span>
#include <vector>

#include "pdmkit/constellation.hpp"

namespace pdmkit {

/// Composite trapezoidal integration over y in
/// [delta*min(x) - range, delta*max(x) + range]; the step starts at
/// `initial_step` and is halved until two successive estimates differ by
/// less than `tolerance` bits in every component.
struct QuadratureSpec {
  double range = 10.0;         // noise standard deviations beyond the outer points
  double initial_step = 0.5;
  double tolerance = 1e-7;     // bits
  int max_halvings = 12;
};

/// 0.5 log2(1 + snr).
double awgn_capacity(double snr);

double db_to_linear(double db);
double linear_to_db(double linear);

/// Returns a copy of `c` whose scaling gives E[X^2] = snr under `px` (unit noise).
AskConstellation scaled_to_snr(const AskConstellation& c, std::span<const double> px, double snr);

/// H(B_i | Y) for i = 1..m (index 0 is the sign bit) under Y = delta X + Z,
/// Z ~ N(0, 1).
std::vector<double> conditional_bit_entropies(std::span<const double> px, const Labeling& lab,
                                              const AskConstellation& c,
                                              const QuadratureSpec& spec = {});

/// Bit-metric decoding rate [H(X) - sum_i H(B_i|Y)]^+.
double bmd_rate(std::span<const double> px, const Labeling& lab, const AskConstellation& c,
                const QuadratureSpec& spec = {});

/// sum_i I(B_i; Y), the BICM capacity of the labeling.
double bicm_capacity(std::span<const double> px, const Labeling& lab, const AskConstellation& c,
                     const QuadratureSpec& spec = {});

/// [sum_i H(B_i^dm) - sum_i H(B_i^fec|Y)]^+ for a product input built with
/// `dm` and decoded with `fec`.
double pdm_bmd_rate(const ProductInputDistribution& dist, const Labeling& dm, const Labeling& fec,
                    const AskConstellation& c, const QuadratureSpec& spec = {});

/// Decoding metric in the log domain: fills log q(x_j, y) for every point j.
using LogMetric = std::function<void(double y, std::span<double> log_q)>;

/// Bit-metric: q(x, y) = prod_i P(B_i = b_i(x) | y).
LogMetric bmd_metric(std::span<const double> px, const Labeling& lab, const AskConstellation& c);
/// Symbol-metric: q(x, y) = P(X = x | y).
LogMetric symbol_metric(std::span<const double> px, const AskConstellation& c);

/// [H(X) - E[-log2(q(X,Y) / sum_x q(x,Y))]]^+.
double gmi_rate(std::span<const double> px, const LogMetric& metric, const AskConstellation& c,
                const QuadratureSpec& spec = {});

/// Rate as a function of linear SNR.
using SnrRate = std::function<double(double snr)>;

struct RootSearch {
  double lo_db = -10.0;
  double hi_db = 60.0;
  double rate_tolerance = 1e-6;  // bits
};

/// SNR in dB at which `rate` reaches `target`. The rate must be
/// nondecreasing; throws NumericalError when the bracket does not contain
/// the target.
double required_snr_db(const SnrRate& rate, double target, const RootSearch& search = {});

/// Rate of a fixed distribution with the scaling matched to each SNR.
SnrRate fixed_distribution_rate(SymbolDistribution px, Labeling fec, AskConstellation c,
                                QuadratureSpec spec = {});

/// Product-input rate (dm labeling NBBC, fec labeling BRGC) with the scaling
/// matched to each SNR.
SnrRate fixed_product_rate(ProductInputDistribution dist, QuadratureSpec spec = {});

}  // namespace pdmkit
