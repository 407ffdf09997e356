#pragma once

#include <span>
#include <vector>

#include "pdmkit/allocation.hpp"
#include "pdmkit/constellation.hpp"
#include "pdmkit/rates.hpp"

namespace pdmkit {

/// Result of a distribution optimization.
///
/// Level probabilities are reported as P(B_i^dm = 0), the probability of
/// selecting the upper-amplitude half at level i (levels 2..m). Under the
/// NBBC polarity convention minimum-energy solutions have these in [0, 0.5];
/// p1() returns the complements P(B_i^dm = 1).
struct OptimizationResult {
  std::vector<double> upper_probs;
  std::vector<double> scalings;  // constellation scaling per channel, when determined
  double objective = 0.0;        // energy or rate, depending on the problem
  double residual = 0.0;         // |constraint - target| (or last rate improvement)
  int iterations = 0;
  double mb_parameter = 0.0;     // Maxwell-Boltzmann nu, MB scheme only
  SymbolDistribution px;         // induced symbol distribution, rate problems only

  std::vector<double> p1() const;
  ProductInputDistribution distribution() const;
};

/// E[A^2] of the normalized amplitude 1 + sum_i 2^{m-i+1} r_i with independent
/// upper-half indicators r_i ~ Bernoulli(upper_probs[i-2]), m = size + 1.
double product_amplitude_energy(std::span<const double> upper_probs);

/// min E[X~^2] s.t. sum_{i=2}^m H(B_i) = r_dm, with levels 2..(shaped_levels+1)
/// free and the remaining levels uniform. Feasible for
/// r_dm in (m-1-shaped_levels, m-1].
OptimizationResult min_energy_product_dist(int m, double r_dm, int shaped_levels,
                                           std::span<const double> initial = {});

/// min sum_l (1/h_l^2) E[A_l^2] s.t. (1/L) sum_i H(B_i) n_i = r_dm, where
/// channel use l of the plan has gain gains[plan.channel[l]] and amplitude
/// levels 2..m_l shared with every other channel use.
OptimizationResult min_weighted_energy_parallel(const BitLoadingPlan& plan,
                                                std::span<const double> gains, double r_dm,
                                                std::span<const double> initial = {});

/// Maxwell-Boltzmann amplitude law P_A(a) ~ exp(-nu a^2) on {1, 3, ..., 2^m - 1}.
std::vector<double> maxwell_boltzmann_amplitudes(int m, double nu);
/// nu such that H(A) equals the given amplitude entropy, in (0, m-1].
double maxwell_boltzmann_nu(int m, double amplitude_entropy);

enum class RateScheme {
  UniformBmd,          // uniform inputs, BRGC bit-metric rate
  MaxwellBoltzmannBmd, // MB amplitudes, BRGC bit-metric rate
  ProductBmd,          // product input on NBBC levels, BRGC bit-metric rate
};

const char* to_string(RateScheme s);

/// Maximizes the scheme's rate at the given SNR over its distribution
/// parameters, with the scaling matched to the SNR. objective holds the rate.
OptimizationResult maximize_rate_at_snr(RateScheme scheme, int m, double snr,
                                        const QuadratureSpec& quad = {});

/// Rate of the optimized scheme as a function of SNR.
SnrRate optimized_rate(RateScheme scheme, int m, QuadratureSpec quad = {});

/// Parallel-channel scenario for the shaped/uniform comparison curves.
struct ParallelScenario {
  std::vector<double> gains;
  double gamma = 1.0 / 3.0;
  int m_max = 16;
  QuadratureSpec quad;
};

struct ParallelPoint {
  double power_db = 0.0;
  double waterfilling = 0.0;   // C_WF
  double shaped = 0.0;         // (1/L) sum_l R_BMD^PDM
  double uniform = 0.0;        // (1/L) sum_l R_BMD with uniform inputs
  double r_dm = 0.0;           // DM rate the distribution was solved for
  Allocation allocation;
  BitLoadingPlan plan;
  OptimizationResult distribution;
};

/// Waterfilling powers, bit-loading, the weighted minimum-energy distribution
/// for R_dm = C_WF - gamma, and the per-channel rates at one sum power.
ParallelPoint evaluate_parallel_point(const ParallelScenario& scenario, double power_db);

/// evaluate_parallel_point over a grid, evaluated in parallel, in grid order.
std::vector<ParallelPoint> shaped_parallel_curve(const ParallelScenario& scenario,
                                                 std::span<const double> power_grid_db);

struct CurveGaps {
  double target_se = 0.0;
  double waterfilling_db = 0.0;
  double shaped_db = 0.0;
  double uniform_db = 0.0;

  double shaped_gap_db() const { return shaped_db - waterfilling_db; }
  double uniform_gap_db() const { return uniform_db - waterfilling_db; }
};

/// Sum powers at which each curve reaches `target_se`.
CurveGaps parallel_gaps_at_se(const ParallelScenario& scenario, double target_se);

}  // namespace pdmkit
