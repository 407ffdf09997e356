#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <span>
#include <vector>

namespace pdmkit {

/// L parallel real AWGN channels y = h x + z with unit noise variance and an
/// average sum-power budget (1/L) sum_l E[X_l^2] <= power.
struct ParallelChannelSet {
  std::vector<double> gains;
  double power = 1.0;  // linear

  std::size_t size() const { return gains.size(); }
  void validate() const;
};

struct Allocation {
  std::vector<double> powers;  // P_l
  double lambda = 0.0;         // 1 / water level
  std::vector<double> se;      // per-channel SE C_l, zero when inactive
  double sum_se = 0.0;         // (1/L) sum C_l

  double water_level() const { return 1.0 / lambda; }
  double kkt_residual = 0.0;   // set by discrete_power_allocation
  int iterations = 0;
};

/// Capacity-achieving power allocation for Gaussian inputs.
Allocation waterfill(const ParallelChannelSet& channels);

double waterfilling_sum_se(const ParallelChannelSet& channels);

/// Smallest sum power whose waterfilling SE reaches `target_se`.
double waterfilling_power_for_se(std::span<const double> gains, double target_se);

/// Constellation assignment across parallel channels.
///
/// One entry per channel use: exponent m (2^m-ASK) and the index of the
/// physical channel it belongs to. Entries are kept in the order produced;
/// the matcher layer sorts them by descending exponent.
struct BitLoadingPlan {
  std::vector<int> exponents;
  std::vector<std::size_t> channel;

  std::size_t size() const { return exponents.size(); }  // L
  int max_exponent() const;
  /// nu_i: number of channel uses with exponent exactly i.
  std::map<int, std::size_t> group_counts() const;
  /// n_i for i = 2..max_exponent: channel uses with exponent >= i.
  std::vector<std::size_t> dm_lengths() const;
  /// n_c = L + sum_i n_i.
  std::size_t fec_length() const;

  /// Repeats every entry `copies` times (channel uses per FEC frame).
  BitLoadingPlan replicate(std::size_t copies) const;

  void validate() const;

  static BitLoadingPlan from_group_counts(const std::map<int, std::size_t>& nu);
};

/// m_l = clamp(round_half_up(C_l + 1), 2, m_max); inactive channels are left out.
BitLoadingPlan bit_load(const Allocation& allocation, int m_max);

/// Per-channel achievable rate as a function of the channel's power.
using RateFunction = std::function<double(double power)>;

/// Maximizes (1/L) sum_l R_l(P_l) under the average power budget.
///
/// For a multiplier lambda every channel maximizes R_l(P) - lambda P by
/// golden-section search; lambda is bisected until the budget is met. The
/// rate functions must be concave and nondecreasing. kkt_residual reports the
/// largest violation of R_l'(P_l) = lambda (active) / R_l'(0) <= lambda
/// (inactive) using central differences.
Allocation discrete_power_allocation(const ParallelChannelSet& channels,
                                     std::span<const RateFunction> rates);

}  // namespace pdmkit
