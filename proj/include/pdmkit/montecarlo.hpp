#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "pdmkit/constellation.hpp"
#include "pdmkit/pas.hpp"

namespace pdmkit {

/// Counter-based pseudorandom stream.
///
/// Draw `counter` of substream s under seed k is
///   splitmix64(key + counter * 0x9E3779B97F4A7C15),
///   key = splitmix64(k ^ (s * 0xD1B54A32D192ED03)),
/// so any (seed, substream, counter) triple yields the same variate no matter
/// which worker evaluates it. Normals use the inverse CDF of a uniform draw.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed, std::uint64_t substream = 0);

  RandomStream substream(std::uint64_t index) const { return RandomStream(seed_, index); }
  std::uint64_t seed() const { return seed_; }
  std::uint64_t index() const { return stream_; }

  std::uint64_t bits(std::uint64_t counter) const;
  /// Uniform in (0, 1).
  double uniform(std::uint64_t counter) const;
  /// Standard normal.
  double normal(std::uint64_t counter) const;

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t key_;
};

struct McEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t count = 0;
};

/// Running first and second moments; merged in a fixed order for determinism.
struct MomentAccumulator {
  double sum = 0.0;
  double sum_sq = 0.0;
  std::size_t count = 0;

  void add(double v) {
    sum += v;
    sum_sq += v * v;
    ++count;
  }
  void merge(const MomentAccumulator& o) {
    sum += o.sum;
    sum_sq += o.sum_sq;
    count += o.count;
  }
  McEstimate estimate() const;
};

/// y_s = h_s x_s + z_s with z_s ~ N(0, noise_variance) drawn at counter s.
std::vector<double> transmit(std::span<const double> symbols, std::span<const double> gains,
                             const RandomStream& stream, double noise_variance = 1.0);

/// P(B_i = b | y) for i = 1..m; entry [i-1][b]. Y = delta X + N(0, 1).
std::vector<std::array<double, 2>> bit_posteriors(double y, const AskConstellation& c,
                                                  const Labeling& lab, std::span<const double> px);

/// Empirical mean of -log2 P(B_i = b_i(x) | y) per level over iid draws of X
/// from px and unit-variance noise. Samples are drawn in blocks of 4096, block
/// b from substream b, and reduced in block order.
std::vector<McEstimate> estimate_bmd_terms(std::span<const double> px, const Labeling& lab,
                                           const AskConstellation& c, std::size_t samples,
                                           std::uint64_t seed, std::size_t workers = 0);

/// Parallel-channel PAS link used by end_to_end_run.
struct LinkScenario {
  std::vector<double> gains;
  double power_db = 0.0;
  double gamma = 1.0 / 3.0;
  int m_max = 16;
  std::size_t channels_per_group = 1;  // channel uses of each physical channel per frame
  std::uint64_t seed = 1;
  std::uint64_t parity_seed = 0x5EED;
  double noise_variance = 1.0;
};

struct ChannelReport {
  std::size_t channel = 0;
  int exponent = 0;
  double target_power = 0.0;
  double empirical_power = 0.0;
  std::vector<McEstimate> conditional_entropies;  // H(B_i|Y), i = 1..m
  McEstimate conditional_entropy_sum;
  double quadrature_sum = 0.0;
};

struct LinkReport {
  std::size_t frames = 0;
  std::size_t slots = 0;            // L per frame
  std::vector<std::size_t> level_lengths;  // n_i
  std::vector<std::size_t> level_inputs;   // k_i
  std::vector<double> upper_probs;         // designed P(B_i = 0)
  std::size_t fec_length = 0;
  double code_rate = 0.0;
  double configured_r_dm = 0.0;     // sum k_i / L
  double achieved_r_dm = 0.0;       // data bits consumed per channel use
  double target_power = 0.0;        // linear
  double empirical_power = 0.0;
  std::vector<ChannelReport> channels;
  std::size_t roundtrip_ok = 0;
};

/// data -> parallel PDM -> PAS frame -> channel -> bit posteriors, per frame.
/// Frame f uses substreams 3f (data), 3f+1 (data signs), 3f+2 (noise). With a
/// zero noise variance the amplitudes are recovered from the channel output;
/// otherwise from the transmitted symbols.
LinkReport end_to_end_run(const LinkScenario& scenario, std::size_t frames, std::size_t workers = 0);

}  // namespace pdmkit
