#include "pdmkit/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <boost/math/special_functions/erf.hpp>

#include "pdmkit/error.hpp"
#include "pdmkit/optimizer.hpp"
#include "pdmkit/parallel.hpp"
#include "pdmkit/pdm.hpp"
#include "pdmkit/rates.hpp"

namespace pdmkit {

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t substream)
    : seed_(seed), stream_(substream), key_(splitmix64(seed ^ (substream * 0xD1B54A32D192ED03ull))) {}

std::uint64_t RandomStream::bits(std::uint64_t counter) const {
  return splitmix64(key_ + counter * 0x9E3779B97F4A7C15ull);
}

double RandomStream::uniform(std::uint64_t counter) const {
  return (static_cast<double>(bits(counter) >> 11) + 0.5) * 0x1p-53;
}

double RandomStream::normal(std::uint64_t counter) const {
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * uniform(counter));
}

McEstimate MomentAccumulator::estimate() const {
  McEstimate e;
  e.count = count;
  if (count == 0) return e;
  const double n = static_cast<double>(count);
  e.value = sum / n;
  if (count > 1) {
    const double var = std::max(0.0, (sum_sq - n * e.value * e.value) / (n - 1.0));
    e.std_error = std::sqrt(var / n);
  }
  return e;
}

std::vector<double> transmit(std::span<const double> symbols, std::span<const double> gains,
                             const RandomStream& stream, double noise_variance) {
  if (gains.size() != symbols.size()) throw ConfigError("one gain per symbol required");
  if (noise_variance < 0.0) throw ConfigError("noise variance must be nonnegative");
  const double sigma = std::sqrt(noise_variance);
  std::vector<double> y(symbols.size());
  for (std::size_t s = 0; s < symbols.size(); ++s) {
    y[s] = gains[s] * symbols[s];
    if (sigma > 0.0) y[s] += sigma * stream.normal(s);
  }
  return y;
}

namespace {

// Log-domain posterior bookkeeping shared by the estimators.
class PosteriorEngine {
 public:
  PosteriorEngine(const AskConstellation& c, const Labeling& lab, std::span<const double> px)
      : c_(c), lab_(lab), log_p_(c.size()), w_(c.size()) {
    if (px.size() != c.size()) throw ConfigError("distribution size does not match the constellation");
    for (std::size_t j = 0; j < c.size(); ++j) log_p_[j] = px[j] > 0.0 ? std::log(px[j]) : -INFINITY;
  }

  // Fills log P(B_i = b | y) into out[i][b].
  void evaluate(double y, std::vector<std::array<double, 2>>& out) {
    double shift = -INFINITY;
    for (std::size_t j = 0; j < c_.size(); ++j) {
      const double d = y - c_.delta * c_.points[j];
      w_[j] = log_p_[j] - 0.5 * d * d;
      shift = std::max(shift, w_[j]);
    }
    double total = 0.0;
    for (double& v : w_) {
      v = std::exp(v - shift);
      total += v;
    }
    out.resize(static_cast<std::size_t>(c_.m));
    for (int i = 1; i <= c_.m; ++i) {
      double s0 = 0.0, s1 = 0.0;
      for (std::size_t j = 0; j < c_.size(); ++j) (lab_.bit(j, i) ? s1 : s0) += w_[j];
      const double lt = std::log(total);
      out[i - 1] = {std::log(s0) - lt, std::log(s1) - lt};
    }
  }

 private:
  const AskConstellation& c_;
  const Labeling& lab_;
  std::vector<double> log_p_;
  std::vector<double> w_;
};

}  // namespace

std::vector<std::array<double, 2>> bit_posteriors(double y, const AskConstellation& c,
                                                  const Labeling& lab, std::span<const double> px) {
  PosteriorEngine engine(c, lab, px);
  std::vector<std::array<double, 2>> log_post;
  engine.evaluate(y, log_post);
  for (auto& lp : log_post) lp = {std::exp(lp[0]), std::exp(lp[1])};
  return log_post;
}

std::vector<McEstimate> estimate_bmd_terms(std::span<const double> px, const Labeling& lab,
                                           const AskConstellation& c, std::size_t samples,
                                           std::uint64_t seed, std::size_t workers) {
  constexpr std::size_t kBlock = 4096;
  const std::size_t m = static_cast<std::size_t>(c.m);
  std::vector<double> cdf(px.size());
  double acc = 0.0;
  for (std::size_t j = 0; j < px.size(); ++j) cdf[j] = acc += px[j];

  const std::size_t blocks = (samples + kBlock - 1) / kBlock;
  std::vector<std::vector<MomentAccumulator>> partial(blocks, std::vector<MomentAccumulator>(m));
  const RandomStream root(seed);
  parallel_for(
      blocks,
      [&](std::size_t b) {
        const RandomStream stream = root.substream(b);
        PosteriorEngine engine(c, lab, px);
        std::vector<std::array<double, 2>> log_post;
        const std::size_t count = std::min(kBlock, samples - b * kBlock);
        for (std::size_t t = 0; t < count; ++t) {
          const double u = stream.uniform(2 * t) * acc;
          const std::size_t j = std::min<std::size_t>(
              static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin()),
              px.size() - 1);
          const double y = c.delta * c.points[j] + stream.normal(2 * t + 1);
          engine.evaluate(y, log_post);
          for (std::size_t i = 0; i < m; ++i) {
            partial[b][i].add(-log_post[i][lab.bit(j, static_cast<int>(i) + 1)] / std::numbers::ln2);
          }
        }
      },
      workers);

  std::vector<MomentAccumulator> total(m);
  for (const auto& block : partial) {
    for (std::size_t i = 0; i < m; ++i) total[i].merge(block[i]);
  }
  std::vector<McEstimate> out;
  for (const auto& t : total) out.push_back(t.estimate());
  return out;
}

namespace {

template <class Fn>
auto staged(const char* stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("[") + stage + "] " + e.what());
  } catch (const NumericalError& e) {
    throw NumericalError(std::string("[") + stage + "] " + e.what());
  } catch (const DataIntegrityError& e) {
    throw DataIntegrityError(std::string("[") + stage + "] " + e.what());
  }
}

struct FrameStats {
  std::vector<MomentAccumulator> power;                    // per physical channel
  std::vector<std::vector<MomentAccumulator>> entropies;   // per channel, per level
  std::vector<MomentAccumulator> entropy_sum;              // per channel
  bool roundtrip = false;
};

}  // namespace

LinkReport end_to_end_run(const LinkScenario& scenario, std::size_t frames, std::size_t workers) {
  if (scenario.channels_per_group == 0) throw ConfigError("channels per group must be positive");
  LinkReport report;
  report.frames = frames;

  const ParallelChannelSet set{scenario.gains, db_to_linear(scenario.power_db)};
  const Allocation alloc = staged("allocation", [&] { return waterfill(set); });
  const BitLoadingPlan base = staged("allocation", [&] { return bit_load(alloc, scenario.m_max); });
  if (base.size() != set.size()) {
    throw ConfigError("[allocation] every channel must be active for the link simulation");
  }
  const BitLoadingPlan plan = base.replicate(scenario.channels_per_group);
  const double r_dm = alloc.sum_se - scenario.gamma;
  const OptimizationResult dist =
      staged("optimizer", [&] { return min_weighted_energy_parallel(plan, scenario.gains, r_dm); });
  const PdmConfig cfg = staged("pdm", [&] { return build_parallel_pdm(plan, dist.p1()); });

  const std::size_t L = cfg.slots();
  const double data_signs_real = scenario.gamma * static_cast<double>(L);
  const auto data_signs = static_cast<std::size_t>(std::llround(data_signs_real));
  if (std::abs(data_signs_real - static_cast<double>(data_signs)) > 1e-9) {
    throw ConfigError("[pas] gamma * L must be an integer, got " + std::to_string(data_signs_real));
  }

  report.slots = L;
  report.level_lengths = cfg.level_lengths();
  report.level_inputs = cfg.level_inputs();
  report.upper_probs = dist.upper_probs;
  report.fec_length = plan.fec_length();
  report.code_rate = staged("pas", [&] { return parallel_code_rate(plan, scenario.gamma); });
  report.configured_r_dm = parallel_pdm_rate(cfg);
  report.target_power = set.power;

  // Per physical channel: amplitude marginal from the compositions, scaling,
  // and the matching symbol distribution.
  const std::size_t channels = set.size();
  std::vector<int> exponent(channels);
  std::vector<double> scaling(channels);
  std::vector<SymbolDistribution> px(channels);
  for (std::size_t l = 0; l < base.size(); ++l) exponent[base.channel[l]] = base.exponents[l];
  for (std::size_t ch = 0; ch < channels; ++ch) {
    const auto pa = slot_amplitude_marginal(cfg, exponent[ch]);
    double energy = 0.0;
    for (std::size_t r = 0; r < pa.size(); ++r) energy += pa[r] * static_cast<double>((2 * r + 1) * (2 * r + 1));
    scaling[ch] = std::sqrt(alloc.powers[ch] / energy);
    px[ch] = symmetric_from_amplitudes(pa);
  }

  std::vector<double> slot_scaling(L), slot_gain(L);
  for (std::size_t s = 0; s < L; ++s) {
    slot_scaling[s] = scaling[cfg.slot_channel[s]];
    slot_gain[s] = scenario.gains[cfg.slot_channel[s]];
  }

  const PseudoRandomParity parity(scenario.parity_seed);
  const RandomStream root(scenario.seed);
  const std::size_t k = cfg.input_bits();
  std::vector<FrameStats> stats(frames);

  parallel_for(
      frames,
      [&](std::size_t f) {
        const RandomStream data_stream = root.substream(3 * f);
        const RandomStream sign_stream = root.substream(3 * f + 1);
        const RandomStream noise_stream = root.substream(3 * f + 2);

        Bits data(k);
        for (std::size_t i = 0; i < k; ++i) data[i] = static_cast<std::uint8_t>(data_stream.bits(i) & 1);
        Bits sign_data(data_signs);
        for (std::size_t i = 0; i < data_signs; ++i) sign_data[i] = static_cast<std::uint8_t>(sign_stream.bits(i) & 1);

        const AmplitudeFrame amps = staged("pdm", [&] { return pdm_encode(cfg, data); });
        const Bits signs = staged("pas", [&] { return make_sign_bits(amps, sign_data, parity); });
        const SymbolFrame frame = staged("pas", [&] { return assemble_frame(amps, signs, data_signs, slot_scaling); });
        const auto y = staged("channel", [&] {
          return transmit(frame.symbols, slot_gain, noise_stream, scenario.noise_variance);
        });

        FrameStats st;
        st.power.resize(channels);
        st.entropies.assign(channels, {});
        st.entropy_sum.resize(channels);
        std::vector<AskConstellation> cons;
        std::vector<Labeling> labs;
        std::vector<PosteriorEngine> engines;
        cons.reserve(channels);
        labs.reserve(channels);
        engines.reserve(channels);
        for (std::size_t ch = 0; ch < channels; ++ch) {
          cons.push_back(make_ask(exponent[ch]));
          cons.back().delta = scenario.gains[ch] * scaling[ch];
          labs.emplace_back(LabelingKind::Brgc, exponent[ch]);
          st.entropies[ch].resize(static_cast<std::size_t>(exponent[ch]));
        }
        for (std::size_t ch = 0; ch < channels; ++ch) engines.emplace_back(cons[ch], labs[ch], px[ch]);

        std::vector<std::array<double, 2>> log_post;
        std::vector<int> recovered(L);
        for (std::size_t s = 0; s < L; ++s) {
          const std::size_t ch = cfg.slot_channel[s];
          const int e = exponent[ch];
          st.power[ch].add(frame.symbols[s] * frame.symbols[s]);
          const std::size_t half = std::size_t{1} << (e - 1);
          const std::size_t rank = static_cast<std::size_t>((amps.amplitudes[s] - 1) / 2);
          const std::size_t point = frame.sign_bits[s] ? half + rank : half - 1 - rank;
          engines[ch].evaluate(y[s], log_post);
          double sum = 0.0;
          for (int i = 1; i <= e; ++i) {
            const double v = -log_post[i - 1][labs[ch].bit(point, i)] / std::numbers::ln2;
            st.entropies[ch][i - 1].add(v);
            sum += v;
          }
          st.entropy_sum[ch].add(sum);

          const double source = scenario.noise_variance == 0.0 ? y[s] / slot_gain[s] : frame.symbols[s];
          recovered[s] = static_cast<int>(std::lround(std::abs(source) / slot_scaling[s]));
        }
        const auto dec = pdm_decode(cfg, recovered);
        st.roundtrip = dec.ok() && dec.bits == data;
        stats[f] = std::move(st);
      },
      workers);

  std::vector<MomentAccumulator> power(channels), sums(channels);
  std::vector<std::vector<MomentAccumulator>> ent(channels);
  for (std::size_t ch = 0; ch < channels; ++ch) ent[ch].resize(static_cast<std::size_t>(exponent[ch]));
  MomentAccumulator total_power;
  for (const auto& st : stats) {
    for (std::size_t ch = 0; ch < channels; ++ch) {
      power[ch].merge(st.power[ch]);
      total_power.merge(st.power[ch]);
      sums[ch].merge(st.entropy_sum[ch]);
      for (std::size_t i = 0; i < ent[ch].size(); ++i) ent[ch][i].merge(st.entropies[ch][i]);
    }
    report.roundtrip_ok += st.roundtrip ? 1 : 0;
  }

  report.achieved_r_dm = frames == 0 ? 0.0 : static_cast<double>(k * frames) / static_cast<double>(L * frames);
  report.empirical_power = total_power.estimate().value;
  for (std::size_t ch = 0; ch < channels; ++ch) {
    ChannelReport cr;
    cr.channel = ch;
    cr.exponent = exponent[ch];
    cr.target_power = alloc.powers[ch];
    cr.empirical_power = power[ch].estimate().value;
    for (const auto& a : ent[ch]) cr.conditional_entropies.push_back(a.estimate());
    cr.conditional_entropy_sum = sums[ch].estimate();
    AskConstellation c = make_ask(exponent[ch]);
    c.delta = scenario.gains[ch] * scaling[ch];
    const auto h = staged("rates", [&] {
      return conditional_bit_entropies(px[ch], Labeling(LabelingKind::Brgc, exponent[ch]), c);
    });
    for (double v : h) cr.quadrature_sum += v;
    report.channels.push_back(std::move(cr));
  }
  return report;
}

}  // namespace pdmkit
