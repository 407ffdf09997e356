#include "pdmkit/constellation.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "pdmkit/error.hpp"

namespace pdmkit {

AskConstellation make_ask(int m) {
  if (m < 2 || m > 16) {
    throw ConfigError("ASK exponent m must be in [2, 16], got " + std::to_string(m));
  }
  AskConstellation c;
  c.m = m;
  const int size = 1 << m;
  c.points.reserve(size);
  for (int j = 0; j < size; ++j) {
    c.points.push_back(static_cast<double>(2 * j - (size - 1)));
  }
  return c;
}

Labeling::Labeling(LabelingKind kind, int m) : kind_(kind), m_(m) {
  if (m < 2 || m > 16) {
    throw ConfigError("labeling exponent m must be in [2, 16], got " + std::to_string(m));
  }
  const std::uint32_t size = 1u << m;
  const std::uint32_t half = size / 2;
  words_.resize(size);
  for (std::uint32_t j = 0; j < size; ++j) {
    if (kind == LabelingKind::Brgc) {
      words_[j] = j ^ (j >> 1);
    } else {
      const std::uint32_t sign = j >= half ? 1u : 0u;
      const std::uint32_t rank = sign ? j - half : half - 1 - j;
      const std::uint32_t amp_label = (half - 1) & ~rank;
      words_[j] = (sign << (m - 1)) | amp_label;
    }
  }
  inverse_.resize(size);
  for (std::uint32_t j = 0; j < size; ++j) inverse_[words_[j]] = j;
}

Labeling Labeling::with_flipped_level(int level) const {
  if (level < 1 || level > m_) throw ConfigError("level out of range");
  Labeling out = *this;
  const std::uint32_t mask = 1u << (m_ - level);
  for (std::size_t j = 0; j < out.words_.size(); ++j) {
    out.words_[j] ^= mask;
    out.inverse_[out.words_[j]] = j;
  }
  return out;
}

Labeling make_labeling(LabelingKind kind, int m) { return Labeling(kind, m); }

double binary_entropy(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

double entropy(std::span<const double> p) {
  double h = 0.0;
  for (double v : p) {
    if (v > 0.0) h -= v * std::log2(v);
  }
  return h;
}

double BitLevelDistribution::entropy() const { return binary_entropy(p1); }

double ProductInputDistribution::entropy() const {
  double h = 1.0;
  for (const auto& l : levels) h += l.entropy();
  return h;
}

ProductInputDistribution ProductInputDistribution::uniform(int m) {
  ProductInputDistribution d;
  d.levels.assign(static_cast<std::size_t>(m - 1), BitLevelDistribution{0.5});
  return d;
}

ProductInputDistribution ProductInputDistribution::from_p1(std::span<const double> p1) {
  ProductInputDistribution d;
  for (double p : p1) {
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("bit-level probability outside [0, 1]");
    d.levels.push_back({p});
  }
  return d;
}

SymbolDistribution induced_symbol_distribution(const ProductInputDistribution& dist,
                                               const Labeling& lab,
                                               const AskConstellation& c) {
  if (dist.m() != c.m || lab.m() != c.m) {
    throw ConfigError("product distribution has " + std::to_string(dist.levels.size()) +
                      " levels, constellation needs " + std::to_string(c.m - 1));
  }
  SymbolDistribution px(c.size());
  for (std::size_t j = 0; j < c.size(); ++j) {
    double p = 0.5;
    for (int level = 2; level <= c.m; ++level) {
      const double p1 = dist.levels[level - 2].p1;
      p *= lab.bit(j, level) ? p1 : 1.0 - p1;
    }
    px[j] = p;
  }
  return px;
}

SymbolDistribution uniform_distribution(const AskConstellation& c) {
  return SymbolDistribution(c.size(), 1.0 / static_cast<double>(c.size()));
}

SymbolDistribution symmetric_from_amplitudes(std::span<const double> amplitude_probs) {
  const std::size_t half = amplitude_probs.size();
  SymbolDistribution px(2 * half);
  for (std::size_t r = 0; r < half; ++r) {
    px[half + r] = 0.5 * amplitude_probs[r];
    px[half - 1 - r] = 0.5 * amplitude_probs[r];
  }
  return px;
}

double second_moment(std::span<const double> px, const AskConstellation& c) {
  double e = 0.0;
  for (std::size_t j = 0; j < c.size(); ++j) {
    const double x = c.delta * c.points[j];
    e += px[j] * x * x;
  }
  return e;
}

}  // namespace pdmkit
