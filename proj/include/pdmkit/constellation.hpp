#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace pdmkit {

/// Bit strings are stored one bit per byte (values 0 or 1).
using Bits = std::vector<std::uint8_t>;

/// Probability mass over the points of an AskConstellation, indexed like
/// AskConstellation::points (ascending amplitude).
using SymbolDistribution = std::vector<double>;

/// Equidistant 2^m-ary ASK signal set {±1, ±3, ..., ±(2^m - 1)} scaled by delta.
struct AskConstellation {
  int m = 2;
  std::vector<double> points;  // normalized, ascending
  double delta = 1.0;

  std::size_t size() const { return points.size(); }
  std::size_t amplitude_count() const { return points.size() / 2; }
  /// Largest normalized amplitude 2^m - 1.
  int max_amplitude() const { return (1 << m) - 1; }
};

AskConstellation make_ask(int m);

enum class LabelingKind { Brgc, Nbbc };

/// Bijection from constellation points to m-bit labels b1 b2 ... bm.
///
/// b1 is the sign bit (0 for negative points). The remaining bits form the
/// amplitude label, which is identical for x and -x.
///
/// BRGC: binary reflected Gray code over the points in ascending order.
/// NBBC: sign bit followed by the natural binary code of the amplitude rank,
/// with complemented polarity so that a 1 at any amplitude level selects the
/// lower-amplitude half. The first amplitude level (b2) is the most
/// significant bit of the rank.
class Labeling {
 public:
  Labeling(LabelingKind kind, int m);

  LabelingKind kind() const { return kind_; }
  int m() const { return m_; }

  /// Label word of the point with ascending index `point`; b1 is the MSB.
  std::uint32_t word(std::size_t point) const { return words_[point]; }
  /// Bit b_level of the point, level in [1, m].
  int bit(std::size_t point, int level) const {
    return static_cast<int>((words_[point] >> (m_ - level)) & 1u);
  }
  /// Point index carrying the given label word.
  std::size_t point_of(std::uint32_t word) const { return inverse_[word]; }

  /// Returns the labeling with bit `level` complemented at every point.
  Labeling with_flipped_level(int level) const;

 private:
  LabelingKind kind_;
  int m_;
  std::vector<std::uint32_t> words_;
  std::vector<std::size_t> inverse_;
};

Labeling make_labeling(LabelingKind kind, int m);

/// Distribution of one binary level: probability of bit value 1.
struct BitLevelDistribution {
  double p1 = 0.5;

  double entropy() const;
};

/// Independent bit levels 2..m; the sign level is uniform and implicit.
struct ProductInputDistribution {
  std::vector<BitLevelDistribution> levels;  // levels[0] is level 2

  int m() const { return static_cast<int>(levels.size()) + 1; }
  /// H(X) = 1 + sum of the level entropies.
  double entropy() const;

  static ProductInputDistribution uniform(int m);
  static ProductInputDistribution from_p1(std::span<const double> p1);
};

/// Binary entropy function in bits.
double binary_entropy(double p);

/// Entropy in bits of a probability vector.
double entropy(std::span<const double> p);

/// P_X(x) = 0.5 * prod_i P_{B_i}(b_i(x)) with the bits taken from `lab`.
SymbolDistribution induced_symbol_distribution(const ProductInputDistribution& dist,
                                               const Labeling& lab,
                                               const AskConstellation& c);

/// Uniform distribution over all 2^m points.
SymbolDistribution uniform_distribution(const AskConstellation& c);

/// Symmetric distribution built from amplitude probabilities P_A(1), P_A(3), ...
SymbolDistribution symmetric_from_amplitudes(std::span<const double> amplitude_probs);

/// E[X^2] = sum_x P_X(x) (delta x)^2.
double second_moment(std::span<const double> px, const AskConstellation& c);

}  // namespace pdmkit
