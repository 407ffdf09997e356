#include <doctest.h>

#include <bit>
#include <cmath>
#include <random>
#include <set>
#include <vector>

#include "pdmkit/constellation.hpp"
#include "pdmkit/error.hpp"

using namespace pdmkit;

namespace {

// Reflect-and-prefix Gray code: the m-bit list is 0·G(m-1) followed by
// 1·reverse(G(m-1)).
std::vector<std::uint32_t> reflected_gray(int m) {
  std::vector<std::uint32_t> g{0, 1};
  for (int b = 2; b <= m; ++b) {
    std::vector<std::uint32_t> next = g;
    for (auto it = g.rbegin(); it != g.rend(); ++it) next.push_back((1u << (b - 1)) | *it);
    g = next;
  }
  return g;
}

std::uint32_t amplitude_label(const Labeling& lab, std::size_t j) {
  return lab.word(j) & ((1u << (lab.m() - 1)) - 1);
}

}  // namespace

TEST_CASE("ask points") {
  CHECK(make_ask(2).points == std::vector<double>{-3, -1, 1, 3});
  const auto c3 = make_ask(3);
  CHECK(c3.size() == 8);
  CHECK(c3.points.front() == -7);
  CHECK(c3.points.back() == 7);
  const auto c6 = make_ask(6);
  CHECK(c6.size() == 64);
  CHECK(c6.max_amplitude() == 63);
  CHECK(c6.amplitude_count() == 32);
  CHECK(c6.delta == 1.0);
  for (int m = 2; m <= 10; ++m) {
    const auto c = make_ask(m);
    for (std::size_t j = 0; j + 1 < c.size(); ++j) CHECK(c.points[j + 1] - c.points[j] == 2.0);
    for (std::size_t j = 0; j < c.size(); ++j) CHECK(c.points[j] == -c.points[c.size() - 1 - j]);
  }
  CHECK_THROWS_AS(make_ask(1), ConfigError);
  CHECK_THROWS_AS(make_ask(17), ConfigError);
}

TEST_CASE("brgc matches the reflect-and-prefix construction") {
  for (int m = 2; m <= 8; ++m) {
    const auto g = reflected_gray(m);
    const Labeling lab(LabelingKind::Brgc, m);
    for (std::size_t j = 0; j < g.size(); ++j) CHECK(lab.word(j) == g[j]);
  }
}

TEST_CASE("labeling structure") {
  for (int m = 2; m <= 8; ++m) {
    for (auto kind : {LabelingKind::Brgc, LabelingKind::Nbbc}) {
      const Labeling lab = make_labeling(kind, m);
      const std::size_t size = std::size_t{1} << m;
      std::set<std::uint32_t> words;
      for (std::size_t j = 0; j < size; ++j) {
        words.insert(lab.word(j));
        CHECK(lab.point_of(lab.word(j)) == j);
        // sign bit 0 on the negative half
        CHECK(lab.bit(j, 1) == (j >= size / 2 ? 1 : 0));
        // amplitude label shared by x and -x
        CHECK(amplitude_label(lab, j) == amplitude_label(lab, size - 1 - j));
      }
      CHECK(words.size() == size);
      if (kind == LabelingKind::Brgc) {
        for (std::size_t j = 0; j + 1 < size; ++j) CHECK(std::popcount(lab.word(j) ^ lab.word(j + 1)) == 1);
      }
    }
  }
}

TEST_CASE("nbbc amplitude label is the complemented natural binary rank") {
  const Labeling lab(LabelingKind::Nbbc, 3);
  const auto c = make_ask(3);
  std::set<std::uint32_t> labels;
  for (std::size_t j = 4; j < 8; ++j) {
    const auto rank = static_cast<std::uint32_t>((c.points[j] - 1) / 2);
    CHECK(amplitude_label(lab, j) == (3u & ~rank));
    labels.insert(amplitude_label(lab, j));
  }
  CHECK(labels.size() == 4);
  // amplitude 7 is all zeros, amplitude 1 all ones
  CHECK(amplitude_label(lab, 7) == 0u);
  CHECK(amplitude_label(lab, 4) == 3u);
  // a one on level 2 selects the lower half {1, 3}
  CHECK(lab.bit(4, 2) == 1);
  CHECK(lab.bit(5, 2) == 1);
  CHECK(lab.bit(6, 2) == 0);
}

TEST_CASE("induced distribution examples") {
  const auto c2 = make_ask(2);
  const Labeling n2(LabelingKind::Nbbc, 2);
  const auto u = induced_symbol_distribution(ProductInputDistribution::uniform(2), n2, c2);
  for (double p : u) CHECK(p == 0.25);

  const double one[] = {1.0};
  const auto low = induced_symbol_distribution(ProductInputDistribution::from_p1(one), n2, c2);
  CHECK(low == std::vector<double>{0.0, 0.5, 0.5, 0.0});

  const auto c3 = make_ask(3);
  const double p[] = {0.8, 0.6};
  const auto dist = ProductInputDistribution::from_p1(p);
  const auto px = induced_symbol_distribution(dist, Labeling(LabelingKind::Nbbc, 3), c3);
  double sum = 0;
  for (double v : px) sum += v;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-15));
  const double h = 1 + binary_entropy(0.8) + binary_entropy(0.6);
  CHECK(std::abs(entropy(px) - h) < 1e-12);
  CHECK(std::abs(dist.entropy() - h) < 1e-15);
  // amplitude 1 carries both lower-half bits
  CHECK(px[4] == doctest::Approx(0.5 * 0.8 * 0.6));

  CHECK_THROWS_AS(induced_symbol_distribution(dist, Labeling(LabelingKind::Nbbc, 2), c2), ConfigError);
}

TEST_CASE("entropy identity and symmetry for random product inputs") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int t = 0; t < 200; ++t) {
    const int m = 2 + t % 7;
    std::vector<double> p1(static_cast<std::size_t>(m - 1));
    for (auto& v : p1) v = uni(rng);
    const auto dist = ProductInputDistribution::from_p1(p1);
    const auto c = make_ask(m);
    for (auto kind : {LabelingKind::Nbbc, LabelingKind::Brgc}) {
      const auto px = induced_symbol_distribution(dist, Labeling(kind, m), c);
      CHECK(std::abs(entropy(px) - dist.entropy()) < 1e-12);
      for (std::size_t j = 0; j < c.size(); ++j) CHECK(px[j] == px[c.size() - 1 - j]);
    }
  }
}

TEST_CASE("polarity flip of one level leaves the symbol distribution unchanged") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int m = 2; m <= 6; ++m) {
    std::vector<double> p1(static_cast<std::size_t>(m - 1));
    for (auto& v : p1) v = uni(rng);
    const auto c = make_ask(m);
    const Labeling lab(LabelingKind::Nbbc, m);
    const auto px = induced_symbol_distribution(ProductInputDistribution::from_p1(p1), lab, c);
    for (int level = 2; level <= m; ++level) {
      auto flipped = p1;
      flipped[static_cast<std::size_t>(level - 2)] = 1.0 - flipped[static_cast<std::size_t>(level - 2)];
      const auto py = induced_symbol_distribution(ProductInputDistribution::from_p1(flipped),
                                                  lab.with_flipped_level(level), c);
      for (std::size_t j = 0; j < c.size(); ++j) CHECK(py[j] == doctest::Approx(px[j]).epsilon(1e-14));
    }
  }
}

TEST_CASE("second moment") {
  auto c2 = make_ask(2);
  CHECK(second_moment(uniform_distribution(c2), c2) == doctest::Approx(5.0));
  for (int m = 2; m <= 10; ++m) {
    auto c = make_ask(m);
    const double closed = (std::pow(4.0, m) - 1.0) / 3.0;
    CHECK(second_moment(uniform_distribution(c), c) == doctest::Approx(closed).epsilon(1e-13));
    const auto px = symmetric_from_amplitudes(std::vector<double>(c.amplitude_count(), 1.0 / c.amplitude_count()));
    c.delta = 0.37;
    CHECK(second_moment(px, c) == doctest::Approx(0.37 * 0.37 * closed).epsilon(1e-13));
    c.delta = 0.0;
    CHECK(second_moment(px, c) == 0.0);
  }
}

TEST_CASE("binary entropy and symmetric amplitudes") {
  CHECK(binary_entropy(0.5) == 1.0);
  CHECK(binary_entropy(0.0) == 0.0);
  CHECK(binary_entropy(1.0) == 0.0);
  CHECK(binary_entropy(0.2) == doctest::Approx(0.7219280948873623));
  CHECK(BitLevelDistribution{0.11}.entropy() == doctest::Approx(binary_entropy(0.89)));
  const double pa[] = {0.5, 0.3, 0.2};
  CHECK(symmetric_from_amplitudes(pa) == std::vector<double>{0.1, 0.15, 0.25, 0.25, 0.15, 0.1});
  CHECK_THROWS_AS(ProductInputDistribution::from_p1(std::vector<double>{1.5}), ConfigError);
}
