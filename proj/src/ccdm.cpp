#include "pdmkit/ccdm.hpp"

#include <cmath>
#include <string>

#include "pdmkit/error.hpp"

namespace pdmkit {

const char* to_string(DecodeStatus s) {
  switch (s) {
    case DecodeStatus::Ok: return "ok";
    case DecodeStatus::CompositionViolation: return "composition violation";
    case DecodeStatus::OutOfCodebook: return "out of codebook";
    case DecodeStatus::InvalidSymbol: return "invalid symbol";
  }
  return "unknown";
}

namespace {

mpz_class binomial(std::size_t n, std::size_t r) {
  mpz_class b;
  mpz_bin_uiui(b.get_mpz_t(), n, r);
  return b;
}

// Walks positions c = n-1 .. 0 keeping B = C(c, w), w = ones still to place.
class BinomialColumn {
 public:
  BinomialColumn(const mpz_class& start, std::size_t c, std::size_t w) : b_(start), c_(c), w_(w) {}

  const mpz_class& value() const { return b_; }
  std::size_t weight() const { return w_; }

  // Move to c - 1; `one` tells whether position c holds a one.
  void step(bool one) {
    if (c_ == 0) return;
    if (one) {
      // C(c-1, w-1) = C(c, w) * w / c
      b_ *= static_cast<unsigned long>(w_);
      mpz_divexact_ui(b_.get_mpz_t(), b_.get_mpz_t(), c_);
      --w_;
    } else if (c_ > w_) {
      // C(c-1, w) = C(c, w) * (c - w) / c
      b_ *= static_cast<unsigned long>(c_ - w_);
      mpz_divexact_ui(b_.get_mpz_t(), b_.get_mpz_t(), c_);
    } else {
      b_ = 0;
    }
    --c_;
  }

 private:
  mpz_class b_;
  std::size_t c_;
  std::size_t w_;
};

}  // namespace

MatcherCode::MatcherCode(std::size_t n, std::size_t n1) : n_(n), n1_(n1) {
  if (n == 0) throw ConfigError("matcher output length must be positive");
  if (n1 > n) throw ConfigError("matcher composition exceeds output length");
  const mpz_class total = binomial(n, n1);
  max_k_ = mpz_sizeinbase(total.get_mpz_t(), 2) - 1;
  k_ = max_k_;
  top_binomial_ = binomial(n - 1, n1);
}

MatcherCode::MatcherCode(std::size_t n, std::size_t n1, std::size_t k) : MatcherCode(n, n1) {
  if (k > max_k_) {
    throw ConfigError("infeasible matcher input length k=" + std::to_string(k) + " for C(" +
                      std::to_string(n) + ", " + std::to_string(n1) + "), at most " +
                      std::to_string(max_k_));
  }
  k_ = k;
}

double MatcherCode::rate() const { return static_cast<double>(k_) / static_cast<double>(n_); }

Bits MatcherCode::encode(std::span<const std::uint8_t> data) const {
  if (data.size() != k_) {
    throw ConfigError("matcher expects " + std::to_string(k_) + " input bits, got " +
                      std::to_string(data.size()));
  }
  mpz_class r = 0;
  for (std::size_t i = 0; i < k_; ++i) {
    if (data[i]) mpz_setbit(r.get_mpz_t(), k_ - 1 - i);
  }
  Bits out(n_, 0);
  BinomialColumn col(top_binomial_, n_ - 1, n1_);
  for (std::size_t c = n_; c-- > 0;) {
    if (col.weight() == 0) break;
    const bool one = col.value() <= r;
    if (one) {
      r -= col.value();
      out[c] = 1;
    }
    col.step(one);
  }
  return out;
}

mpz_class MatcherCode::rank(std::span<const std::uint8_t> word) const {
  mpz_class r = 0;
  BinomialColumn col(top_binomial_, n_ - 1, n1_);
  for (std::size_t c = n_; c-- > 0;) {
    if (col.weight() == 0) break;
    const bool one = word[c] != 0;
    if (one) r += col.value();
    col.step(one);
  }
  return r;
}

DecodeResult MatcherCode::decode(std::span<const std::uint8_t> word) const {
  if (word.size() != n_) {
    throw ConfigError("matcher expects " + std::to_string(n_) + " output bits, got " +
                      std::to_string(word.size()));
  }
  std::size_t weight = 0;
  for (auto b : word) weight += b != 0;
  if (weight != n1_) return {DecodeStatus::CompositionViolation, {}};

  const mpz_class r = rank(word);
  if (mpz_sizeinbase(r.get_mpz_t(), 2) > k_ && r != 0) return {DecodeStatus::OutOfCodebook, {}};

  DecodeResult res;
  res.bits.resize(k_);
  for (std::size_t i = 0; i < k_; ++i) {
    res.bits[i] = static_cast<std::uint8_t>(mpz_tstbit(r.get_mpz_t(), k_ - 1 - i));
  }
  return res;
}

std::array<double, 2> MatcherCode::output_distribution() const {
  const double p1 = static_cast<double>(n1_) / static_cast<double>(n_);
  return {1.0 - p1, p1};
}

std::size_t composition_ones(std::size_t n, double p1) {
  if (!(p1 >= 0.0 && p1 <= 1.0)) throw ConfigError("target probability outside [0, 1]");
  const double target = static_cast<double>(n) * p1;
  const double lower = std::floor(target);
  // exact half-integers round down
  const std::size_t n1 = target - lower > 0.5 ? static_cast<std::size_t>(lower) + 1
                                              : static_cast<std::size_t>(lower);
  return n1 > n ? n : n1;
}

MatcherCode design_matcher(std::size_t n, double p1) {
  if (n == 0) throw ConfigError("matcher output length must be positive");
  return MatcherCode(n, composition_ones(n, p1));
}

std::map<int, double> empirical_distribution(std::span<const int> seq) {
  std::map<int, double> out;
  if (seq.empty()) return out;
  for (int v : seq) out[v] += 1.0;
  for (auto& [v, p] : out) p /= static_cast<double>(seq.size());
  return out;
}

std::array<double, 2> empirical_distribution(std::span<const std::uint8_t> bits) {
  if (bits.empty()) return {0.0, 0.0};
  std::size_t ones = 0;
  for (auto b : bits) ones += b != 0;
  const double p1 = static_cast<double>(ones) / static_cast<double>(bits.size());
  return {1.0 - p1, p1};
}

}  // namespace pdmkit
