#include "oac/numerals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace oac {

namespace {

constexpr std::int64_t kMaxLevels = std::int64_t{1} << 53;

}  // namespace

CodecConfig::CodecConfig(int beta, int digits, double v_max) : beta_(beta), digits_(digits), v_max_(v_max) {
  if (beta < 3 || beta % 2 == 0)
    throw ConfigError("codec.beta: base must be an odd integer >= 3, got " + std::to_string(beta));
  if (digits < 1) throw ConfigError("codec.digits: must be >= 1, got " + std::to_string(digits));
  if (!(v_max > 0.0) || !std::isfinite(v_max))
    throw ConfigError("codec.v_max: must be a positive finite number");
  levels_ = 1;
  for (int i = 0; i < digits; ++i) {
    if (levels_ > kMaxLevels / beta) throw ConfigError("codec.digits: beta^digits exceeds 2^53");
    levels_ *= beta;
  }
}

double CodecConfig::unit_range_v_max(int beta, int digits) {
  const CodecConfig probe(beta, digits, 1.0);
  const auto levels = static_cast<double>(probe.levels());
  return (levels - 1.0) / levels;
}

SymbolSet symbol_set(int beta) {
  if (beta < 3 || beta % 2 == 0)
    throw ConfigError("beta: base must be an odd integer >= 3, got " + std::to_string(beta));
  SymbolSet set;
  set.symbols.resize(static_cast<std::size_t>(beta));
  for (int j = 0; j < beta - 1; ++j) set.symbols[static_cast<std::size_t>(j)] = (j % 2 == 1) ? (j + 1) / 2 : -(j + 2) / 2;
  set.symbols.back() = 0;
  return set;
}

int symbol_index(int value, int beta) {
  const int half = (beta - 1) / 2;
  if (value < -half || value > half)
    throw DomainError("symbol_index: " + std::to_string(value) + " is not a base-" + std::to_string(beta) + " numeral");
  if (value == 0) return beta - 1;
  return value > 0 ? 2 * value - 1 : -2 * value - 2;
}

NumeralSeq NumeralSeq::from_msb_first(std::span<const int> msb_first) {
  return NumeralSeq(std::vector<int>(msb_first.rbegin(), msb_first.rend()));
}

std::vector<int> NumeralSeq::msb_first() const { return {digits_.rbegin(), digits_.rend()}; }

NumeralSeq encode(double v, const CodecConfig& cfg) {
  if (!std::isfinite(v)) throw DomainError("encode: input must be finite");
  const double clamped = std::clamp(v, -cfg.v_max(), cfg.v_max());
  const auto xi = static_cast<double>(cfg.xi());
  // The floor can land one past 2 xi at the upper boundary after rounding.
  auto level = static_cast<std::int64_t>(std::floor(xi / cfg.v_max() * clamped + xi + 0.5));
  level = std::clamp<std::int64_t>(level, 0, 2 * cfg.xi());

  std::vector<int> digits(static_cast<std::size_t>(cfg.digits()));
  for (auto& d : digits) {
    d = static_cast<int>(level % cfg.beta()) - cfg.half_base();
    level /= cfg.beta();
  }
  return NumeralSeq(std::move(digits));
}

std::vector<double> average_numerals(std::span<const NumeralSeq> seqs) {
  if (seqs.empty()) throw DomainError("average_numerals: empty cohort");
  const int length = seqs.front().size();
  std::vector<long double> sums(static_cast<std::size_t>(length), 0.0L);
  for (const auto& s : seqs) {
    if (s.size() != length) throw DomainError("average_numerals: sequences have mixed lengths");
    for (int i = 0; i < length; ++i) sums[static_cast<std::size_t>(i)] += s.digit(i);
  }
  std::vector<double> mean(sums.size());
  const auto k = static_cast<long double>(seqs.size());
  std::transform(sums.begin(), sums.end(), mean.begin(), [k](long double s) { return static_cast<double>(s / k); });
  return mean;
}

std::vector<int> counts_from_numerals(std::span<const NumeralSeq> seqs, int position, int beta) {
  std::vector<int> counts(static_cast<std::size_t>(beta - 1), 0);
  for (const auto& s : seqs) {
    if (position < 0 || position >= s.size())
      throw DomainError("counts_from_numerals: position " + std::to_string(position) + " out of range");
    const int j = symbol_index(s.digit(position), beta);
    if (j < beta - 1) ++counts[static_cast<std::size_t>(j)];
  }
  return counts;
}

}  // namespace oac
