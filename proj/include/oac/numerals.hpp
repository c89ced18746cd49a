#pragma once

// Balanced base-beta numerals: encoder, decoder, mid-tread quantizer and the
// position-wise averaging that lets a mean of reals be formed from a mean of
// numerals.
//
// Storage order is least-significant first: digit(i) carries weight beta^i.
// Text and JSON forms are most-significant first, (x_{D-1}, ..., x_0).

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "oac/errors.hpp"

namespace oac {

class CodecConfig {
 public:
  // Throws ConfigError unless beta is odd and >= 3, digits >= 1 and
  // v_max > 0. beta^digits is capped at 2^53 so every level is exact.
  CodecConfig(int beta, int digits, double v_max);

  int beta() const { return beta_; }
  int digits() const { return digits_; }
  double v_max() const { return v_max_; }

  // beta^digits
  std::int64_t levels() const { return levels_; }
  // (beta^digits - 1) / 2
  std::int64_t xi() const { return (levels_ - 1) / 2; }
  // Quantization step 2 v_max / (beta^digits - 1).
  double step() const { return 2.0 * v_max_ / static_cast<double>(levels_ - 1); }
  // Input range covered by the reconstruction cells, v_max + step/2.
  double v_max_prime() const { return v_max_ + step() / 2.0; }
  // Largest numeral magnitude, (beta - 1) / 2.
  int half_base() const { return (beta_ - 1) / 2; }

  // Same base and length, different range. Used by the AAM controller.
  CodecConfig with_v_max(double v_max) const { return {beta_, digits_, v_max}; }

  // The v_max for which [-v_max', v_max'] = [-1, 1].
  static double unit_range_v_max(int beta, int digits);

 private:
  int beta_;
  int digits_;
  double v_max_;
  std::int64_t levels_;
};

// Ordered symbol list a_0, ..., a_{beta-1}; a_{beta-1} = 0.
struct SymbolSet {
  std::vector<int> symbols;

  int size() const { return static_cast<int>(symbols.size()); }
  int operator[](int j) const { return symbols[static_cast<std::size_t>(j)]; }
};

SymbolSet symbol_set(int beta);

// Index j with f_bal(j) == value. Zero maps to beta - 1.
int symbol_index(int value, int beta);

class NumeralSeq {
 public:
  NumeralSeq() = default;
  explicit NumeralSeq(std::vector<int> lsb_first) : digits_(std::move(lsb_first)) {}

  static NumeralSeq from_msb_first(std::span<const int> msb_first);

  int size() const { return static_cast<int>(digits_.size()); }
  int digit(int i) const { return digits_[static_cast<std::size_t>(i)]; }
  std::span<const int> lsb_first() const { return digits_; }
  std::vector<int> msb_first() const;

  bool operator==(const NumeralSeq&) const = default;

 private:
  std::vector<int> digits_;
};

NumeralSeq encode(double v, const CodecConfig& cfg);

// (v_max / xi) * sum_i x_i beta^i, least-significant first. Accepts
// fractional numerals (averages); no integrality check.
template <typename Scalar>
double decode(std::span<const Scalar> lsb_first, const CodecConfig& cfg) {
  if (static_cast<int>(lsb_first.size()) != cfg.digits())
    throw DomainError("decode: expected " + std::to_string(cfg.digits()) + " numerals, got " +
                      std::to_string(lsb_first.size()));
  long double acc = 0.0L;
  for (auto it = lsb_first.rbegin(); it != lsb_first.rend(); ++it)
    acc = acc * cfg.beta() + static_cast<long double>(*it);
  return static_cast<double>(acc * cfg.v_max() / static_cast<long double>(cfg.xi()));
}

inline double decode(const NumeralSeq& seq, const CodecConfig& cfg) {
  return decode(seq.lsb_first(), cfg);
}

inline double quantize(double v, const CodecConfig& cfg) { return decode(encode(v, cfg), cfg); }

// Position-wise mean of the numerals, least-significant first.
std::vector<double> average_numerals(std::span<const NumeralSeq> seqs);

// K_l = #{k : d_{k,position} = a_l} for l in [0, beta - 2]. The zero symbol
// is not counted.
std::vector<int> counts_from_numerals(std::span<const NumeralSeq> seqs, int position, int beta);

// (1/K) sum_l a_l counts[l]; counts may be real-valued estimates.
template <typename Scalar>
double average_from_counts(std::span<const Scalar> counts, const SymbolSet& symbols, int num_eds) {
  long double acc = 0.0L;
  for (std::size_t l = 0; l < counts.size(); ++l)
    acc += static_cast<long double>(symbols[static_cast<int>(l)]) * static_cast<long double>(counts[l]);
  return static_cast<double>(acc / num_eds);
}

}  // namespace oac
