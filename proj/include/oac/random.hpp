#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>

namespace oac {

using Rng = std::mt19937_64;

namespace detail {

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace detail

// Derives an independent stream key from a parent key and any number of
// indices. Equal inputs give equal keys on every platform.
template <typename... Ints>
constexpr std::uint64_t derive_seed(std::uint64_t parent, Ints... indices) noexcept {
  std::uint64_t key = detail::mix64(parent);
  ((key = detail::mix64(key ^ detail::mix64(static_cast<std::uint64_t>(indices) + 0x632be59bd9b4e019ULL))), ...);
  return key;
}

inline Rng make_rng(std::uint64_t key) { return Rng(key); }

// Uniform double in [0, 1) from the top 53 bits of a 64-bit word.
constexpr double unit_interval(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Circularly symmetric complex Gaussian with E|z|^2 = variance.
template <typename Engine>
std::complex<double> complex_gaussian(Engine& rng, double variance = 1.0) {
  std::normal_distribution<double> n(0.0, std::sqrt(variance / 2.0));
  const double re = n(rng);
  return {re, n(rng)};
}

template <typename Engine>
std::complex<double> unit_phasor(Engine& rng) {
  std::uniform_real_distribution<double> u(0.0, 2.0 * std::numbers::pi);
  return std::polar(1.0, u(rng));
}

// Counter-based CN(0,1) sample: a pure function of (key, counter). Lets a
// channel realization be evaluated lazily in any order.
inline std::complex<double> hashed_complex_gaussian(std::uint64_t key, std::uint64_t counter) noexcept {
  const std::uint64_t a = detail::mix64(key ^ detail::mix64(2 * counter));
  const std::uint64_t b = detail::mix64(key ^ detail::mix64(2 * counter + 1));
  // 1 - u keeps the log argument in (0, 1].
  const double radius = std::sqrt(-std::log(1.0 - unit_interval(a)));
  const double angle = 2.0 * std::numbers::pi * unit_interval(b);
  return std::polar(radius, angle);
}

}  // namespace oac
