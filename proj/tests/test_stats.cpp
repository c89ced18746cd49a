#include <cmath>
#include <random>

#include "doctest.h"

#include "oac/random.hpp"
#include "oac/stats.hpp"

using namespace oac;

namespace {

// E[(K_l + c)^2] for K_l ~ Binomial(K, 1/beta), by direct summation.
long double binomial_second_moment(int k, int beta, long double c) {
  const long double p = 1.0L / beta;
  long double acc = 0.0L;
  for (int n = 0; n <= k; ++n) {
    const long double log_pmf = std::lgamma(k + 1.0L) - std::lgamma(n + 1.0L) - std::lgamma(k - n + 1.0L) +
                                n * std::log(p) + (k - n) * std::log1p(-p);
    acc += std::exp(log_pmf) * (n + c) * (n + c);
  }
  return acc;
}

// Channel and quantization terms assembled symbol by symbol.
long double oracle_bmse(int beta, int digits, int k, int r, double noise_var, double v_max) {
  const long double es = beta - 1.0L;
  const long double c = noise_var / es;
  const long double levels = std::pow(static_cast<long double>(beta), digits);
  const long double xi = (levels - 1.0L) / 2.0L;
  long double sum = 0.0L;
  for (int i = 0; i < digits; ++i) {
    long double inner = 0.0L;
    for (int a = 1; a <= (beta - 1) / 2; ++a) inner += 2.0L * a * a * binomial_second_moment(k, beta, c);
    sum += inner * std::pow(static_cast<long double>(beta), 2 * i);
  }
  const long double v2 = static_cast<long double>(v_max) * v_max;
  const long double channel = v2 * sum / (xi * xi * r * k * k);
  const long double step = 2.0L * v_max / (levels - 1.0L);
  return channel + step * step / (12.0L * k);
}

PhyConfig phy_of(int k, int r, double noise_var) {
  PhyConfig p;
  p.num_eds = k;
  p.num_antennas = r;
  p.noise_var = noise_var;
  return p;
}

}  // namespace

TEST_SUITE("stats") {

TEST_CASE("closed form agrees with binomial enumeration") {
  for (int beta : {3, 5, 7})
    for (int d : {1, 2, 3})
      for (int k : {1, 2, 25})
        for (int r : {1, 5, 25})
          for (double nv : {0.0, 0.01, 1.0}) {
            const CodecConfig c(beta, d, 0.8);
            const auto b = theoretical_bmse(c, phy_of(k, r, nv));
            const double oracle = static_cast<double>(oracle_bmse(beta, d, k, r, nv, 0.8));
            REQUIRE(b.total == doctest::Approx(oracle).epsilon(1e-12));
          }
}

TEST_CASE("breakdown is additive and scales with v_max squared") {
  const CodecConfig c(5, 2, 1.0);
  const auto b = theoretical_bmse(c, phy_of(25, 1, 0.01));
  CHECK(b.total == doctest::Approx(b.sigma2_channel + b.sigma2_quan).epsilon(1e-15));
  CHECK(b.total == doctest::Approx(0.0838688).epsilon(1e-5));
  const auto half = theoretical_bmse(c.with_v_max(0.5), phy_of(25, 1, 0.01));
  CHECK(half.total == doctest::Approx(b.total / 4).epsilon(1e-14));
}

TEST_CASE("channel term vanishes with many antennas") {
  const CodecConfig c(7, 2, 1.0);
  const auto many = theoretical_bmse(c, phy_of(25, 100000, 0.01));
  const auto one = theoretical_bmse(c, phy_of(25, 1, 0.01));
  CHECK(many.sigma2_channel < one.sigma2_channel * 1e-4);
  CHECK(many.sigma2_quan == one.sigma2_quan);
}

TEST_CASE("large K and many levels approach the asymptote") {
  const CodecConfig c(9, 8, 1.0);
  const auto b = theoretical_bmse(c, phy_of(100000, 3, 0.0));
  CHECK(b.total == doctest::Approx(bmse_asymptote(c, 3)).epsilon(1e-4));
}

TEST_CASE("bmse decreases with the base") {
  double prev = 1e9;
  for (int beta : {3, 5, 7, 9, 11}) {
    const auto b = theoretical_bmse(CodecConfig(beta, 2, 1.0), phy_of(25, 1, 0.01));
    CHECK(b.total < prev);
    prev = b.total;
  }
}

TEST_CASE("variance given counts") {
  const CodecConfig c(5, 2, 1.0);
  PhyConfig p = phy_of(4, 1, 0.0);
  const std::vector<std::vector<int>> none{{0, 0, 0, 0}, {0, 0, 0, 0}};
  CHECK(theoretical_var_given_counts(none, c, p) == 0.0);
  const std::vector<std::vector<int>> bad{{0, 0, 0, 0}};
  CHECK_THROWS_AS(theoretical_var_given_counts(bad, c, p), DomainError);
}

TEST_CASE("classical MSE for fixed inputs matches simulation") {
  const CodecConfig c(5, 2, 1.0);
  const PhyConfig p = phy_of(4, 2, 0.05);
  std::vector<Eigen::VectorXd> local;
  for (double v : {0.3, -0.7, 0.55, 0.1}) local.push_back(Eigen::VectorXd::Constant(1, v));
  std::vector<NumeralSeq> seqs;
  double qmean = 0.0;
  for (const auto& v : local) {
    seqs.push_back(encode(v[0], c));
    qmean += quantize(v[0], c) / 4.0;
  }
  std::vector<std::vector<int>> counts;
  for (int i = 0; i < 2; ++i) counts.push_back(counts_from_numerals(seqs, i, 5));
  const double theory = theoretical_var_given_counts(counts, c, p);

  PhyConfig small = p;
  small.num_subcarriers = 8;
  small.num_symbols = 1;
  const int n = 40000;
  double m = 0.0;
  double m2 = 0.0;
  for (int t = 0; t < n; ++t) {
    Rng rng(derive_seed(77, t));
    const double e = balanced_over_the_air(local, c, small, rng)[0] - qmean;
    m += e;
    m2 += e * e;
  }
  m /= n;
  const double var = m2 / n - m * m;
  CHECK(std::abs(m) < 4 * std::sqrt(theory / n));
  CHECK(var == doctest::Approx(theory).epsilon(0.04));
}

TEST_CASE("Monte-Carlo BMSE matches the closed form") {
  McSetup s;
  s.codec = CodecConfig(5, 2, CodecConfig::unit_range_v_max(5, 2));
  s.phy = phy_of(25, 4, 0.01);
  s.trials = 20000;
  s.seed = 5;
  const auto est = mc_bmse(s);
  const double theory = theoretical_bmse(s.codec, s.phy).total;
  CHECK(std::abs(est.mean - theory) < 3 * est.ci_halfwidth);
}

TEST_CASE("Monte-Carlo output does not depend on the worker count") {
  McSetup s;
  s.trials = 5000;
  s.phy = phy_of(10, 2, 0.01);
  setenv("OAC_WORKERS", "1", 1);
  const auto a = mc_errors(s);
  setenv("OAC_WORKERS", "4", 1);
  const auto b = mc_errors(s);
  unsetenv("OAC_WORKERS");
  CHECK(a == b);
}

TEST_CASE("summary statistics") {
  const std::vector<double> x{1.0, 2.0, 3.0, 4.0};
  const auto s = summarize(x);
  CHECK(s.mean == 2.5);
  CHECK(s.trials == 4);
  CHECK(s.ci_halfwidth == doctest::Approx(1.96 * std::sqrt(5.0 / 3.0 / 4.0)).epsilon(1e-3));
  CHECK(sample_skewness(x) == doctest::Approx(0.0).epsilon(1e-12));
  const std::vector<double> skewed{0.0, 0.0, 0.0, 10.0};
  CHECK(sample_skewness(skewed) > 1.0);
}

TEST_CASE("histogram binning") {
  const std::vector<double> x{-2.0, -0.5, 0.0, 0.25, 0.9, 5.0};
  const auto h = histogram(x, 4, 1.0);
  REQUIRE(h.edges.size() == 5);
  CHECK(h.edges.front() == -1.0);
  CHECK(h.edges.back() == 1.0);
  CHECK(h.counts == std::vector<std::int64_t>{1, 1, 2, 2});
  CHECK(h.samples == 6);
}

TEST_CASE("distribution names") {
  CHECK(parse_distribution("gaussian") == InputDistribution::gaussian);
  CHECK_THROWS_AS(parse_distribution("laplace"), ConfigError);
}

}
