#include "oac/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "oac/parallel.hpp"

namespace oac {

double theoretical_var_given_counts(std::span<const std::vector<int>> counts, const CodecConfig& codec,
                                    const PhyConfig& phy) {
  if (static_cast<int>(counts.size()) != codec.digits())
    throw DomainError("theoretical_var_given_counts: one count vector per numeral position required");
  const auto symbols = symbol_set(codec.beta());
  const long double c = phy.noise_var / phy.energy(codec);
  long double sum = 0.0L;
  long double weight = 1.0L;  // beta^{2i}
  for (const auto& position : counts) {
    if (static_cast<int>(position.size()) != codec.beta() - 1)
      throw DomainError("theoretical_var_given_counts: count vector must have beta - 1 entries");
    long double inner = 0.0L;
    for (std::size_t l = 0; l < position.size(); ++l) {
      const long double a = symbols[static_cast<int>(l)];
      const long double t = position[l] + c;
      inner += a * a * t * t;
    }
    sum += inner * weight;
    weight *= static_cast<long double>(codec.beta()) * codec.beta();
  }
  const long double xi = static_cast<long double>(codec.xi());
  const long double k = phy.num_eds;
  const long double scale = static_cast<long double>(codec.v_max()) * codec.v_max() / (xi * xi * phy.num_antennas * k * k);
  return static_cast<double>(scale * sum);
}

BmseBreakdown theoretical_bmse(const CodecConfig& codec, const PhyConfig& phy) {
  const long double beta = codec.beta();
  const long double k = phy.num_eds;
  const long double r = phy.num_antennas;
  const long double c = phy.noise_var / phy.energy(codec);
  const long double levels = static_cast<long double>(codec.levels());

  // E[(K_l + c)^2] with K_l ~ Binomial(K, 1/beta), summed over symbols and
  // positions; numerals are i.i.d. uniform under uniform inputs.
  const long double bracket = 1.0L / beta + ((beta - 1.0L) / beta + 2.0L * c) / k + beta * c * c / (k * k);
  const long double e_channel = bracket / (3.0L * r) * (levels + 1.0L) / (levels - 1.0L);
  const long double e_quan = 1.0L / (3.0L * k * (levels - 1.0L) * (levels - 1.0L));

  const double v2 = codec.v_max() * codec.v_max();
  BmseBreakdown out;
  out.e_channel = static_cast<double>(e_channel);
  out.e_quan = static_cast<double>(e_quan);
  out.sigma2_channel = v2 * out.e_channel;
  out.sigma2_quan = v2 * out.e_quan;
  out.total = out.sigma2_channel + out.sigma2_quan;
  return out;
}

double bmse_asymptote(const CodecConfig& codec, int num_antennas) {
  return codec.v_max() * codec.v_max() / (3.0 * num_antennas * codec.beta());
}

InputDistribution parse_distribution(std::string_view name) {
  if (name == "uniform") return InputDistribution::uniform;
  if (name == "gaussian") return InputDistribution::gaussian;
  throw ConfigError("mc.distribution: expected uniform or gaussian, got '" + std::string(name) + "'");
}

std::string_view to_string(InputDistribution d) {
  return d == InputDistribution::uniform ? "uniform" : "gaussian";
}

namespace {

double one_trial(const McSetup& setup, const PhyConfig& phy, Rng& rng) {
  std::vector<Eigen::VectorXd> local(static_cast<std::size_t>(phy.num_eds), Eigen::VectorXd(1));
  long double mean = 0.0L;
  if (setup.input.kind == InputDistribution::uniform) {
    std::uniform_real_distribution<double> dist(-setup.input.uniform_half_width, setup.input.uniform_half_width);
    for (auto& g : local) mean += g[0] = dist(rng);
  } else {
    std::normal_distribution<double> dist(0.0, std::sqrt(setup.input.gaussian_variance));
    for (auto& g : local) mean += g[0] = dist(rng);
  }
  const double truth = static_cast<double>(mean / phy.num_eds);

  double estimate = truth;
  switch (setup.scheme) {
    case Scheme::balanced: estimate = balanced_over_the_air(local, setup.codec, phy, rng)[0]; break;
    case Scheme::goldenbaum: estimate = goldenbaum_over_the_air(local, setup.goldenbaum, phy, rng)[0]; break;
    case Scheme::fskmv: estimate = fskmv_over_the_air(local, phy, rng)[0]; break;
    case Scheme::ideal: break;
  }
  return estimate - truth;
}

}  // namespace

std::vector<double> mc_errors(const McSetup& setup) {
  if (setup.trials < 1) throw ConfigError("mc.trials: must be >= 1");
  setup.phy.validate();
  // One gradient per trial: the grid is a single block of its subcarriers.
  PhyConfig phy = setup.phy;
  phy.num_subcarriers = std::max(1, resource_width(setup.scheme, setup.codec, setup.goldenbaum));
  phy.num_symbols = 1;

  std::vector<double> errors(static_cast<std::size_t>(setup.trials));
  const ChunkPlan plan{errors.size()};
  parallel_for(plan.count(), [&](std::size_t c) {
    for (std::size_t t = plan.begin(c); t < plan.end(c); ++t) {
      auto rng = make_rng(derive_seed(setup.seed, t));
      errors[t] = one_trial(setup, phy, rng);
    }
  });
  return errors;
}

McEstimate summarize(std::span<const double> x) {
  McEstimate out;
  out.trials = static_cast<std::int64_t>(x.size());
  if (x.empty()) return out;
  long double sum = 0.0L;
  for (double v : x) sum += v;
  const long double mean = sum / x.size();
  long double ss = 0.0L;
  for (double v : x) ss += (v - mean) * (v - mean);
  out.mean = static_cast<double>(mean);
  if (x.size() > 1) out.ci_halfwidth = 1.96 * std::sqrt(static_cast<double>(ss / (x.size() - 1)) / x.size());
  return out;
}

McEstimate mc_bmse(const McSetup& setup) {
  auto errors = mc_errors(setup);
  for (auto& e : errors) e *= e;
  return summarize(errors);
}

double sample_skewness(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  long double sum = 0.0L;
  for (double v : x) sum += v;
  const long double mean = sum / x.size();
  long double m2 = 0.0L;
  long double m3 = 0.0L;
  for (double v : x) {
    const long double d = v - mean;
    m2 += d * d;
    m3 += d * d * d;
  }
  m2 /= x.size();
  m3 /= x.size();
  if (m2 == 0.0L) return 0.0;
  return static_cast<double>(m3 / std::pow(m2, 1.5L));
}

Histogram histogram(std::span<const double> errors, int bins, double range) {
  if (bins < 1) throw ConfigError("mc.bins: must be >= 1");
  if (!(range > 0.0)) throw ConfigError("mc.hist_range: must be > 0");
  Histogram h;
  h.edges.resize(static_cast<std::size_t>(bins) + 1);
  for (int b = 0; b <= bins; ++b) h.edges[static_cast<std::size_t>(b)] = -range + 2.0 * range * b / bins;
  h.counts.assign(static_cast<std::size_t>(bins), 0);
  for (double e : errors) {
    auto b = static_cast<long>(std::floor((e + range) / (2.0 * range) * bins));
    b = std::clamp<long>(b, 0, bins - 1);
    ++h.counts[static_cast<std::size_t>(b)];
  }
  h.skewness = sample_skewness(errors);
  h.samples = static_cast<std::int64_t>(errors.size());
  return h;
}

Histogram error_histogram(const McSetup& setup, int bins, double range) {
  return histogram(mc_errors(setup), bins, range);
}

}  // namespace oac
