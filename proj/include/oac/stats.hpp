#pragma once

// MSE analysis of the balanced-numeral estimator: closed-form variance and
// Bayesian MSE under uniform inputs, and the Monte-Carlo harness that checks
// them against the simulated uplink.

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "oac/baselines.hpp"
#include "oac/numerals.hpp"
#include "oac/phy.hpp"

namespace oac {

struct BmseBreakdown {
  double sigma2_channel = 0.0;
  double sigma2_quan = 0.0;
  double total = 0.0;
  double e_channel = 0.0;
  double e_quan = 0.0;
};

struct McEstimate {
  double mean = 0.0;
  double ci_halfwidth = 0.0;  // 95 %
  std::int64_t trials = 0;
};

// Var[g_hat] for fixed counts, one count vector (length beta - 1) per
// numeral position, least-significant position first.
double theoretical_var_given_counts(std::span<const std::vector<int>> counts, const CodecConfig& codec,
                                    const PhyConfig& phy);

// Closed-form BMSE for inputs ~ U[-v_max', v_max'].
BmseBreakdown theoretical_bmse(const CodecConfig& codec, const PhyConfig& phy);

// Large-K, large-beta^D limit v_max^2 / (3 R beta).
double bmse_asymptote(const CodecConfig& codec, int num_antennas);

enum class InputDistribution { uniform, gaussian };

InputDistribution parse_distribution(std::string_view name);
std::string_view to_string(InputDistribution d);

struct InputModel {
  InputDistribution kind = InputDistribution::uniform;
  double uniform_half_width = 1.0;
  double gaussian_variance = 0.2;
};

struct McSetup {
  Scheme scheme = Scheme::balanced;
  CodecConfig codec{5, 2, 1.0};
  PhyConfig phy;
  GoldenbaumConfig goldenbaum;
  InputModel input;
  std::int64_t trials = 100000;
  std::uint64_t seed = 1;
};

// Per-trial error g_hat - g_bar for one gradient carried by K devices. Trial
// t draws fresh inputs, channel and noise from its own stream derived from
// (seed, t), so the output is independent of the worker count.
std::vector<double> mc_errors(const McSetup& setup);

McEstimate mc_bmse(const McSetup& setup);

// Mean and 95 % half-width of x.
McEstimate summarize(std::span<const double> x);

// Fisher-Pearson sample skewness m3 / m2^{3/2}.
double sample_skewness(std::span<const double> x);

struct Histogram {
  std::vector<double> edges;  // bins + 1
  std::vector<std::int64_t> counts;
  double skewness = 0.0;
  std::int64_t samples = 0;
};

// Histogram of the errors on [-range, range]; samples outside land in the
// end bins. Skewness uses every sample.
Histogram histogram(std::span<const double> errors, int bins, double range);
Histogram error_histogram(const McSetup& setup, int bins, double range);

}  // namespace oac
