#pragma once

// Non-coherent comparison schemes: Goldenbaum's analog energy aggregation and
// FSK majority vote, plus the scheme selector shared with the trainer.

#include <array>
#include <complex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "oac/phy.hpp"

namespace oac {

enum class Scheme { balanced, goldenbaum, fskmv, ideal };

Scheme parse_scheme(std::string_view name);
std::string_view to_string(Scheme scheme);

struct GoldenbaumConfig {
  int seq_len = 12;  // L
  double v_max = 1.0;

  void validate() const;
  // epsilon(x) = a x + b maps [-v_max, v_max] onto [0, 2 v_max].
  double a() const { return 1.0; }
  double b() const { return v_max; }
  double pre_processing(double v) const;  // epsilon(clamp(v))
};

// Subcarriers one gradient occupies under each scheme.
int resource_width(Scheme scheme, const CodecConfig& codec, const GoldenbaumConfig& goldenbaum);

// sqrt(epsilon(v)) times L phases drawn from {1, -1, j, -j}.
std::vector<std::complex<double>> goldenbaum_tx(double v, const GoldenbaumConfig& cfg, Rng& rng);

// Mean received energy per element and antenna -> clamped mean estimate.
double goldenbaum_rx_from_energy(double mean_energy, int num_eds, double noise_var, const GoldenbaumConfig& cfg);
double goldenbaum_rx(const RxResourceGrid& grid, const ResourceSet& rset, int num_eds, double noise_var,
                     const GoldenbaumConfig& cfg);

Eigen::VectorXd goldenbaum_over_the_air(std::span<const Eigen::VectorXd> local, const GoldenbaumConfig& cfg,
                                        const PhyConfig& phy, Rng& rng);

inline constexpr double kFskEnergy = 2.0;

// sign(0) = +1.
inline int sign_vote(double g) { return g >= 0.0 ? 1 : -1; }

// (sqrt(2), 0) for +1 and (0, sqrt(2)) for -1.
std::array<std::complex<double>, 2> fskmv_tx(int sign);

// +1 iff ||y_plus||^2 >= ||y_minus||^2.
int fskmv_rx(const Eigen::Ref<const Eigen::VectorXcd>& y_plus, const Eigen::Ref<const Eigen::VectorXcd>& y_minus);

// Majority-vote sign vector in {-1, +1}^Q.
Eigen::VectorXd fskmv_over_the_air(std::span<const Eigen::VectorXd> local, const PhyConfig& phy, Rng& rng);

}  // namespace oac
