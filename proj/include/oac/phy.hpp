#pragma once

// Frequency-domain multiple-access channel for the balanced-numeral OAC
// scheme: resource mapping, subcarrier activation, Rayleigh superposition
// with sync-error phase rotation, and the non-coherent energy receiver.

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "oac/numerals.hpp"
#include "oac/random.hpp"

namespace oac {

struct PhyConfig {
  int num_eds = 25;                     // K
  int num_antennas = 1;                 // R
  double noise_var = 0.01;              // sigma_n^2; SNR = 1 / noise_var
  std::optional<double> symbol_energy;  // E_s; unset means beta - 1
  int num_subcarriers = 1200;           // M
  int num_symbols = 64;                 // S, available OFDM symbols per round
  int sync_error_samples = 3;           // N_err
  int fft_size = 2048;                  // N_fft
  double sync_spread_s = 55.6e-9;       // T_sync
  double subcarrier_spacing_hz = 15e3;
  bool clip_counts = false;  // clip count estimates to [0, K] (ablation only)

  void validate() const;
  double energy(const CodecConfig& codec) const { return symbol_energy.value_or(codec.beta() - 1.0); }
  double bandwidth_hz() const { return num_subcarriers * subcarrier_spacing_hz; }
};

double noise_var_from_snr_db(double snr_db);
double snr_db_from_noise_var(double noise_var);

struct ResourceElement {
  int symbol = 0;      // t
  int subcarrier = 0;  // f
  bool operator==(const ResourceElement&) const = default;
};

// Time-frequency pairs reserved for one gradient. For the balanced scheme
// element (i, l) sits at index i * (beta - 1) + l.
struct ResourceSet {
  std::vector<ResourceElement> elements;
  int per_position = 1;

  const ResourceElement& at(int position, int option) const {
    return elements[static_cast<std::size_t>(position * per_position + option)];
  }
};

// Number of gradients one OFDM symbol carries when each needs `width`
// adjacent subcarriers.
int parallel_capacity(int width, int num_subcarriers);

// `width` adjacent subcarriers for gradient q, filling subcarriers of an
// OFDM symbol before moving to the next symbol. Throws CapacityError when q
// does not fit in num_symbols symbols.
ResourceSet resource_block(std::int64_t q, int width, int num_subcarriers, int num_symbols);

// (beta - 1) D adjacent subcarriers for gradient q.
ResourceSet resource_map(std::int64_t q, const CodecConfig& codec, const PhyConfig& phy);

struct TxEntry {
  ResourceElement at;
  std::complex<double> value;
};
// Non-zero transmit symbols of one device; absent entries are silent.
using TxMap = std::vector<TxEntry>;

// Activates, per numeral position, the subcarrier of its symbol with
// sqrt(E_s) times a random unit phasor. Zero numerals stay silent.
TxMap modulate(const NumeralSeq& seq, const ResourceSet& rset, double symbol_energy, Rng& rng);
void modulate_into(TxMap& out, const NumeralSeq& seq, const ResourceSet& rset, double symbol_energy, Rng& rng);

// Rayleigh fading coefficients h[k][r][t][f] ~ CN(0, 1), i.i.d. over
// devices, antennas and resource elements, each rotated by the device's
// timing-offset phase exp(-j 2 pi f delta_k / N_fft). Coefficients are
// evaluated on demand from a key, so only touched elements cost anything.
class ChannelRealization {
 public:
  ChannelRealization(int num_eds, int num_antennas, int fft_size, std::uint64_t key, std::vector<double> delays);

  std::complex<double> coefficient(int ed, int antenna, ResourceElement re) const;
  // Fading term without the timing rotation.
  std::complex<double> fading(int ed, int antenna, ResourceElement re) const;
  std::complex<double> sync_phase(int ed, int subcarrier) const;

  int num_eds() const { return num_eds_; }
  int num_antennas() const { return num_antennas_; }
  double delay(int ed) const { return delays_[static_cast<std::size_t>(ed)]; }

 private:
  int num_eds_;
  int num_antennas_;
  int fft_size_;
  std::uint64_t key_;
  std::vector<double> delays_;  // samples
};

// Fresh channel: delta_k = common receiver offset ~ U[0, N_err] plus
// per-device arrival offset ~ U[0, T_sync * bandwidth], both in samples.
ChannelRealization sample_channel(const PhyConfig& cfg, Rng& rng);

struct GridShape {
  int symbols = 1;
  int subcarriers = 1;
  int antennas = 1;
};

// Received R-dimensional vectors y[t][f].
class RxResourceGrid {
 public:
  explicit RxResourceGrid(GridShape shape);

  const GridShape& shape() const { return shape_; }
  Eigen::Map<const Eigen::VectorXcd> at(ResourceElement re) const;
  Eigen::Map<Eigen::VectorXcd> at(ResourceElement re);

 private:
  std::size_t offset(ResourceElement re) const;

  GridShape shape_;
  std::vector<std::complex<double>> data_;
};

// y = sum_k h_k x_k + w with w ~ CN(0, noise_var I_R) on every grid element.
RxResourceGrid superpose(std::span<const TxMap> tx, const ChannelRealization& chan, GridShape shape, double noise_var,
                         Rng& rng);

// Relaxed ML count estimate ||y||^2 / (E_s R) - noise_var / E_s. Not clipped.
double estimate_count(const Eigen::Ref<const Eigen::VectorXcd>& y, double symbol_energy, double noise_var);
double estimate_count_from_energy(double energy, int num_antennas, double symbol_energy, double noise_var);

// Exhaustive constrained ML over integer counts with sum <= K, given the
// received energies ||y_l||^2 for one numeral position. Test oracle only;
// throws UnsupportedSizeError when (K+1)^{beta-1} > 1e6.
std::vector<int> estimate_count_ml(std::span<const double> energies, int num_eds, int num_antennas,
                                   double symbol_energy, double noise_var);

// mu_hat_i for one gradient, least-significant first.
std::vector<double> estimate_numeral_means(const RxResourceGrid& grid, const ResourceSet& rset,
                                           const CodecConfig& codec, const PhyConfig& phy);

// g_hat_q = decode(mu_hat_{D-1}, ..., mu_hat_0) for every resource set.
Eigen::VectorXd estimate_gradient(const RxResourceGrid& grid, std::span<const ResourceSet> rsets,
                                  const CodecConfig& codec, const PhyConfig& phy);

// Shape of the grid that carries `num_gradients` gradients of `width`
// subcarriers each: ceil(Q / M_par) symbols of M subcarriers.
GridShape grid_for(std::int64_t num_gradients, int width, const PhyConfig& phy);

// Full uplink for one round: encode each device's gradient vector, modulate,
// superpose over a fresh channel and estimate the mean gradient. All devices
// share one channel realization. Consumes `rng` in a fixed order.
Eigen::VectorXd balanced_over_the_air(std::span<const Eigen::VectorXd> local, const CodecConfig& codec,
                                      const PhyConfig& phy, Rng& rng);

}  // namespace oac
