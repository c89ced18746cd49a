#include "oac/phy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace oac {

void PhyConfig::validate() const {
  if (num_eds < 1) throw ConfigError("phy.num_eds: must be >= 1");
  if (num_antennas < 1) throw ConfigError("phy.num_antennas: must be >= 1");
  if (!(noise_var >= 0.0) || !std::isfinite(noise_var)) throw ConfigError("phy.noise_var: must be >= 0");
  if (symbol_energy && !(*symbol_energy > 0.0)) throw ConfigError("phy.symbol_energy: must be > 0");
  if (num_subcarriers < 1 || num_subcarriers > 65536) throw ConfigError("phy.num_subcarriers: must be in [1, 65536]");
  if (num_symbols < 1 || num_symbols > 65536) throw ConfigError("phy.num_symbols: must be in [1, 65536]");
  if (sync_error_samples < 0) throw ConfigError("phy.sync_error_samples: must be >= 0");
  if (fft_size < 1) throw ConfigError("phy.fft_size: must be >= 1");
  if (!(sync_spread_s >= 0.0)) throw ConfigError("phy.sync_spread_s: must be >= 0");
  if (!(subcarrier_spacing_hz > 0.0)) throw ConfigError("phy.subcarrier_spacing_hz: must be > 0");
}

double noise_var_from_snr_db(double snr_db) { return std::pow(10.0, -snr_db / 10.0); }

double snr_db_from_noise_var(double noise_var) { return -10.0 * std::log10(noise_var); }

int parallel_capacity(int width, int num_subcarriers) { return width > 0 ? num_subcarriers / width : 0; }

ResourceSet resource_block(std::int64_t q, int width, int num_subcarriers, int num_symbols) {
  const int per_symbol = parallel_capacity(width, num_subcarriers);
  const std::int64_t capacity = static_cast<std::int64_t>(per_symbol) * num_symbols;
  if (q < 0 || q >= capacity)
    throw CapacityError("resource map: gradient index " + std::to_string(q) + " exceeds capacity " +
                        std::to_string(capacity));
  const auto symbol = static_cast<int>(q / per_symbol);
  const int first = static_cast<int>(q % per_symbol) * width;
  ResourceSet rset;
  rset.elements.reserve(static_cast<std::size_t>(width));
  for (int j = 0; j < width; ++j) rset.elements.push_back({symbol, first + j});
  return rset;
}

ResourceSet resource_map(std::int64_t q, const CodecConfig& codec, const PhyConfig& phy) {
  auto rset = resource_block(q, (codec.beta() - 1) * codec.digits(), phy.num_subcarriers, phy.num_symbols);
  rset.per_position = codec.beta() - 1;
  return rset;
}

void modulate_into(TxMap& out, const NumeralSeq& seq, const ResourceSet& rset, double symbol_energy, Rng& rng) {
  const int beta = rset.per_position + 1;
  if (static_cast<int>(rset.elements.size()) != seq.size() * rset.per_position)
    throw DomainError("modulate: numeral count does not match the resource set");
  const double amplitude = std::sqrt(symbol_energy);
  for (int i = 0; i < seq.size(); ++i) {
    const int x = seq.digit(i);
    if (x == 0) continue;
    out.push_back({rset.at(i, symbol_index(x, beta)), amplitude * unit_phasor(rng)});
  }
}

TxMap modulate(const NumeralSeq& seq, const ResourceSet& rset, double symbol_energy, Rng& rng) {
  TxMap out;
  modulate_into(out, seq, rset, symbol_energy, rng);
  return out;
}

ChannelRealization::ChannelRealization(int num_eds, int num_antennas, int fft_size, std::uint64_t key,
                                       std::vector<double> delays)
    : num_eds_(num_eds), num_antennas_(num_antennas), fft_size_(fft_size), key_(key), delays_(std::move(delays)) {
  if (static_cast<int>(delays_.size()) != num_eds_) throw DomainError("channel: one delay per device required");
}

std::complex<double> ChannelRealization::fading(int ed, int antenna, ResourceElement re) const {
  const auto link = static_cast<std::uint64_t>(ed) * static_cast<std::uint64_t>(num_antennas_) +
                    static_cast<std::uint64_t>(antenna);
  const std::uint64_t counter =
      (link << 32) | (static_cast<std::uint64_t>(re.symbol) << 16) | static_cast<std::uint64_t>(re.subcarrier);
  return hashed_complex_gaussian(key_, counter);
}

std::complex<double> ChannelRealization::sync_phase(int ed, int subcarrier) const {
  const double delay = delays_[static_cast<std::size_t>(ed)];
  if (delay == 0.0) return {1.0, 0.0};
  return std::polar(1.0, -2.0 * std::numbers::pi * subcarrier * delay / fft_size_);
}

std::complex<double> ChannelRealization::coefficient(int ed, int antenna, ResourceElement re) const {
  return fading(ed, antenna, re) * sync_phase(ed, re.subcarrier);
}

ChannelRealization sample_channel(const PhyConfig& cfg, Rng& rng) {
  const std::uint64_t key = rng();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double receiver_offset = cfg.sync_error_samples * unit(rng);
  const double arrival_span = cfg.sync_spread_s * cfg.bandwidth_hz();
  std::vector<double> delays(static_cast<std::size_t>(cfg.num_eds));
  for (auto& d : delays) d = receiver_offset + arrival_span * unit(rng);
  return {cfg.num_eds, cfg.num_antennas, cfg.fft_size, key, std::move(delays)};
}

RxResourceGrid::RxResourceGrid(GridShape shape)
    : shape_(shape),
      data_(static_cast<std::size_t>(shape.symbols) * static_cast<std::size_t>(shape.subcarriers) *
            static_cast<std::size_t>(shape.antennas)) {}

std::size_t RxResourceGrid::offset(ResourceElement re) const {
  return (static_cast<std::size_t>(re.symbol) * static_cast<std::size_t>(shape_.subcarriers) +
          static_cast<std::size_t>(re.subcarrier)) *
         static_cast<std::size_t>(shape_.antennas);
}

Eigen::Map<const Eigen::VectorXcd> RxResourceGrid::at(ResourceElement re) const {
  return {data_.data() + offset(re), shape_.antennas};
}

Eigen::Map<Eigen::VectorXcd> RxResourceGrid::at(ResourceElement re) { return {data_.data() + offset(re), shape_.antennas}; }

RxResourceGrid superpose(std::span<const TxMap> tx, const ChannelRealization& chan, GridShape shape, double noise_var,
                         Rng& rng) {
  if (static_cast<int>(tx.size()) > chan.num_eds()) throw DomainError("superpose: more transmitters than channel links");
  if (shape.antennas != chan.num_antennas()) throw DomainError("superpose: antenna count mismatch");
  RxResourceGrid grid(shape);
  if (noise_var > 0.0) {
    for (int t = 0; t < shape.symbols; ++t)
      for (int f = 0; f < shape.subcarriers; ++f) {
        auto y = grid.at({t, f});
        for (int r = 0; r < shape.antennas; ++r) y[r] = complex_gaussian(rng, noise_var);
      }
  }
  for (std::size_t k = 0; k < tx.size(); ++k) {
    const int ed = static_cast<int>(k);
    for (const auto& entry : tx[k]) {
      if (entry.at.symbol >= shape.symbols || entry.at.subcarrier >= shape.subcarriers)
        throw DomainError("superpose: transmit symbol outside the grid");
      auto y = grid.at(entry.at);
      const auto rotated = entry.value * chan.sync_phase(ed, entry.at.subcarrier);
      for (int r = 0; r < shape.antennas; ++r) y[r] += chan.fading(ed, r, entry.at) * rotated;
    }
  }
  return grid;
}

double estimate_count_from_energy(double energy, int num_antennas, double symbol_energy, double noise_var) {
  return energy / (symbol_energy * num_antennas) - noise_var / symbol_energy;
}

double estimate_count(const Eigen::Ref<const Eigen::VectorXcd>& y, double symbol_energy, double noise_var) {
  return estimate_count_from_energy(y.squaredNorm(), static_cast<int>(y.size()), symbol_energy, noise_var);
}

std::vector<int> estimate_count_ml(std::span<const double> energies, int num_eds, int num_antennas,
                                   double symbol_energy, double noise_var) {
  const auto options = static_cast<int>(energies.size());
  double space = 1.0;
  for (int l = 0; l < options; ++l) space *= num_eds + 1.0;
  if (space > 1e6)
    throw UnsupportedSizeError("estimate_count_ml: search space (K+1)^(beta-1) = " + std::to_string(space) +
                               " exceeds 1e6");

  // Negative log-likelihood of one option, up to constants, for count n.
  auto cost = [&](int l, int n) {
    const double lambda = symbol_energy * n + noise_var;
    const double e = energies[static_cast<std::size_t>(l)];
    if (lambda == 0.0) return e == 0.0 ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();
    return 2.0 * num_antennas * std::log(lambda / 2.0) + 2.0 * e / lambda;
  };

  std::vector<int> current(static_cast<std::size_t>(options), 0);
  std::vector<int> best = current;
  double best_cost = std::numeric_limits<double>::infinity();
  bool have_best = false;
  while (true) {
    int total = 0;
    for (int n : current) total += n;
    if (total <= num_eds) {
      double c = 0.0;
      for (int l = 0; l < options; ++l) c += cost(l, current[static_cast<std::size_t>(l)]);
      if (!have_best || c < best_cost) {
        best_cost = c;
        best = current;
        have_best = true;
      }
    }
    int l = 0;
    while (l < options && ++current[static_cast<std::size_t>(l)] > num_eds) current[static_cast<std::size_t>(l++)] = 0;
    if (l == options) break;
  }
  return best;
}

std::vector<double> estimate_numeral_means(const RxResourceGrid& grid, const ResourceSet& rset,
                                           const CodecConfig& codec, const PhyConfig& phy) {
  const auto symbols = symbol_set(codec.beta());
  const double es = phy.energy(codec);
  std::vector<double> mu(static_cast<std::size_t>(codec.digits()));
  std::vector<double> counts(static_cast<std::size_t>(codec.beta() - 1));
  for (int i = 0; i < codec.digits(); ++i) {
    for (int l = 0; l < codec.beta() - 1; ++l) {
      double k_hat = estimate_count(grid.at(rset.at(i, l)), es, phy.noise_var);
      if (phy.clip_counts) k_hat = std::clamp(k_hat, 0.0, static_cast<double>(phy.num_eds));
      counts[static_cast<std::size_t>(l)] = k_hat;
    }
    mu[static_cast<std::size_t>(i)] = average_from_counts(std::span<const double>(counts), symbols, phy.num_eds);
  }
  return mu;
}

Eigen::VectorXd estimate_gradient(const RxResourceGrid& grid, std::span<const ResourceSet> rsets,
                                  const CodecConfig& codec, const PhyConfig& phy) {
  Eigen::VectorXd g(static_cast<Eigen::Index>(rsets.size()));
  for (std::size_t q = 0; q < rsets.size(); ++q) {
    const auto mu = estimate_numeral_means(grid, rsets[q], codec, phy);
    g[static_cast<Eigen::Index>(q)] = decode(std::span<const double>(mu), codec);
  }
  return g;
}

GridShape grid_for(std::int64_t num_gradients, int width, const PhyConfig& phy) {
  const int per_symbol = parallel_capacity(width, phy.num_subcarriers);
  if (per_symbol == 0) throw CapacityError("grid: one gradient needs more subcarriers than available");
  const std::int64_t symbols = (num_gradients + per_symbol - 1) / per_symbol;
  if (symbols > phy.num_symbols)
    throw CapacityError("grid: " + std::to_string(num_gradients) + " gradients need " + std::to_string(symbols) +
                        " OFDM symbols, only " + std::to_string(phy.num_symbols) + " available");
  return {static_cast<int>(std::max<std::int64_t>(symbols, 1)), phy.num_subcarriers, phy.num_antennas};
}

Eigen::VectorXd balanced_over_the_air(std::span<const Eigen::VectorXd> local, const CodecConfig& codec,
                                      const PhyConfig& phy, Rng& rng) {
  if (static_cast<int>(local.size()) != phy.num_eds) throw DomainError("uplink: one gradient vector per device");
  const Eigen::Index q_count = local.front().size();
  const int width = (codec.beta() - 1) * codec.digits();
  const GridShape shape = grid_for(q_count, width, phy);

  std::vector<ResourceSet> rsets;
  rsets.reserve(static_cast<std::size_t>(q_count));
  for (Eigen::Index q = 0; q < q_count; ++q) rsets.push_back(resource_map(q, codec, phy));

  const auto chan = sample_channel(phy, rng);
  const double es = phy.energy(codec);
  std::vector<TxMap> tx(local.size());
  for (std::size_t k = 0; k < local.size(); ++k) {
    if (local[k].size() != q_count) throw DomainError("uplink: gradient length mismatch");
    tx[k].reserve(static_cast<std::size_t>(q_count * codec.digits()));
    for (Eigen::Index q = 0; q < q_count; ++q)
      modulate_into(tx[k], encode(local[k][q], codec), rsets[static_cast<std::size_t>(q)], es, rng);
  }
  const auto grid = superpose(tx, chan, shape, phy.noise_var, rng);
  return estimate_gradient(grid, rsets, codec, phy);
}

}  // namespace oac
