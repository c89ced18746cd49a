#include "oac/baselines.hpp"

#include <algorithm>
#include <cmath>

namespace oac {

Scheme parse_scheme(std::string_view name) {
  if (name == "balanced") return Scheme::balanced;
  if (name == "goldenbaum") return Scheme::goldenbaum;
  if (name == "fskmv") return Scheme::fskmv;
  if (name == "ideal") return Scheme::ideal;
  throw ConfigError("scheme: expected one of balanced, goldenbaum, fskmv, ideal; got '" + std::string(name) + "'");
}

std::string_view to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::balanced: return "balanced";
    case Scheme::goldenbaum: return "goldenbaum";
    case Scheme::fskmv: return "fskmv";
    case Scheme::ideal: return "ideal";
  }
  return "unknown";
}

void GoldenbaumConfig::validate() const {
  if (seq_len < 1) throw ConfigError("goldenbaum.seq_len: must be >= 1");
  if (!(v_max > 0.0)) throw ConfigError("goldenbaum.v_max: must be > 0");
}

double GoldenbaumConfig::pre_processing(double v) const { return a() * std::clamp(v, -v_max, v_max) + b(); }

int resource_width(Scheme scheme, const CodecConfig& codec, const GoldenbaumConfig& goldenbaum) {
  switch (scheme) {
    case Scheme::balanced: return (codec.beta() - 1) * codec.digits();
    case Scheme::goldenbaum: return goldenbaum.seq_len;
    case Scheme::fskmv: return 2;
    case Scheme::ideal: return 0;
  }
  return 0;
}

std::vector<std::complex<double>> goldenbaum_tx(double v, const GoldenbaumConfig& cfg, Rng& rng) {
  static constexpr std::array<std::complex<double>, 4> kPhases{{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}};
  const double amplitude = std::sqrt(cfg.pre_processing(v));
  std::uniform_int_distribution<int> pick(0, 3);
  std::vector<std::complex<double>> seq(static_cast<std::size_t>(cfg.seq_len));
  for (auto& s : seq) s = amplitude * kPhases[static_cast<std::size_t>(pick(rng))];
  return seq;
}

double goldenbaum_rx_from_energy(double mean_energy, int num_eds, double noise_var, const GoldenbaumConfig& cfg) {
  const double sum = (mean_energy - noise_var - num_eds * cfg.b()) / cfg.a();
  return std::clamp(sum / num_eds, -cfg.v_max, cfg.v_max);
}

double goldenbaum_rx(const RxResourceGrid& grid, const ResourceSet& rset, int num_eds, double noise_var,
                     const GoldenbaumConfig& cfg) {
  double energy = 0.0;
  for (const auto& re : rset.elements) energy += grid.at(re).squaredNorm();
  energy /= static_cast<double>(rset.elements.size()) * grid.shape().antennas;
  return goldenbaum_rx_from_energy(energy, num_eds, noise_var, cfg);
}

Eigen::VectorXd goldenbaum_over_the_air(std::span<const Eigen::VectorXd> local, const GoldenbaumConfig& cfg,
                                        const PhyConfig& phy, Rng& rng) {
  if (static_cast<int>(local.size()) != phy.num_eds) throw DomainError("uplink: one gradient vector per device");
  const Eigen::Index q_count = local.front().size();
  const GridShape shape = grid_for(q_count, cfg.seq_len, phy);
  std::vector<ResourceSet> rsets;
  rsets.reserve(static_cast<std::size_t>(q_count));
  for (Eigen::Index q = 0; q < q_count; ++q)
    rsets.push_back(resource_block(q, cfg.seq_len, phy.num_subcarriers, phy.num_symbols));

  const auto chan = sample_channel(phy, rng);
  std::vector<TxMap> tx(local.size());
  for (std::size_t k = 0; k < local.size(); ++k) {
    tx[k].reserve(static_cast<std::size_t>(q_count * cfg.seq_len));
    for (Eigen::Index q = 0; q < q_count; ++q) {
      const auto seq = goldenbaum_tx(local[k][q], cfg, rng);
      const auto& rset = rsets[static_cast<std::size_t>(q)];
      for (std::size_t l = 0; l < seq.size(); ++l)
        if (seq[l] != 0.0) tx[k].push_back({rset.elements[l], seq[l]});
    }
  }
  const auto grid = superpose(tx, chan, shape, phy.noise_var, rng);
  Eigen::VectorXd out(q_count);
  for (Eigen::Index q = 0; q < q_count; ++q)
    out[q] = goldenbaum_rx(grid, rsets[static_cast<std::size_t>(q)], phy.num_eds, phy.noise_var, cfg);
  return out;
}

std::array<std::complex<double>, 2> fskmv_tx(int sign) {
  const double amplitude = std::sqrt(kFskEnergy);
  if (sign == 1) return {amplitude, 0.0};
  if (sign == -1) return {0.0, amplitude};
  throw DomainError("fskmv_tx: sign must be -1 or +1");
}

int fskmv_rx(const Eigen::Ref<const Eigen::VectorXcd>& y_plus, const Eigen::Ref<const Eigen::VectorXcd>& y_minus) {
  return y_plus.squaredNorm() >= y_minus.squaredNorm() ? 1 : -1;
}

Eigen::VectorXd fskmv_over_the_air(std::span<const Eigen::VectorXd> local, const PhyConfig& phy, Rng& rng) {
  if (static_cast<int>(local.size()) != phy.num_eds) throw DomainError("uplink: one gradient vector per device");
  const Eigen::Index q_count = local.front().size();
  const GridShape shape = grid_for(q_count, 2, phy);
  std::vector<ResourceSet> rsets;
  rsets.reserve(static_cast<std::size_t>(q_count));
  for (Eigen::Index q = 0; q < q_count; ++q) rsets.push_back(resource_block(q, 2, phy.num_subcarriers, phy.num_symbols));

  const auto chan = sample_channel(phy, rng);
  std::vector<TxMap> tx(local.size());
  for (std::size_t k = 0; k < local.size(); ++k) {
    tx[k].reserve(static_cast<std::size_t>(q_count));
    for (Eigen::Index q = 0; q < q_count; ++q) {
      const auto pair = fskmv_tx(sign_vote(local[k][q]));
      const auto& rset = rsets[static_cast<std::size_t>(q)];
      for (std::size_t l = 0; l < 2; ++l)
        if (pair[l] != 0.0) tx[k].push_back({rset.elements[l], pair[l] * unit_phasor(rng)});
    }
  }
  const auto grid = superpose(tx, chan, shape, phy.noise_var, rng);
  Eigen::VectorXd votes(q_count);
  for (Eigen::Index q = 0; q < q_count; ++q) {
    const auto& rset = rsets[static_cast<std::size_t>(q)];
    votes[q] = fskmv_rx(grid.at(rset.elements[0]), grid.at(rset.elements[1]));
  }
  return votes;
}

}  // namespace oac
