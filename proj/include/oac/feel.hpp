#pragma once

// Federated edge learning over the simulated uplink: local stochastic
// gradients, one over-the-air aggregation per round, momentum SGD at every
// device, and the adaptive absolute maximum (AAM) feedback loop.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "oac/baselines.hpp"
#include "oac/dataset.hpp"
#include "oac/mlp.hpp"
#include "oac/numerals.hpp"
#include "oac/phy.hpp"

namespace oac {

struct FeelConfig {
  int rounds = 150;
  double learning_rate = 0.05;
  double momentum = 0.9;
  int batch_size = 64;  // 0 uses the whole local data set
  PartitionMode partition = PartitionMode::homogeneous;
  int areas = 5;
  Scheme scheme = Scheme::balanced;
  CodecConfig codec{5, 2, 1.0};  // codec.v_max is the fixed range without AAM
  PhyConfig phy;
  GoldenbaumConfig goldenbaum;
  bool aam_enabled = false;
  std::optional<double> aam_alpha;  // unset means 5 / sqrt(Q)
  std::optional<double> aam_v0;     // unset means codec.v_max
  BlobSpec data;
  int hidden = 32;

  int num_eds() const { return phy.num_eds; }
  void validate() const;
};

struct ModelState {
  Eigen::VectorXd w;
  Eigen::VectorXd velocity;
};

struct RoundTrace {
  int round = 0;
  double v_max_used = 0.0;
  double loss = 0.0;           // training loss after the update
  double test_accuracy = 0.0;  // after the update
  double gradient_norm = 0.0;  // ||g_bar||
  double bmse_proxy = 0.0;     // ||g_hat - g_bar||^2 / Q
};

// m_k = ||g_k||_2, one scalar per device.
using MetricVector = std::vector<double>;

inline constexpr double kVmaxFloor = 1e-12;

double default_aam_alpha(Eigen::Index num_params);

MetricVector gradient_metrics(std::span<const Eigen::VectorXd> local);

// alpha * ||m||_inf, floored at kVmaxFloor.
double aam_step(const MetricVector& metrics, double alpha);

// velocity <- momentum * velocity + g_hat; w <- w - lr * velocity.
void update(ModelState& model, const Eigen::VectorXd& g_hat, double learning_rate, double momentum);

// Mean gradient of the samples `rows` of `data`.
Eigen::VectorXd local_gradient(const Mlp& model, const Eigen::VectorXd& w, const Dataset& data,
                               std::span<const int> rows);

// One aggregation with a fresh channel. `codec` carries this round's v_max;
// Goldenbaum uses the same range. FSK-MV returns the vote vector.
Eigen::VectorXd aggregate_round(std::span<const Eigen::VectorXd> local, Scheme scheme, const CodecConfig& codec,
                                const PhyConfig& phy, const GoldenbaumConfig& goldenbaum, Rng& rng);

struct TrainResult {
  std::vector<RoundTrace> trace;
  Eigen::Index num_params = 0;
  double final_accuracy = 0.0;
  double final_loss = 0.0;
  // Scalars the devices sent on the feedback channel, per round.
  std::vector<int> feedback_scalars;
  Eigen::VectorXd final_params;
};

// Throws DivergenceError when the training loss turns non-finite.
TrainResult train(const FeelConfig& cfg, std::uint64_t seed);

}  // namespace oac
