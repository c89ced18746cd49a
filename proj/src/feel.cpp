#include "oac/feel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "oac/parallel.hpp"

namespace oac {

namespace {

enum StreamTag : std::uint64_t { kData = 1, kPartition, kInit, kBatch, kChannel };

}  // namespace

void FeelConfig::validate() const {
  if (rounds < 1) throw ConfigError("train.rounds: must be >= 1");
  if (!(learning_rate > 0.0)) throw ConfigError("train.learning_rate: must be > 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("train.momentum: must be in [0, 1)");
  if (batch_size < 0) throw ConfigError("train.batch_size: must be >= 0");
  if (partition == PartitionMode::heterogeneous && (areas < 1 || num_eds() % areas != 0))
    throw ConfigError("train.areas: num_eds must be divisible by the area count");
  if (aam_alpha && !(*aam_alpha > 0.0)) throw ConfigError("train.aam_alpha: must be > 0");
  if (aam_v0 && !(*aam_v0 > 0.0)) throw ConfigError("train.aam_v0: must be > 0");
  if (hidden < 1) throw ConfigError("train.hidden: must be >= 1");
  if (data.per_class < 1 || data.test_per_class < 1 || data.dim < 1 || data.classes < 2)
    throw ConfigError("train.data: invalid blob specification");
  phy.validate();
  goldenbaum.validate();
}

double default_aam_alpha(Eigen::Index num_params) { return 5.0 / std::sqrt(static_cast<double>(num_params)); }

MetricVector gradient_metrics(std::span<const Eigen::VectorXd> local) {
  MetricVector m(local.size());
  std::transform(local.begin(), local.end(), m.begin(), [](const Eigen::VectorXd& g) { return g.norm(); });
  return m;
}

double aam_step(const MetricVector& metrics, double alpha) {
  double peak = 0.0;
  for (double m : metrics) peak = std::max(peak, m);
  return std::max(alpha * peak, kVmaxFloor);
}

void update(ModelState& model, const Eigen::VectorXd& g_hat, double learning_rate, double momentum) {
  if (model.velocity.size() != model.w.size()) model.velocity = Eigen::VectorXd::Zero(model.w.size());
  if (g_hat.size() != model.w.size()) throw DomainError("update: gradient length mismatch");
  model.velocity = momentum * model.velocity + g_hat;
  model.w -= learning_rate * model.velocity;
}

Eigen::VectorXd local_gradient(const Mlp& model, const Eigen::VectorXd& w, const Dataset& data,
                               std::span<const int> rows) {
  if (rows.empty()) throw DomainError("local_gradient: empty batch");
  const Dataset batch = data.subset(rows);
  return model.gradient(w, batch.features, batch.labels);
}

Eigen::VectorXd aggregate_round(std::span<const Eigen::VectorXd> local, Scheme scheme, const CodecConfig& codec,
                                const PhyConfig& phy, const GoldenbaumConfig& goldenbaum, Rng& rng) {
  if (local.empty()) throw DomainError("aggregate_round: no devices");
  switch (scheme) {
    case Scheme::balanced: return balanced_over_the_air(local, codec, phy, rng);
    case Scheme::goldenbaum: {
      GoldenbaumConfig g = goldenbaum;
      g.v_max = codec.v_max();
      return goldenbaum_over_the_air(local, g, phy, rng);
    }
    case Scheme::fskmv: return fskmv_over_the_air(local, phy, rng);
    case Scheme::ideal: break;
  }
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(local.front().size());
  for (const auto& g : local) mean += g;
  return mean / static_cast<double>(local.size());
}

TrainResult train(const FeelConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const int num_eds = cfg.num_eds();
  const auto [train_set, test_set] = make_blobs(cfg.data, derive_seed(seed, kData));
  auto part_rng = make_rng(derive_seed(seed, kPartition));
  const auto shards = partition(train_set, cfg.partition, num_eds, cfg.areas, part_rng);

  const Mlp model(cfg.data.dim, cfg.hidden, cfg.data.classes);
  const Eigen::Index q = model.num_params();
  auto init_rng = make_rng(derive_seed(seed, kInit));
  ModelState state{model.initial_params(init_rng), Eigen::VectorXd::Zero(q)};

  const double alpha = cfg.aam_alpha.value_or(default_aam_alpha(q));
  double v_max = cfg.aam_enabled ? cfg.aam_v0.value_or(cfg.codec.v_max()) : cfg.codec.v_max();

  TrainResult result;
  result.num_params = q;
  result.trace.reserve(static_cast<std::size_t>(cfg.rounds));
  std::vector<Eigen::VectorXd> local(static_cast<std::size_t>(num_eds));

  for (int t = 0; t < cfg.rounds; ++t) {
    parallel_for(static_cast<std::size_t>(num_eds), [&](std::size_t k) {
      const auto& shard = shards[k];
      std::vector<int> rows = shard;
      if (cfg.batch_size > 0 && cfg.batch_size < static_cast<int>(rows.size())) {
        auto rng = make_rng(derive_seed(seed, kBatch, t, k));
        for (int i = 0; i < cfg.batch_size; ++i) {
          std::uniform_int_distribution<std::size_t> pick(static_cast<std::size_t>(i), rows.size() - 1);
          std::swap(rows[static_cast<std::size_t>(i)], rows[pick(rng)]);
        }
        rows.resize(static_cast<std::size_t>(cfg.batch_size));
      }
      local[k] = local_gradient(model, state.w, train_set, rows);
    });

    Eigen::VectorXd mean = Eigen::VectorXd::Zero(q);
    for (const auto& g : local) mean += g;
    mean /= static_cast<double>(num_eds);

    auto chan_rng = make_rng(derive_seed(seed, kChannel, t));
    const Eigen::VectorXd g_hat =
        aggregate_round(local, cfg.scheme, cfg.codec.with_v_max(v_max), cfg.phy, cfg.goldenbaum, chan_rng);

    RoundTrace rec;
    rec.round = t;
    rec.v_max_used = v_max;
    rec.gradient_norm = mean.norm();
    rec.bmse_proxy = (g_hat - mean).squaredNorm() / static_cast<double>(q);

    update(state, g_hat, cfg.learning_rate, cfg.momentum);

    rec.loss = model.loss(state.w, train_set.features, train_set.labels);
    if (!std::isfinite(rec.loss))
      throw DivergenceError("train: loss became non-finite at round " + std::to_string(t) + " (v_max " +
                            std::to_string(v_max) + ", |g_hat| " + std::to_string(g_hat.norm()) + ")");
    rec.test_accuracy = model.accuracy(state.w, test_set.features, test_set.labels);
    result.trace.push_back(rec);

    if (cfg.aam_enabled) {
      // Each device reports m_k = ||g_k|| on the feedback channel.
      const MetricVector metrics = gradient_metrics(local);
      result.feedback_scalars.push_back(static_cast<int>(metrics.size()));
      v_max = aam_step(metrics, alpha);
    } else {
      result.feedback_scalars.push_back(0);
    }
  }

  result.final_accuracy = result.trace.back().test_accuracy;
  result.final_loss = result.trace.back().loss;
  result.final_params = state.w;
  return result;
}

}  // namespace oac
