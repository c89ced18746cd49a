#include <cmath>
#include <set>

#include "doctest.h"

#include "oac/feel.hpp"

using namespace oac;

namespace {

FeelConfig small_config() {
  FeelConfig f;
  f.rounds = 5;
  f.phy.num_eds = 5;
  f.data.per_class = 30;
  f.data.test_per_class = 10;
  f.data.dim = 8;
  f.data.classes = 4;
  f.hidden = 6;
  f.batch_size = 8;
  return f;
}

}  // namespace

TEST_SUITE("feel") {

TEST_CASE("mlp gradient matches finite differences") {
  const Mlp m(5, 4, 3);
  Rng rng(1);
  Eigen::VectorXd w = m.initial_params(rng);
  std::normal_distribution<double> n(0.0, 0.3);
  for (Eigen::Index i = 0; i < w.size(); ++i) w[i] += n(rng);
  Eigen::MatrixXd x(7, 5);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = n(rng) * 3;
  const std::vector<int> y{0, 1, 2, 2, 1, 0, 1};
  double loss = 0.0;
  const auto g = m.gradient(w, x, y, &loss);
  CHECK(loss == doctest::Approx(m.loss(w, x, y)).epsilon(1e-14));
  const double eps = 1e-4;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    Eigen::VectorXd wp = w;
    Eigen::VectorXd wm = w;
    wp[i] += eps;
    wm[i] -= eps;
    const double fd = (m.loss(wp, x, y) - m.loss(wm, x, y)) / (2 * eps);
    REQUIRE(std::abs(fd - g[i]) <= 1e-5 * std::max(1.0, std::abs(g[i])));
  }
}

TEST_CASE("zero weights give the uniform-softmax gradient") {
  const Mlp m(3, 2, 4);
  const Eigen::VectorXd w = Eigen::VectorXd::Zero(m.num_params());
  Eigen::MatrixXd x(4, 3);
  x << 1, -1, 0.5, -1, 1, -0.5, 2, 0, 1, -2, 0, -1;
  const std::vector<int> y{0, 0, 1, 3};
  double loss = 0.0;
  const auto g = m.gradient(w, x, y, &loss);
  CHECK(loss == doctest::Approx(std::log(4.0)).epsilon(1e-14));
  // Only the output bias moves: 1/C - class frequency.
  const Eigen::Index b2 = m.num_params() - 4;
  CHECK(g.head(b2).cwiseAbs().maxCoeff() == 0.0);
  CHECK(g[b2 + 0] == doctest::Approx(0.25 - 0.5));
  CHECK(g[b2 + 1] == doctest::Approx(0.25 - 0.25));
  CHECK(g[b2 + 2] == doctest::Approx(0.25));
  CHECK(g[b2 + 3] == doctest::Approx(0.25 - 0.25));
  CHECK(m.num_params() == 3 * 2 + 2 + 2 * 4 + 4);
  CHECK(Mlp(64, 32, 10).num_params() == 2410);
}

TEST_CASE("duplicated batch gives the single-sample gradient") {
  const Mlp m(4, 3, 3);
  Rng rng(2);
  const Eigen::VectorXd w = m.initial_params(rng);
  Eigen::MatrixXd one(1, 4);
  one << 0.3, -1.2, 0.7, 2.0;
  Eigen::MatrixXd many = one.replicate(5, 1);
  const std::vector<int> y1{2};
  const std::vector<int> y5(5, 2);
  CHECK((m.gradient(w, one, y1, nullptr) - m.gradient(w, many, y5, nullptr)).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("area labels") {
  CHECK(area_labels(1, 10) == std::vector<int>{0, 1, 2, 3, 4, 5});
  CHECK(area_labels(5, 10) == std::vector<int>{4, 5, 6, 7, 8, 9});
}

TEST_CASE("homogeneous partition is disjoint and balanced") {
  BlobSpec spec;
  spec.per_class = 2500;
  spec.test_per_class = 1;
  spec.dim = 2;
  const auto [train_set, test_set] = make_blobs(spec, 3);
  Rng rng(4);
  const auto parts = partition(train_set, PartitionMode::homogeneous, 25, 5, rng);
  std::set<int> seen;
  for (const auto& p : parts) {
    CHECK(p.size() == 1000);
    std::vector<int> per_class(10, 0);
    for (int r : p) {
      ++per_class[static_cast<std::size_t>(train_set.labels[static_cast<std::size_t>(r)])];
      CHECK(seen.insert(r).second);
    }
    for (int c : per_class) CHECK(c == 100);
  }
  CHECK(seen.size() == 25000);
}

TEST_CASE("heterogeneous partition follows the area windows") {
  BlobSpec spec;
  spec.per_class = 300;
  spec.test_per_class = 1;
  spec.dim = 2;
  const auto [train_set, test_set] = make_blobs(spec, 5);
  Rng rng(6);
  const auto parts = partition(train_set, PartitionMode::heterogeneous, 25, 5, rng);
  std::set<int> seen;
  for (int k = 0; k < 25; ++k) {
    const auto allowed = area_labels(k / 5 + 1, 10);
    std::set<int> labels;
    for (int r : parts[static_cast<std::size_t>(k)]) {
      labels.insert(train_set.labels[static_cast<std::size_t>(r)]);
      CHECK(seen.insert(r).second);
    }
    CHECK(labels == std::set<int>(allowed.begin(), allowed.end()));
  }
  CHECK(seen.size() == 3000);

  spec.per_class = 7;
  const auto [odd, unused] = make_blobs(spec, 5);
  CHECK_THROWS_AS(partition(odd, PartitionMode::homogeneous, 25, 5, rng), PartitionError);
  CHECK_THROWS_AS(partition(train_set, PartitionMode::heterogeneous, 24, 5, rng), PartitionError);
}

TEST_CASE("momentum update") {
  ModelState s{Eigen::VectorXd::Constant(3, 1.0), Eigen::VectorXd::Zero(3)};
  const Eigen::VectorXd g = Eigen::VectorXd::LinSpaced(3, -1.0, 1.0);
  update(s, g, 0.1, 0.0);
  CHECK((s.w - (Eigen::VectorXd::Constant(3, 1.0) - 0.1 * g)).cwiseAbs().maxCoeff() == 0.0);

  ModelState z{Eigen::VectorXd::Constant(3, 2.0), Eigen::VectorXd::Zero(3)};
  for (int i = 0; i < 4; ++i) update(z, Eigen::VectorXd::Zero(3), 0.1, 0.9);
  CHECK(z.w == Eigen::VectorXd::Constant(3, 2.0));

  ModelState m{Eigen::VectorXd::Constant(3, 1.0), Eigen::VectorXd::Zero(3)};
  update(m, g, 0.01, 0.9);
  update(m, g, 0.01, 0.9);
  CHECK((m.w - (Eigen::VectorXd::Constant(3, 1.0) - 0.01 * 2.9 * g)).cwiseAbs().maxCoeff() < 1e-15);
  CHECK_THROWS_AS(update(m, Eigen::VectorXd::Zero(2), 0.1, 0.0), DomainError);
}

TEST_CASE("adaptive absolute maximum") {
  CHECK(aam_step({2.0, 2.0, 2.0}, 0.3) == doctest::Approx(0.6));
  CHECK(aam_step({0.5, 2.0, 1.0}, default_aam_alpha(100)) == doctest::Approx(1.0));
  CHECK(aam_step({0.0, 0.0}, 0.5) == kVmaxFloor);
  const std::vector<Eigen::VectorXd> local{Eigen::Vector2d(3, 4), Eigen::Vector2d(0, 1)};
  CHECK(gradient_metrics(local) == MetricVector{5.0, 1.0});
}

TEST_CASE("ideal aggregation is the exact mean") {
  Rng rng(1);
  std::vector<Eigen::VectorXd> local{Eigen::Vector3d(1, 2, 3), Eigen::Vector3d(-1, 0, 0.5)};
  const auto g = aggregate_round(local, Scheme::ideal, CodecConfig(5, 2, 1.0), PhyConfig{}, GoldenbaumConfig{}, rng);
  CHECK((g - Eigen::Vector3d(0, 1, 1.75)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("ideal federated gradient equals the centralized gradient") {
  BlobSpec spec;
  spec.per_class = 50;
  spec.dim = 6;
  spec.classes = 5;
  const auto [train_set, test_set] = make_blobs(spec, 8);
  Rng rng(9);
  const auto parts = partition(train_set, PartitionMode::homogeneous, 10, 5, rng);
  const Mlp m(6, 5, 5);
  const Eigen::VectorXd w = m.initial_params(rng);
  std::vector<Eigen::VectorXd> local;
  for (const auto& p : parts) local.push_back(local_gradient(m, w, train_set, p));
  const auto fed = aggregate_round(local, Scheme::ideal, CodecConfig(5, 2, 1.0), PhyConfig{}, GoldenbaumConfig{}, rng);
  const auto central = m.gradient(w, train_set.features, train_set.labels, nullptr);
  CHECK((fed - central).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("training is deterministic and records AAM feedback") {
  FeelConfig f = small_config();
  f.aam_enabled = true;
  const auto a = train(f, 11);
  const auto b = train(f, 11);
  REQUIRE(a.trace.size() == 5);
  CHECK(a.final_params == b.final_params);
  CHECK(a.num_params == 8 * 6 + 6 + 6 * 4 + 4);
  for (int s : a.feedback_scalars) CHECK(s == 5);
  CHECK(a.trace[0].v_max_used == 1.0);
  CHECK(a.trace[1].v_max_used != 1.0);
  const auto c = train(f, 12);
  CHECK(c.final_params != a.final_params);
}

TEST_CASE("every scheme trains on the small task") {
  for (auto s : {Scheme::balanced, Scheme::goldenbaum, Scheme::fskmv, Scheme::ideal}) {
    FeelConfig f = small_config();
    f.scheme = s;
    f.learning_rate = 0.02;
    const auto r = train(f, 3);
    CHECK(std::isfinite(r.final_loss));
    for (const auto& t : r.trace) CHECK(t.v_max_used == 1.0);
  }
}

TEST_CASE("configuration checks") {
  FeelConfig f = small_config();
  f.partition = PartitionMode::heterogeneous;
  f.areas = 3;
  CHECK_THROWS_AS(f.validate(), ConfigError);
  FeelConfig g = small_config();
  g.momentum = 1.0;
  CHECK_THROWS_AS(g.validate(), ConfigError);
}

TEST_CASE("divergence is reported") {
  FeelConfig f = small_config();
  f.scheme = Scheme::ideal;
  f.learning_rate = 1e308;
  CHECK_THROWS_AS(train(f, 1), DivergenceError);
}

}
