#include "oac/mlp.hpp"

#include <cmath>

#include "oac/errors.hpp"

namespace oac {

namespace {

struct Views {
  Eigen::Map<const Eigen::MatrixXd> w1;
  Eigen::Map<const Eigen::VectorXd> b1;
  Eigen::Map<const Eigen::MatrixXd> w2;
  Eigen::Map<const Eigen::VectorXd> b2;
};

Views views(const Eigen::VectorXd& w, int in, int hid, int out) {
  const double* p = w.data();
  const Eigen::Index n1 = static_cast<Eigen::Index>(hid) * in;
  const Eigen::Index n2 = static_cast<Eigen::Index>(out) * hid;
  return {{p, hid, in}, {p + n1, hid}, {p + n1 + hid, out, hid}, {p + n1 + hid + n2, out}};
}

// Row-wise log-softmax.
Eigen::MatrixXd log_softmax(const Eigen::MatrixXd& z) {
  Eigen::MatrixXd out = z;
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const double m = z.row(i).maxCoeff();
    const double lse = m + std::log((z.row(i).array() - m).exp().sum());
    out.row(i).array() -= lse;
  }
  return out;
}

}  // namespace

Mlp::Mlp(int inputs, int hidden, int classes) : inputs_(inputs), hidden_(hidden), classes_(classes) {
  if (inputs < 1 || hidden < 1 || classes < 2) throw ConfigError("train.model: invalid layer sizes");
}

Eigen::Index Mlp::num_params() const {
  return static_cast<Eigen::Index>(hidden_) * inputs_ + hidden_ + static_cast<Eigen::Index>(classes_) * hidden_ + classes_;
}

Eigen::VectorXd Mlp::initial_params(Rng& rng) const {
  Eigen::VectorXd w = Eigen::VectorXd::Zero(num_params());
  const double limit1 = std::sqrt(6.0 / (inputs_ + hidden_));
  const double limit2 = std::sqrt(6.0 / (hidden_ + classes_));
  std::uniform_real_distribution<double> u1(-limit1, limit1);
  std::uniform_real_distribution<double> u2(-limit2, limit2);
  const Eigen::Index n1 = static_cast<Eigen::Index>(hidden_) * inputs_;
  const Eigen::Index n2 = static_cast<Eigen::Index>(classes_) * hidden_;
  for (Eigen::Index i = 0; i < n1; ++i) w[i] = u1(rng);
  for (Eigen::Index i = 0; i < n2; ++i) w[n1 + hidden_ + i] = u2(rng);
  return w;
}

Eigen::MatrixXd Mlp::logits(const Eigen::VectorXd& w, const Eigen::MatrixXd& x) const {
  const auto v = views(w, inputs_, hidden_, classes_);
  Eigen::MatrixXd h = ((x * v.w1.transpose()).rowwise() + v.b1.transpose()).array().tanh();
  return (h * v.w2.transpose()).rowwise() + v.b2.transpose();
}

double Mlp::loss(const Eigen::VectorXd& w, const Eigen::MatrixXd& x, std::span<const int> labels) const {
  const Eigen::MatrixXd lp = log_softmax(logits(w, x));
  long double total = 0.0L;
  for (Eigen::Index i = 0; i < lp.rows(); ++i) total -= lp(i, labels[static_cast<std::size_t>(i)]);
  return static_cast<double>(total / lp.rows());
}

Eigen::VectorXd Mlp::gradient(const Eigen::VectorXd& w, const Eigen::MatrixXd& x, std::span<const int> labels,
                              double* loss) const {
  if (x.rows() == 0) throw DomainError("gradient: empty batch");
  const auto v = views(w, inputs_, hidden_, classes_);
  const double n = static_cast<double>(x.rows());

  const Eigen::MatrixXd h = ((x * v.w1.transpose()).rowwise() + v.b1.transpose()).array().tanh();
  const Eigen::MatrixXd z = (h * v.w2.transpose()).rowwise() + v.b2.transpose();
  const Eigen::MatrixXd lp = log_softmax(z);

  Eigen::MatrixXd dz = lp.array().exp();  // softmax
  long double total = 0.0L;
  for (Eigen::Index i = 0; i < dz.rows(); ++i) {
    const int y = labels[static_cast<std::size_t>(i)];
    total -= lp(i, y);
    dz(i, y) -= 1.0;
  }
  dz /= n;
  if (loss) *loss = static_cast<double>(total / x.rows());

  const Eigen::MatrixXd dh = (dz * v.w2).array() * (1.0 - h.array().square());

  Eigen::VectorXd g(num_params());
  const Eigen::Index n1 = static_cast<Eigen::Index>(hidden_) * inputs_;
  const Eigen::Index n2 = static_cast<Eigen::Index>(classes_) * hidden_;
  Eigen::Map<Eigen::MatrixXd>(g.data(), hidden_, inputs_) = dh.transpose() * x;
  g.segment(n1, hidden_) = dh.colwise().sum().transpose();
  Eigen::Map<Eigen::MatrixXd>(g.data() + n1 + hidden_, classes_, hidden_) = dz.transpose() * h;
  g.segment(n1 + hidden_ + n2, classes_) = dz.colwise().sum().transpose();
  return g;
}

double Mlp::accuracy(const Eigen::VectorXd& w, const Eigen::MatrixXd& x, std::span<const int> labels) const {
  const Eigen::MatrixXd z = logits(w, x);
  Eigen::Index hits = 0;
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    Eigen::Index best = 0;
    z.row(i).maxCoeff(&best);
    hits += best == labels[static_cast<std::size_t>(i)];
  }
  return static_cast<double>(hits) / static_cast<double>(z.rows());
}

}  // namespace oac
