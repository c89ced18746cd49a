#pragma once

#include <span>

#include <Eigen/Dense>

#include "oac/dataset.hpp"
#include "oac/random.hpp"

namespace oac {

// Two-layer perceptron, tanh hidden layer, softmax cross-entropy loss. All
// parameters live in one flat vector laid out as [W1 | b1 | W2 | b2] with
// W1 (hidden x inputs) and W2 (classes x hidden) column-major.
class Mlp {
 public:
  Mlp(int inputs, int hidden, int classes);

  Eigen::Index num_params() const;
  int inputs() const { return inputs_; }
  int hidden() const { return hidden_; }
  int classes() const { return classes_; }

  // Glorot-uniform weights, zero biases.
  Eigen::VectorXd initial_params(Rng& rng) const;

  // Mean cross-entropy over the rows of x.
  double loss(const Eigen::VectorXd& w, const Eigen::MatrixXd& x, std::span<const int> labels) const;

  // Mean per-sample gradient of the loss; returns the loss through `loss`.
  Eigen::VectorXd gradient(const Eigen::VectorXd& w, const Eigen::MatrixXd& x, std::span<const int> labels,
                           double* loss = nullptr) const;

  double accuracy(const Eigen::VectorXd& w, const Eigen::MatrixXd& x, std::span<const int> labels) const;

  Eigen::MatrixXd logits(const Eigen::VectorXd& w, const Eigen::MatrixXd& x) const;

 private:
  int inputs_;
  int hidden_;
  int classes_;
};

}  // namespace oac
