#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "qfan/linalg.hpp"
#include "qfan/quantiles.hpp"

namespace qfan {

/// Training hyperparameters. Defaults reproduce the published setup:
/// 10000 full-batch iterations, 20 hidden nodes, step 0.3, smoothing 0.01,
/// 0.1 for both weight penalties.
struct HyperParams {
  int iterations = 10000;
  int hidden_nodes = 20;
  double learning_rate = 0.3;
  double alpha = 0.01;
  double lambda1 = 0.1;
  double lambda2 = 0.1;
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument naming the first out-of-range field.
  void validate() const;

  friend bool operator==(const HyperParams&, const HyperParams&) = default;
};

/// One-hidden-layer quantile network: q = W2 tanh(W1 x + b1) + b2.
struct SpnnModel {
  Matrix w1;               // n_h x n_x
  std::vector<double> b1;  // n_h
  Matrix w2;               // M x n_h
  std::vector<double> b2;  // M
  QuantileLevels levels;
  HyperParams hyper;

  std::size_t input_width() const { return w1.cols(); }
  std::size_t hidden_width() const { return w1.rows(); }
  std::size_t output_width() const { return w2.rows(); }

  /// Throws if the parameter shapes are inconsistent with each other or with
  /// the number of levels.
  void check_shapes() const;

  friend bool operator==(const SpnnModel&, const SpnnModel&) = default;
};

std::vector<double> forward(const SpnnModel& model, std::span<const double> x);

/// Batch forward pass: row t of the fan is forward(model, features.row(t)).
QuantileFan predict_fan(const SpnnModel& model, const Matrix& features);

/// Input weights uniform on [-1, 1] from hyper.seed, zero biases, and output
/// weights fitted by least squares to a fan that repeats the levels on every
/// training row. Every output is then tau_m times a common scalar.
SpnnModel init_noncrossing(std::size_t n_x, const Matrix& training_features,
                           const HyperParams& hyper, const QuantileLevels& levels);

/// Ablation initializer: both weight matrices uniform on [-1, 1], zero biases.
/// Input weights are drawn first, so they coincide with init_noncrossing for
/// the same seed.
SpnnModel init_random(std::size_t n_x, const HyperParams& hyper, const QuantileLevels& levels);

struct Gradients {
  Matrix w1;
  std::vector<double> b1;
  Matrix w2;
  std::vector<double> b2;
};

/// Objective value and its exact gradient by backpropagation.
double objective_and_gradient(const SpnnModel& model, const Matrix& features,
                              std::span<const double> targets, Gradients& grad);

/// Objective evaluated through predict_fan and the loss module, independent
/// of the backpropagation path.
double model_objective(const SpnnModel& model, const Matrix& features,
                       std::span<const double> targets);

struct TrainResult {
  SpnnModel model;
  /// Objective before each update step.
  std::vector<double> loss_trace;
};

/// Full-batch gradient descent for hyper.iterations steps. Throws
/// NumericError naming the iteration if the loss or a gradient goes
/// non-finite.
TrainResult train(SpnnModel model, const Matrix& features, std::span<const double> targets);

}  // namespace qfan
