#include "qfan/network.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "qfan/error.hpp"
#include "qfan/loss.hpp"
#include "qfan/rng.hpp"

namespace qfan {

namespace {

void fill_uniform(Matrix& m, Rng& rng) {
  for (double& v : m.data()) v = rng.uniform(-1.0, 1.0);
}

std::string describe(std::size_t n) { return std::to_string(n); }

bool finite(std::span<const double> v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

// Hidden activations tanh(X W1^T + b1), N x n_h.
Matrix hidden_layer(const SpnnModel& model, const Matrix& features) {
  Matrix z = matmul_nt(features, model.w1);
  for (std::size_t t = 0; t < z.rows(); ++t) {
    auto row = z.row(t);
    for (std::size_t h = 0; h < row.size(); ++h) row[h] = std::tanh(row[h] + model.b1[h]);
  }
  return z;
}

Matrix output_layer(const SpnnModel& model, const Matrix& hidden) {
  Matrix q = matmul_nt(hidden, model.w2);
  for (std::size_t t = 0; t < q.rows(); ++t) {
    auto row = q.row(t);
    for (std::size_t m = 0; m < row.size(); ++m) row[m] += model.b2[m];
  }
  return q;
}

std::vector<double> column_sums(const Matrix& a) {
  std::vector<double> out(a.cols(), 0.0);
  for (std::size_t t = 0; t < a.rows(); ++t) {
    auto row = a.row(t);
    for (std::size_t j = 0; j < row.size(); ++j) out[j] += row[j];
  }
  return out;
}

void check_inputs(const SpnnModel& model, const Matrix& features, std::span<const double> targets) {
  model.check_shapes();
  if (features.cols() != model.input_width()) {
    throw std::invalid_argument("feature width " + describe(features.cols()) +
                                " does not match model input width " +
                                describe(model.input_width()));
  }
  if (features.rows() != targets.size()) {
    throw std::invalid_argument(describe(features.rows()) + " feature rows but " +
                                describe(targets.size()) + " targets");
  }
  if (targets.empty()) throw std::invalid_argument("no training rows");
  if (!finite(targets)) throw std::invalid_argument("targets contain non-finite values");
}

}  // namespace

void HyperParams::validate() const {
  if (iterations < 1) throw std::invalid_argument("iterations must be >= 1");
  if (hidden_nodes < 1) throw std::invalid_argument("hidden_nodes must be >= 1");
  // A zero step is allowed; it leaves the initialized model untouched.
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw std::invalid_argument("learning_rate must be finite and >= 0");
  }
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw std::invalid_argument("alpha must be > 0");
  if (!(lambda1 >= 0.0) || !(lambda2 >= 0.0) || !std::isfinite(lambda1) ||
      !std::isfinite(lambda2)) {
    throw std::invalid_argument("lambda1 and lambda2 must be finite and >= 0");
  }
}

void SpnnModel::check_shapes() const {
  const std::size_t nh = w1.rows();
  if (b1.size() != nh) throw std::invalid_argument("b1 length does not match W1 rows");
  if (w2.cols() != nh) throw std::invalid_argument("W2 columns do not match hidden width");
  if (b2.size() != w2.rows()) throw std::invalid_argument("b2 length does not match W2 rows");
  if (w2.rows() != levels.size()) {
    throw std::invalid_argument("output width " + describe(w2.rows()) + " differs from " +
                                describe(levels.size()) + " quantile levels");
  }
}

std::vector<double> forward(const SpnnModel& model, std::span<const double> x) {
  if (x.size() != model.input_width()) {
    throw std::invalid_argument("forward: input length " + describe(x.size()) + ", expected " +
                                describe(model.input_width()));
  }
  std::vector<double> hidden(model.hidden_width());
  for (std::size_t h = 0; h < hidden.size(); ++h) {
    auto w = model.w1.row(h);
    double z = model.b1[h];
    for (std::size_t i = 0; i < x.size(); ++i) z += w[i] * x[i];
    hidden[h] = std::tanh(z);
  }
  std::vector<double> out(model.output_width());
  for (std::size_t m = 0; m < out.size(); ++m) {
    auto w = model.w2.row(m);
    double q = model.b2[m];
    for (std::size_t h = 0; h < hidden.size(); ++h) q += w[h] * hidden[h];
    out[m] = q;
  }
  return out;
}

QuantileFan predict_fan(const SpnnModel& model, const Matrix& features) {
  model.check_shapes();
  if (features.cols() != model.input_width()) {
    throw std::invalid_argument("predict_fan: feature width " + describe(features.cols()) +
                                ", expected n_x = " + describe(model.input_width()));
  }
  return QuantileFan(output_layer(model, hidden_layer(model, features)), model.levels);
}

SpnnModel init_random(std::size_t n_x, const HyperParams& hyper, const QuantileLevels& levels) {
  hyper.validate();
  if (n_x == 0) throw std::invalid_argument("init: n_x must be >= 1");
  const auto nh = static_cast<std::size_t>(hyper.hidden_nodes);
  Rng rng(hyper.seed);
  SpnnModel model{Matrix(nh, n_x), std::vector<double>(nh, 0.0), Matrix(levels.size(), nh),
                  std::vector<double>(levels.size(), 0.0), levels, hyper};
  fill_uniform(model.w1, rng);
  fill_uniform(model.w2, rng);
  return model;
}

SpnnModel init_noncrossing(std::size_t n_x, const Matrix& training_features,
                           const HyperParams& hyper, const QuantileLevels& levels) {
  if (training_features.rows() == 0) throw std::invalid_argument("init: no training rows");
  if (training_features.cols() != n_x) {
    throw std::invalid_argument("init: feature width " + describe(training_features.cols()) +
                                ", expected n_x = " + describe(n_x));
  }
  hyper.validate();
  const auto nh = static_cast<std::size_t>(hyper.hidden_nodes);
  Rng rng(hyper.seed);
  SpnnModel model{Matrix(nh, n_x), std::vector<double>(nh, 0.0), Matrix(levels.size(), nh),
                  std::vector<double>(levels.size(), 0.0), levels, hyper};
  fill_uniform(model.w1, rng);

  const Matrix hidden = hidden_layer(model, training_features);
  Matrix targets(training_features.rows(), levels.size());
  for (std::size_t t = 0; t < targets.rows(); ++t) {
    auto row = targets.row(t);
    for (std::size_t m = 0; m < row.size(); ++m) row[m] = levels[m];
  }
  model.w2 = transpose(matmul(pinv(hidden), targets));
  return model;
}

double objective_and_gradient(const SpnnModel& model, const Matrix& features,
                              std::span<const double> targets, Gradients& grad) {
  check_inputs(model, features, targets);
  const std::size_t n = features.rows();
  const std::size_t nq = model.output_width();
  const double nm = static_cast<double>(n * nq);

  const Matrix hidden = hidden_layer(model, features);
  Matrix dq = output_layer(model, hidden);  // overwritten with dE/dq

  const double objective_value =
      mean_smooth_loss_with_gradient(targets, dq, model.levels, model.hyper.alpha) +
      model.hyper.lambda1 * squared_frobenius_norm(model.w1) / (2.0 * nm) +
      model.hyper.lambda2 * squared_frobenius_norm(model.w2) / (2.0 * nm);

  grad.w2 = add(matmul_tn(dq, hidden), scale(model.w2, model.hyper.lambda2 / nm));
  grad.b2 = column_sums(dq);

  Matrix dz = matmul(dq, model.w2);  // N x n_h
  for (std::size_t t = 0; t < n; ++t) {
    auto d = dz.row(t);
    auto h = hidden.row(t);
    for (std::size_t j = 0; j < d.size(); ++j) d[j] *= 1.0 - h[j] * h[j];
  }
  grad.w1 = add(matmul_tn(dz, features), scale(model.w1, model.hyper.lambda1 / nm));
  grad.b1 = column_sums(dz);
  return objective_value;
}

double model_objective(const SpnnModel& model, const Matrix& features,
                       std::span<const double> targets) {
  check_inputs(model, features, targets);
  return objective(targets, predict_fan(model, features), model.hyper.alpha, model.hyper.lambda1,
                   model.hyper.lambda2, model.w1, model.w2);
}

namespace {

void descend(Matrix& w, const Matrix& g, double step) {
  auto dst = w.data();
  auto src = g.data();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] -= step * src[i];
}

void descend(std::vector<double>& w, const std::vector<double>& g, double step) {
  for (std::size_t i = 0; i < w.size(); ++i) w[i] -= step * g[i];
}

}  // namespace

TrainResult train(SpnnModel model, const Matrix& features, std::span<const double> targets) {
  model.hyper.validate();
  check_inputs(model, features, targets);
  const double step = model.hyper.learning_rate;

  TrainResult result;
  result.loss_trace.reserve(static_cast<std::size_t>(model.hyper.iterations));
  Gradients grad;
  for (int it = 0; it < model.hyper.iterations; ++it) {
    const double value = objective_and_gradient(model, features, targets, grad);
    if (!std::isfinite(value) || !grad.w1.all_finite() || !grad.w2.all_finite() ||
        !finite(grad.b1) || !finite(grad.b2)) {
      throw NumericError("training diverged at iteration " + std::to_string(it) +
                         " (non-finite loss or gradient)");
    }
    result.loss_trace.push_back(value);
    descend(model.w1, grad.w1, step);
    descend(model.b1, grad.b1, step);
    descend(model.w2, grad.w2, step);
    descend(model.b2, grad.b2, step);
  }
  if (!model.w1.all_finite() || !model.w2.all_finite() || !finite(model.b1) || !finite(model.b2)) {
    throw NumericError("training produced non-finite weights at the final step");
  }
  result.model = std::move(model);
  return result;
}

}  // namespace qfan
