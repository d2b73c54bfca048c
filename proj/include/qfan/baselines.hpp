#pragma once

#include <span>
#include <vector>

#include "qfan/linalg.hpp"
#include "qfan/network.hpp"
#include "qfan/quantiles.hpp"

namespace qfan {

/// Inverse of the standard normal CDF (Wichura's AS241, PPND16).
/// Requires p in (0, 1).
double normal_quantile(double p);

struct NormalParams {
  double mu = 0.0;
  double sigma = 0.0;
};

/// Sample mean and (n-1)-divisor standard deviation; needs >= 2 values.
NormalParams fit_normal(std::span<const double> values);

/// Linearly interpolated empirical quantile at zero-based position
/// tau * (n - 1) of the sorted sample.
double empirical_quantile(std::span<const double> sample, double tau);

/// Quantiles of Uniform[0, 1]: every row equals the levels.
QuantileFan uniform_fan(const QuantileLevels& levels, std::size_t n);

/// Normal distribution fitted to the most recent observations, repeated over
/// the horizon.
QuantileFan persistence_fan(std::span<const double> recent, const QuantileLevels& levels,
                            std::size_t horizon);

/// Empirical quantiles of the history, repeated over the horizon.
QuantileFan climatology_fan(std::span<const double> history, const QuantileLevels& levels,
                            std::size_t horizon);

/// Clamp every estimate to [0, 1]. Baselines are unclipped unless asked.
QuantileFan clip_to_unit_interval(QuantileFan fan);

/// Multiple linear quantile regression q = W x + b.
struct LinearQuantileModel {
  Matrix weights;            // M x n_x
  std::vector<double> bias;  // M
  QuantileLevels levels;
  HyperParams hyper;

  friend bool operator==(const LinearQuantileModel&, const LinearQuantileModel&) = default;
};

/// Zero-initialized linear model trained by full-batch gradient descent on
/// the smoothed objective; hyper.lambda2 penalizes the weights, hidden_nodes
/// and lambda1 are unused.
LinearQuantileModel train_mqr(const Matrix& features, std::span<const double> targets,
                              const QuantileLevels& levels, const HyperParams& hyper);

QuantileFan predict_fan(const LinearQuantileModel& model, const Matrix& features);

}  // namespace qfan
