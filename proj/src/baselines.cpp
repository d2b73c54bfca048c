#include "qfan/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "qfan/error.hpp"
#include "qfan/loss.hpp"

namespace qfan {

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("normal_quantile: p = " + std::to_string(p) + " outside (0, 1)");
  }
  const double q = p - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((r * 2509.0809287301226727 + 33430.575583588128105) * r +
                 67265.770927008700853) * r + 45921.953931549871457) * r +
               13731.693765509461125) * r + 1971.5909503065514427) * r +
             133.14166789178437745) * r + 3.387132872796366608) /
           (((((((r * 5226.495278852545925 + 28729.085735721942674) * r +
                 39307.89580009271061) * r + 21213.794301586595867) * r +
               5394.1960214247511077) * r + 687.1870074920579083) * r +
             42.313330701600911252) * r + 1.0);
  }
  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    val = (((((((r * 7.7454501427834140764e-4 + 0.0227238449892691845833) * r +
                0.24178072517745061177) * r + 1.27045825245236838258) * r +
              3.64784832476320460504) * r + 5.7694972214606914055) * r +
            4.6303378461565452959) * r + 1.42343711074968357734) /
          (((((((r * 1.05075007164441684324e-9 + 5.475938084995344946e-4) * r +
                0.0151986665636164571966) * r + 0.14810397642748007459) * r +
              0.68976733498510000455) * r + 1.6763848301838038494) * r +
            2.05319162663775882187) * r + 1.0);
  } else {
    r -= 5.0;
    val = (((((((r * 2.01033439929228813265e-7 + 2.71155556874348757815e-5) * r +
                0.0012426609473880784386) * r + 0.026532189526576123093) * r +
              0.29656057182850489123) * r + 1.7848265399172913358) * r +
            5.4637849111641143699) * r + 6.6579046435011037772) /
          (((((((r * 2.04426310338993978564e-15 + 1.4215117583164458887e-7) * r +
                1.8463183175100546818e-5) * r + 7.868691311456132591e-4) * r +
              0.0148753612908506148525) * r + 0.13692988092273580531) * r +
            0.59983220655588793769) * r + 1.0);
  }
  return q < 0.0 ? -val : val;
}

NormalParams fit_normal(std::span<const double> values) {
  if (values.size() < 2) {
    throw std::invalid_argument("persistence needs at least 2 observations, got " +
                                std::to_string(values.size()));
  }
  double mean = 0.0;
  for (double v : values) {
    if (!std::isfinite(v)) throw std::invalid_argument("persistence: non-finite observation");
    mean += v;
  }
  mean /= static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / static_cast<double>(values.size() - 1))};
}

double empirical_quantile(std::span<const double> sample, double tau) {
  if (sample.empty()) throw std::invalid_argument("empirical_quantile: empty sample");
  if (!(tau >= 0.0 && tau <= 1.0)) throw std::invalid_argument("empirical_quantile: tau outside [0, 1]");
  std::vector<double> sorted(sample.begin(), sample.end());
  std::sort(sorted.begin(), sorted.end());
  const double pos = tau * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

namespace {

QuantileFan repeat_row(const std::vector<double>& row, const QuantileLevels& levels,
                       std::size_t horizon) {
  Matrix values(horizon, levels.size());
  for (std::size_t t = 0; t < horizon; ++t) std::copy(row.begin(), row.end(), values.row(t).begin());
  return QuantileFan(std::move(values), levels);
}

}  // namespace

QuantileFan uniform_fan(const QuantileLevels& levels, std::size_t n) {
  return repeat_row({levels.begin(), levels.end()}, levels, n);
}

QuantileFan persistence_fan(std::span<const double> recent, const QuantileLevels& levels,
                            std::size_t horizon) {
  const NormalParams normal = fit_normal(recent);
  std::vector<double> row(levels.size());
  for (std::size_t m = 0; m < row.size(); ++m) {
    row[m] = normal.mu + normal.sigma * normal_quantile(levels[m]);
  }
  return repeat_row(row, levels, horizon);
}

QuantileFan climatology_fan(std::span<const double> history, const QuantileLevels& levels,
                            std::size_t horizon) {
  if (history.empty()) throw std::invalid_argument("climatology: empty history");
  std::vector<double> sorted(history.begin(), history.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> row(levels.size());
  for (std::size_t m = 0; m < row.size(); ++m) row[m] = empirical_quantile(sorted, levels[m]);
  return repeat_row(row, levels, horizon);
}

QuantileFan clip_to_unit_interval(QuantileFan fan) {
  for (double& v : fan.values.data()) v = std::clamp(v, 0.0, 1.0);
  return fan;
}

namespace {

Matrix linear_outputs(const LinearQuantileModel& model, const Matrix& features) {
  Matrix q = matmul_nt(features, model.weights);
  for (std::size_t t = 0; t < q.rows(); ++t) {
    auto row = q.row(t);
    for (std::size_t m = 0; m < row.size(); ++m) row[m] += model.bias[m];
  }
  return q;
}

}  // namespace

LinearQuantileModel train_mqr(const Matrix& features, std::span<const double> targets,
                              const QuantileLevels& levels, const HyperParams& hyper) {
  hyper.validate();
  if (features.rows() != targets.size() || targets.empty()) {
    throw std::invalid_argument("train_mqr: " + std::to_string(features.rows()) +
                                " feature rows but " + std::to_string(targets.size()) +
                                " targets");
  }
  for (double y : targets)
    if (!std::isfinite(y)) throw std::invalid_argument("train_mqr: non-finite target");

  LinearQuantileModel model{Matrix(levels.size(), features.cols()),
                            std::vector<double>(levels.size(), 0.0), levels, hyper};
  const double nm = static_cast<double>(targets.size() * levels.size());
  const double step = hyper.learning_rate;
  for (int it = 0; it < hyper.iterations; ++it) {
    Matrix dq = linear_outputs(model, features);
    const double value = mean_smooth_loss_with_gradient(targets, dq, levels, hyper.alpha) +
                         hyper.lambda2 * squared_frobenius_norm(model.weights) / (2.0 * nm);
    if (!std::isfinite(value)) {
      throw NumericError("MQR training diverged at iteration " + std::to_string(it));
    }
    const Matrix grad_w = matmul_tn(dq, features);
    auto w = model.weights.data();
    auto g = grad_w.data();
    for (std::size_t i = 0; i < w.size(); ++i) {
      w[i] -= step * (g[i] + hyper.lambda2 / nm * w[i]);
    }
    for (std::size_t t = 0; t < dq.rows(); ++t) {
      auto row = dq.row(t);
      for (std::size_t m = 0; m < row.size(); ++m) model.bias[m] -= step * row[m];
    }
  }
  if (!model.weights.all_finite()) throw NumericError("MQR training produced non-finite weights");
  return model;
}

QuantileFan predict_fan(const LinearQuantileModel& model, const Matrix& features) {
  if (features.cols() != model.weights.cols()) {
    throw std::invalid_argument("predict_fan: feature width " + std::to_string(features.cols()) +
                                ", expected n_x = " + std::to_string(model.weights.cols()));
  }
  return QuantileFan(linear_outputs(model, features), model.levels);
}

}  // namespace qfan
