#include "qfan/loss.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace qfan {

namespace {

void check_tau(double tau) {
  if (!(tau > 0.0 && tau < 1.0)) {
    throw std::invalid_argument("quantile level " + std::to_string(tau) + " outside (0, 1)");
  }
}

void check_alpha(double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("smoothing alpha must be positive");
}

}  // namespace

double pinball(double u, double tau) {
  check_tau(tau);
  return u >= 0.0 ? tau * u : (tau - 1.0) * u;
}

double smooth_pinball(double u, double tau, double alpha) {
  check_tau(tau);
  check_alpha(alpha);
  // tau*u + alpha*log(1+exp(-u/alpha)) == rho_tau(u) + alpha*log1p(exp(-|u|/alpha)).
  // Reusing the pinball branch verbatim keeps S - rho >= 0 in floating point.
  return pinball(u, tau) + alpha * std::log1p(std::exp(-std::abs(u) / alpha));
}

double smooth_pinball_grad(double u, double tau, double alpha) {
  check_tau(tau);
  check_alpha(alpha);
  const double z = u / alpha;
  double logistic;  // 1 / (1 + exp(z))
  if (z >= 0.0) {
    const double e = std::exp(-z);
    logistic = e / (1.0 + e);
  } else {
    logistic = 1.0 / (1.0 + std::exp(z));
  }
  return logistic - tau;
}

double log_smoothing_gap(double u, double alpha) {
  check_alpha(alpha);
  const double z = std::abs(u) / alpha;
  // log(log1p(e^-z)) ~ -z once e^-z is below double epsilon.
  const double inner = z > 40.0 ? -z : std::log(std::log1p(std::exp(-z)));
  return std::log(alpha) + inner;
}

double objective(std::span<const double> y, const QuantileFan& qhat, double alpha, double lambda1,
                 double lambda2, const Matrix& w1, const Matrix& w2) {
  const std::size_t n = y.size();
  const std::size_t m = qhat.size();
  if (qhat.rows() != n) {
    throw std::invalid_argument("objective: " + std::to_string(n) + " targets but fan has " +
                                std::to_string(qhat.rows()) + " rows");
  }
  if (n == 0 || m == 0) throw std::invalid_argument("objective: empty problem");
  if (lambda1 < 0.0 || lambda2 < 0.0) {
    throw std::invalid_argument("objective: regularization weights must be non-negative");
  }
  check_alpha(alpha);

  double loss = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    auto row = qhat.values.row(t);
    for (std::size_t k = 0; k < m; ++k) loss += smooth_pinball(y[t] - row[k], qhat.levels[k], alpha);
  }
  const double nm = static_cast<double>(n * m);
  return lambda1 * squared_frobenius_norm(w1) / (2.0 * nm) +
         lambda2 * squared_frobenius_norm(w2) / (2.0 * nm) + loss / nm;
}

double mean_smooth_loss_with_gradient(std::span<const double> y, Matrix& estimates,
                                      const QuantileLevels& levels, double alpha) {
  const std::size_t n = estimates.rows();
  const std::size_t nq = estimates.cols();
  if (y.size() != n || levels.size() != nq || n == 0) {
    throw std::invalid_argument("mean_smooth_loss_with_gradient: shape mismatch");
  }
  check_alpha(alpha);
  const double nm = static_cast<double>(n * nq);
  double loss = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    auto row = estimates.row(t);
    for (std::size_t m = 0; m < nq; ++m) {
      const double tau = levels[m];
      const double u = y[t] - row[m];
      const double e = std::exp(-std::abs(u) / alpha);
      loss += tau * u + std::max(-u, 0.0) + alpha * std::log1p(e);
      const double logistic = u >= 0.0 ? e / (1.0 + e) : 1.0 / (1.0 + e);  // 1/(1+exp(u/a))
      row[m] = (logistic - tau) / nm;
    }
  }
  return loss / nm;
}

}  // namespace qfan
