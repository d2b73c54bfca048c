#pragma once

#include <span>

#include "qfan/linalg.hpp"
#include "qfan/quantiles.hpp"

namespace qfan {

/// Pinball (check) loss rho_tau(u) for residual u = y - q.
double pinball(double u, double tau);

/// Logistic smoothing of the pinball loss,
/// tau*u + alpha*log(1 + exp(-u/alpha)), evaluated without overflow.
double smooth_pinball(double u, double tau, double alpha);

/// Derivative of smooth_pinball(y - q) with respect to q:
/// 1/(1 + exp(u/alpha)) - tau. Lies in (-tau, 1 - tau).
double smooth_pinball_grad(double u, double tau, double alpha);

/// log(smooth_pinball(u) - pinball(u)). The gap itself underflows to zero for
/// |u|/alpha beyond ~745, its logarithm stays finite.
double log_smoothing_gap(double u, double alpha);

/// Regularized network objective
///   lambda1 |W1|^2/(2NM) + lambda2 |W2|^2/(2NM) + mean_{t,m} S(y_t - q_tm).
/// Either weight matrix may be empty (linear model without hidden layer).
double objective(std::span<const double> y, const QuantileFan& qhat, double alpha, double lambda1,
                 double lambda2, const Matrix& w1, const Matrix& w2);

/// Mean smooth pinball loss over an N x M fan of estimates, overwriting each
/// estimate with d(mean loss)/d(estimate). Shared by the network and the
/// linear baseline training loops.
double mean_smooth_loss_with_gradient(std::span<const double> y, Matrix& estimates,
                                      const QuantileLevels& levels, double alpha);

}  // namespace qfan
