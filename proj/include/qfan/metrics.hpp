#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "qfan/linalg.hpp"
#include "qfan/quantiles.hpp"

namespace qfan {

/// Central prediction intervals paired from a symmetric fan.
///
/// Column i holds the interval with nominal miss rate betas[i]; the
/// innermost pair comes first, so betas decrease and coverage grows with i.
struct IntervalSet {
  Matrix lower;  // N x M/2
  Matrix upper;  // N x M/2
  std::vector<double> betas;
};

/// Pairs level tau_j with tau_{M-1-j}. Throws if the levels are not
/// symmetric about 0.5 or M is odd.
IntervalSet intervals_from_fan(const QuantileFan& fan);

/// Mean pinball loss over all N x M estimates; `raw_sum` returns the
/// unnormalized double sum instead.
double quantile_score(std::span<const double> y, const QuantileFan& fan, bool raw_sum = false);

/// Fraction of observations inside each interval, bounds inclusive.
std::vector<double> picp(std::span<const double> y, const IntervalSet& intervals);

/// Sum over levels of |100 PICP_i - 100 (1 - beta_i)|, in percentage points.
double ace(std::span<const double> picp_values, std::span<const double> betas);

/// Width plus miss-penalty score averaged as 2/(N M) times the double sum;
/// lower is better. `negate_for_report` flips the sign.
double interval_score(std::span<const double> y, const IntervalSet& intervals,
                      bool negate_for_report = false);

/// Number of adjacent pairs with q(tau_m) > q(tau_{m+1}), over all rows.
std::size_t crossover_count(const QuantileFan& fan);

struct EvaluationReport {
  double qs = 0.0;
  std::vector<double> picp;
  std::vector<double> betas;
  double ace = 0.0;
  double interval_score = 0.0;
  std::size_t crossovers = 0;
  std::size_t n_obs = 0;
};

/// All metrics for one fan. Rows whose target is NaN are excluded from the
/// scores but still counted for crossovers.
EvaluationReport evaluate(std::span<const double> y, const QuantileFan& fan,
                          bool negate_interval_score = false);

}  // namespace qfan
