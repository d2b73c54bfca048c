#include "qfan/metrics.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "qfan/loss.hpp"

namespace qfan {

namespace {

void check_rows(std::size_t n_targets, std::size_t n_rows, const char* what) {
  if (n_targets != n_rows) {
    throw std::invalid_argument(std::string(what) + ": " + std::to_string(n_targets) +
                                " observations but " + std::to_string(n_rows) + " forecast rows");
  }
}

}  // namespace

IntervalSet intervals_from_fan(const QuantileFan& fan) {
  const std::size_t m = fan.size();
  if (m < 2 || m % 2 != 0) {
    throw std::invalid_argument("intervals need an even number (>= 2) of levels, got " +
                                std::to_string(m));
  }
  if (!fan.levels.symmetric()) {
    throw std::invalid_argument("intervals need levels symmetric about 0.5");
  }
  const std::size_t half = m / 2;
  const std::size_t n = fan.rows();
  IntervalSet out{Matrix(n, half), Matrix(n, half), std::vector<double>(half)};
  for (std::size_t i = 0; i < half; ++i) {
    const std::size_t lo = half - 1 - i;
    const std::size_t hi = half + i;
    out.betas[i] = 1.0 - (fan.levels[hi] - fan.levels[lo]);
    for (std::size_t t = 0; t < n; ++t) {
      out.lower(t, i) = fan.values(t, lo);
      out.upper(t, i) = fan.values(t, hi);
    }
  }
  return out;
}

double quantile_score(std::span<const double> y, const QuantileFan& fan, bool raw_sum) {
  check_rows(y.size(), fan.rows(), "quantile_score");
  if (y.empty()) throw std::invalid_argument("quantile_score: no observations");
  double total = 0.0;
  for (std::size_t t = 0; t < y.size(); ++t) {
    auto row = fan.values.row(t);
    for (std::size_t m = 0; m < row.size(); ++m) total += pinball(y[t] - row[m], fan.levels[m]);
  }
  return raw_sum ? total : total / static_cast<double>(y.size() * fan.size());
}

std::vector<double> picp(std::span<const double> y, const IntervalSet& intervals) {
  check_rows(y.size(), intervals.lower.rows(), "picp");
  if (y.empty()) throw std::invalid_argument("picp: no observations");
  std::vector<double> out(intervals.betas.size(), 0.0);
  for (std::size_t t = 0; t < y.size(); ++t) {
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (intervals.lower(t, i) <= y[t] && y[t] <= intervals.upper(t, i)) out[i] += 1.0;
    }
  }
  for (double& v : out) v /= static_cast<double>(y.size());
  return out;
}

double ace(std::span<const double> picp_values, std::span<const double> betas) {
  if (picp_values.size() != betas.size()) {
    throw std::invalid_argument("ace: " + std::to_string(picp_values.size()) +
                                " coverage values but " + std::to_string(betas.size()) + " betas");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < betas.size(); ++i) {
    total += std::abs(100.0 * picp_values[i] - 100.0 * (1.0 - betas[i]));
  }
  return total;
}

double interval_score(std::span<const double> y, const IntervalSet& intervals,
                      bool negate_for_report) {
  check_rows(y.size(), intervals.lower.rows(), "interval_score");
  if (y.empty()) throw std::invalid_argument("interval_score: no observations");
  const std::size_t half = intervals.betas.size();
  double total = 0.0;
  for (std::size_t t = 0; t < y.size(); ++t) {
    for (std::size_t i = 0; i < half; ++i) {
      const double l = intervals.lower(t, i);
      const double u = intervals.upper(t, i);
      const double penalty = 2.0 / intervals.betas[i];
      total += u - l;
      if (y[t] < l) total += penalty * (l - y[t]);
      if (y[t] > u) total += penalty * (y[t] - u);
    }
  }
  const double score = 2.0 * total / static_cast<double>(y.size() * 2 * half);
  return negate_for_report ? -score : score;
}

std::size_t crossover_count(const QuantileFan& fan) {
  std::size_t count = 0;
  for (std::size_t t = 0; t < fan.rows(); ++t) {
    auto row = fan.values.row(t);
    for (std::size_t m = 0; m + 1 < row.size(); ++m) {
      if (row[m] > row[m + 1]) ++count;
    }
  }
  return count;
}

EvaluationReport evaluate(std::span<const double> y, const QuantileFan& fan,
                          bool negate_interval_score) {
  check_rows(y.size(), fan.rows(), "evaluate");
  std::vector<double> observed;
  std::vector<double> kept;
  for (std::size_t t = 0; t < y.size(); ++t) {
    if (std::isnan(y[t])) continue;
    observed.push_back(y[t]);
    auto row = fan.values.row(t);
    kept.insert(kept.end(), row.begin(), row.end());
  }
  EvaluationReport report;
  report.crossovers = crossover_count(fan);
  report.n_obs = observed.size();
  if (observed.empty()) throw std::invalid_argument("evaluate: no observed targets");

  const QuantileFan scored(Matrix(observed.size(), fan.size(), std::move(kept)), fan.levels);
  const IntervalSet intervals = intervals_from_fan(scored);
  report.qs = quantile_score(observed, scored);
  report.picp = picp(observed, intervals);
  report.betas = intervals.betas;
  report.ace = ace(report.picp, report.betas);
  report.interval_score = interval_score(observed, intervals, negate_interval_score);
  return report;
}

}  // namespace qfan
