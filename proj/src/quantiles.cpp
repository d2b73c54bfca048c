#include "qfan/quantiles.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace qfan {

QuantileLevels::QuantileLevels(std::vector<double> taus) : taus_(std::move(taus)) {
  if (taus_.empty()) throw std::invalid_argument("QuantileLevels: at least one level required");
  for (std::size_t m = 0; m < taus_.size(); ++m) {
    const double tau = taus_[m];
    if (!(tau > 0.0 && tau < 1.0)) {
      throw std::invalid_argument("QuantileLevels: level " + std::to_string(tau) +
                                  " outside (0, 1)");
    }
    if (m > 0 && !(taus_[m - 1] < tau)) {
      throw std::invalid_argument("QuantileLevels: levels must be strictly increasing");
    }
  }
}

bool QuantileLevels::symmetric() const {
  const std::size_t n = taus_.size();
  for (std::size_t m = 0; m < n; ++m) {
    if (std::abs(taus_[m] + taus_[n - 1 - m] - 1.0) > 1e-12) return false;
  }
  return true;
}

QuantileFan::QuantileFan(Matrix v, QuantileLevels l) : values(std::move(v)), levels(std::move(l)) {
  if (values.cols() != levels.size()) {
    throw std::invalid_argument("QuantileFan: " + std::to_string(values.cols()) +
                                " columns but " + std::to_string(levels.size()) + " levels");
  }
}

}  // namespace qfan
