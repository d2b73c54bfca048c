#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "qfan/linalg.hpp"

namespace qfan {

/// Strictly increasing quantile levels, each in the open interval (0, 1).
class QuantileLevels {
 public:
  QuantileLevels() = default;
  explicit QuantileLevels(std::vector<double> taus);

  std::size_t size() const { return taus_.size(); }
  double operator[](std::size_t m) const { return taus_[m]; }
  std::span<const double> values() const { return taus_; }
  auto begin() const { return taus_.begin(); }
  auto end() const { return taus_.end(); }

  /// True when tau_m + tau_{M-1-m} == 1 for every m (within 1e-12).
  bool symmetric() const;

  friend bool operator==(const QuantileLevels&, const QuantileLevels&) = default;

 private:
  std::vector<double> taus_;
};

/// N x M matrix of quantile estimates tagged with its levels.
///
/// Columns need not be monotone; crossings are counted by the metrics, never
/// repaired.
struct QuantileFan {
  Matrix values;
  QuantileLevels levels;

  QuantileFan() = default;
  QuantileFan(Matrix values, QuantileLevels levels);

  std::size_t rows() const { return values.rows(); }
  std::size_t size() const { return levels.size(); }
};

}  // namespace qfan
