#pragma once

#include <array>
#include <span>
#include <string_view>
#include <vector>

#include "qfan/dataset.hpp"
#include "qfan/linalg.hpp"

namespace qfan {

inline constexpr std::size_t kFeatureCount = 12;

/// Column order of every feature matrix.
inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "ws10", "ws100", "dir10", "dir100", "energy10", "energy100",
    "hour_of_day", "day_of_year", "u10", "v10", "u100", "v100"};

/// Per-column affine map (x - mean) / std.
struct Standardizer {
  std::vector<double> means;
  std::vector<double> stds;
  /// Columns whose sample std was zero; their std is stored as 1.
  std::vector<bool> degenerate;

  static Standardizer identity(std::size_t n_x);
  bool any_degenerate() const;

  friend bool operator==(const Standardizer&, const Standardizer&) = default;
};

struct FeatureMatrix {
  Matrix values;  // N x 12
  Standardizer standardizer;  // identity until standardized
};

/// Wind speed, direction, energy (density 1) at both heights, calendar
/// features, and the raw components. Direction is atan2(u, v) in degrees,
/// 0 for calm air.
FeatureMatrix derive_features(std::span<const RawRecord> records);

/// Column means and (n-1)-divisor standard deviations; needs N >= 2.
Standardizer fit_standardizer(const Matrix& features);
inline Standardizer fit_standardizer(const FeatureMatrix& f) { return fit_standardizer(f.values); }

FeatureMatrix apply_standardizer(const FeatureMatrix& features, const Standardizer& standardizer);
Matrix apply_standardizer(const Matrix& features, const Standardizer& standardizer);

/// Inverse transform x * std + mean.
Matrix invert_standardizer(const Matrix& standardized, const Standardizer& standardizer);

}  // namespace qfan
