#include "qfan/features.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "qfan/error.hpp"

namespace qfan {

using namespace std::chrono;

namespace {

double speed(double u, double v) { return std::hypot(u, v); }

// Degrees in (-180, 180].
double direction(double u, double v) {
  if (u == 0.0 && v == 0.0) return 0.0;
  const double deg = 180.0 / std::numbers::pi * std::atan2(u, v);
  return deg <= -180.0 ? 180.0 : deg;
}

double energy(double ws) { return 0.5 * 1.0 * ws * ws * ws; }

void check_width(std::size_t got, std::size_t want) {
  if (got != want) {
    throw std::invalid_argument("standardizer has " + std::to_string(want) +
                                " columns, features have " + std::to_string(got));
  }
}

}  // namespace

Standardizer Standardizer::identity(std::size_t n_x) {
  return {std::vector<double>(n_x, 0.0), std::vector<double>(n_x, 1.0),
          std::vector<bool>(n_x, false)};
}

bool Standardizer::any_degenerate() const {
  return std::any_of(degenerate.begin(), degenerate.end(), [](bool b) { return b; });
}

FeatureMatrix derive_features(std::span<const RawRecord> records) {
  Matrix out(records.size(), kFeatureCount);
  for (std::size_t t = 0; t < records.size(); ++t) {
    const RawRecord& r = records[t];
    for (double c : {r.u10, r.v10, r.u100, r.v100}) {
      if (!std::isfinite(c)) {
        throw DataError("missing wind component at " + format_timestamp(r.timestamp));
      }
    }
    const auto day_point = floor<days>(r.timestamp);
    const year_month_day ymd{day_point};
    const auto hour = duration_cast<hours>(r.timestamp - day_point).count();
    const auto yday = (day_point - sys_days{ymd.year() / January / 1}).count() + 1;

    const double ws10 = speed(r.u10, r.v10);
    const double ws100 = speed(r.u100, r.v100);
    auto row = out.row(t);
    row[0] = ws10;
    row[1] = ws100;
    row[2] = direction(r.u10, r.v10);
    row[3] = direction(r.u100, r.v100);
    row[4] = energy(ws10);
    row[5] = energy(ws100);
    row[6] = static_cast<double>(hour);
    row[7] = static_cast<double>(yday);
    row[8] = r.u10;
    row[9] = r.v10;
    row[10] = r.u100;
    row[11] = r.v100;
  }
  return {std::move(out), Standardizer::identity(kFeatureCount)};
}

Standardizer fit_standardizer(const Matrix& features) {
  const std::size_t n = features.rows();
  if (n < 2) {
    throw std::invalid_argument("standardization needs at least 2 rows, got " + std::to_string(n));
  }
  const std::size_t k = features.cols();
  Standardizer s{std::vector<double>(k, 0.0), std::vector<double>(k, 0.0),
                 std::vector<bool>(k, false)};
  for (std::size_t t = 0; t < n; ++t)
    for (std::size_t j = 0; j < k; ++j) s.means[j] += features(t, j);
  for (double& m : s.means) m /= static_cast<double>(n);
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t j = 0; j < k; ++j) {
      const double d = features(t, j) - s.means[j];
      s.stds[j] += d * d;
    }
  }
  for (std::size_t j = 0; j < k; ++j) {
    s.stds[j] = std::sqrt(s.stds[j] / static_cast<double>(n - 1));
    if (!(s.stds[j] > 0.0)) {
      s.stds[j] = 1.0;
      s.degenerate[j] = true;
    }
  }
  return s;
}

Matrix apply_standardizer(const Matrix& features, const Standardizer& s) {
  check_width(features.cols(), s.means.size());
  Matrix out = features;
  for (std::size_t t = 0; t < out.rows(); ++t) {
    auto row = out.row(t);
    for (std::size_t j = 0; j < row.size(); ++j) row[j] = (row[j] - s.means[j]) / s.stds[j];
  }
  return out;
}

FeatureMatrix apply_standardizer(const FeatureMatrix& features, const Standardizer& s) {
  return {apply_standardizer(features.values, s), s};
}

Matrix invert_standardizer(const Matrix& standardized, const Standardizer& s) {
  check_width(standardized.cols(), s.means.size());
  Matrix out = standardized;
  for (std::size_t t = 0; t < out.rows(); ++t) {
    auto row = out.row(t);
    for (std::size_t j = 0; j < row.size(); ++j) row[j] = row[j] * s.stds[j] + s.means[j];
  }
  return out;
}

}  // namespace qfan
