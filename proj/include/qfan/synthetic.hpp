#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <vector>

#include "qfan/dataset.hpp"

namespace qfan {

/// Heteroskedastic test process with known conditional quantiles:
///
///   y_t = 0.5 + 0.3 sin(2 pi t / 24) x_t + (0.05 + 0.1 |x_t|) eps_t,
///
/// clamped to [0, 1], with x_t ~ U[-1, 1], eps_t ~ N(0, 1) and t the hour
/// index from midnight of the start day. x_t is exposed as the 10 m zonal
/// wind component; the 100 m components are scaled copies of the 10 m ones.
struct SyntheticOptions {
  std::uint64_t seed = 0;
  std::vector<std::string> zones{"1"};
  std::chrono::year_month start{std::chrono::year{2013}, std::chrono::January};
  std::size_t hours = 2160;
};

TimeSeriesDataset make_synthetic_dataset(const SyntheticOptions& options);

/// True tau-quantile of y_t given x_t for the process above.
double synthetic_quantile(double x, std::size_t hour_index, double tau);

}  // namespace qfan
