#include "qfan/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qfan/baselines.hpp"
#include "qfan/rng.hpp"

namespace qfan {

namespace {

double location(double x, std::size_t t) {
  return 0.5 + 0.3 * std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / 24.0) * x;
}

double spread(double x) { return 0.05 + 0.1 * std::abs(x); }

}  // namespace

TimeSeriesDataset make_synthetic_dataset(const SyntheticOptions& options) {
  TimeSeriesDataset data;
  const Timestamp origin = month_start(options.start);
  for (std::size_t z = 0; z < options.zones.size(); ++z) {
    Rng rng(mix_seed(options.seed + z));
    ZoneSeries series{options.zones[z], {}};
    series.records.reserve(options.hours);
    for (std::size_t t = 0; t < options.hours; ++t) {
      const double x = rng.uniform(-1.0, 1.0);
      const double v = rng.uniform(-1.0, 1.0);
      const double eps = rng.normal();
      RawRecord r;
      r.timestamp = origin + std::chrono::hours{static_cast<long>(t)};
      r.zone = options.zones[z];
      r.u10 = x;
      r.v10 = v;
      r.u100 = 1.3 * x;
      r.v100 = 1.3 * v;
      r.power = std::clamp(location(x, t) + spread(x) * eps, 0.0, 1.0);
      series.records.push_back(std::move(r));
    }
    data.zones.push_back(std::move(series));
  }
  return data;
}

double synthetic_quantile(double x, std::size_t hour_index, double tau) {
  return std::clamp(location(x, hour_index) + spread(x) * normal_quantile(tau), 0.0, 1.0);
}

}  // namespace qfan
