#include "qfan/backtest.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <ostream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "qfan/baselines.hpp"
#include "qfan/error.hpp"
#include "qfan/features.hpp"
#include "qfan/rng.hpp"

namespace qfan {

using namespace std::chrono;

namespace {

constexpr std::pair<ModelKind, std::string_view> kModelNames[] = {
    {ModelKind::uniform, "uniform"},     {ModelKind::persistence, "persistence"},
    {ModelKind::climatology, "climatology"}, {ModelKind::mqr, "mqr"},
    {ModelKind::spnn_w, "spnn-w"},       {ModelKind::spnn_wo, "spnn-wo"}};

std::string fmt(double v, const char* spec = "%.10g") {
  char buf[40];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

struct CellData {
  std::vector<const RawRecord*> train;  // rows with observed power
  std::vector<const RawRecord*> test;   // every hour of the test month
};

CellData select_rows(const ZoneSeries& series, year_month month, int window) {
  const Timestamp train_begin = month_start(month - months{window});
  const Timestamp test_begin = month_start(month);
  const Timestamp test_end = month_start(month + months{1});
  CellData d;
  for (const auto& r : series.records) {
    if (r.timestamp >= train_begin && r.timestamp < test_begin && r.power) d.train.push_back(&r);
    if (r.timestamp >= test_begin && r.timestamp < test_end) d.test.push_back(&r);
  }
  return d;
}

std::vector<RawRecord> copy_rows(const std::vector<const RawRecord*>& rows) {
  std::vector<RawRecord> out;
  out.reserve(rows.size());
  for (const auto* r : rows) out.push_back(*r);
  return out;
}

// Each month of the training window must contain at least one record.
std::optional<std::string> window_gap(const ZoneSeries& series, year_month month, int window) {
  for (int k = window; k >= 1; --k) {
    const year_month wm = month - months{k};
    const Timestamp begin = month_start(wm);
    const Timestamp end = month_start(wm + months{1});
    const bool any = std::any_of(series.records.begin(), series.records.end(), [&](const RawRecord& r) {
      return r.timestamp >= begin && r.timestamp < end;
    });
    if (!any) return "training window month " + format_month(wm) + " has no data";
  }
  return std::nullopt;
}

}  // namespace

QuantileFan fit_and_forecast(ModelKind kind, std::span<const RawRecord> train_rows,
                             std::span<const RawRecord> test_rows, Timestamp boundary,
                             const QuantileLevels& levels, const HyperParams& hyper,
                             bool clip_baselines) {
  const std::size_t horizon = test_rows.size();
  std::vector<RawRecord> observed;
  std::vector<double> train_power;
  for (const auto& r : train_rows) {
    if (!r.power) continue;
    observed.push_back(r);
    train_power.push_back(*r.power);
  }
  if (train_power.empty()) throw std::invalid_argument("no observed training power");

  switch (kind) {
    case ModelKind::uniform:
      return uniform_fan(levels, horizon);
    case ModelKind::persistence: {
      std::vector<double> recent;
      for (const auto& r : observed) {
        if (r.timestamp >= boundary - hours{24} && r.timestamp < boundary) recent.push_back(*r.power);
      }
      auto fan = persistence_fan(recent, levels, horizon);
      return clip_baselines ? clip_to_unit_interval(std::move(fan)) : fan;
    }
    case ModelKind::climatology: {
      auto fan = climatology_fan(train_power, levels, horizon);
      return clip_baselines ? clip_to_unit_interval(std::move(fan)) : fan;
    }
    case ModelKind::mqr:
    case ModelKind::spnn_w:
    case ModelKind::spnn_wo: {
      const FeatureMatrix raw_train = derive_features(observed);
      const Standardizer standardizer = fit_standardizer(raw_train);
      const Matrix x_train = apply_standardizer(raw_train.values, standardizer);
      const Matrix x_test = apply_standardizer(derive_features(test_rows).values, standardizer);
      if (kind == ModelKind::mqr) {
        return predict_fan(train_mqr(x_train, train_power, levels, hyper), x_test);
      }
      SpnnModel init = kind == ModelKind::spnn_w
                           ? init_noncrossing(x_train.cols(), x_train, hyper, levels)
                           : init_random(x_train.cols(), hyper, levels);
      return predict_fan(train(std::move(init), x_train, train_power).model, x_test);
    }
  }
  throw std::logic_error("unknown model kind");
}

std::string_view to_string(ModelKind kind) {
  for (const auto& [k, name] : kModelNames)
    if (k == kind) return name;
  return "?";
}

std::optional<ModelKind> parse_model_kind(std::string_view name) {
  for (const auto& [k, n] : kModelNames)
    if (n == name) return k;
  return std::nullopt;
}

std::string_view to_string(CellStatus status) {
  switch (status) {
    case CellStatus::ok: return "ok";
    case CellStatus::skipped: return "skipped";
    case CellStatus::failed: return "failed";
  }
  return "?";
}

QuantileLevels default_levels() {
  std::vector<double> taus;
  for (int k = 1; k <= 19; ++k) {
    if (k != 10) taus.push_back(k / 20.0);
  }
  return QuantileLevels(std::move(taus));
}

void BacktestPlan::validate() const {
  if (zones.empty()) throw std::invalid_argument("plan: no zones");
  if (test_months.empty()) throw std::invalid_argument("plan: no test months");
  if (models.empty()) throw std::invalid_argument("plan: no models");
  if (train_window_months < 1) throw std::invalid_argument("plan: train window must be >= 1 month");
  if (!levels.symmetric() || levels.size() % 2 != 0) {
    throw std::invalid_argument("plan: levels must be symmetric about 0.5 with an even count");
  }
  hyper.validate();
}

bool BacktestResult::all_ok() const {
  return std::all_of(cells.begin(), cells.end(),
                     [](const CellResult& c) { return c.status == CellStatus::ok; });
}

std::uint64_t cell_seed(std::uint64_t plan_seed, const std::string& zone, year_month month) {
  std::uint64_t h = mix_seed(plan_seed);
  for (unsigned char c : zone) h = mix_seed(h ^ c);
  h = mix_seed(h ^ static_cast<std::uint64_t>(static_cast<int>(month.year())));
  return mix_seed(h ^ static_cast<unsigned>(month.month()));
}

CellResult run_cell(const CellKey& key, const TimeSeriesDataset& data, const BacktestPlan& plan) {
  CellResult result;
  result.key = key;
  const ZoneSeries* series = data.find(key.zone);
  if (series == nullptr) {
    result.status = CellStatus::skipped;
    result.reason = "zone not present in data";
    return result;
  }
  if (auto gap = window_gap(*series, key.month, plan.train_window_months)) {
    result.status = CellStatus::skipped;
    result.reason = *gap;
    return result;
  }
  const CellData rows = select_rows(*series, key.month, plan.train_window_months);
  if (rows.train.size() < std::max<std::size_t>(plan.min_train_rows, 2)) {
    result.status = CellStatus::skipped;
    result.reason = "insufficient training data (" + std::to_string(rows.train.size()) +
                    " observed rows)";
    return result;
  }
  if (rows.test.empty()) {
    result.status = CellStatus::skipped;
    result.reason = "no test-month records";
    return result;
  }
  std::vector<double> observed(rows.test.size());
  bool any_observed = false;
  for (std::size_t t = 0; t < rows.test.size(); ++t) {
    observed[t] = rows.test[t]->power ? *rows.test[t]->power
                                      : std::numeric_limits<double>::quiet_NaN();
    any_observed |= rows.test[t]->power.has_value();
  }
  if (!any_observed) {
    result.status = CellStatus::skipped;
    result.reason = "no observed power in test month";
    return result;
  }

  try {
    HyperParams hyper = plan.hyper;
    hyper.seed = cell_seed(plan.seed, key.zone, key.month);
    QuantileFan fan = fit_and_forecast(key.model, copy_rows(rows.train), copy_rows(rows.test),
                                       month_start(key.month), plan.levels, hyper,
                                       plan.clip_baselines);
    result.report = evaluate(observed, fan, plan.negate_interval_score);
    if (plan.keep_fans) {
      result.fan = std::move(fan);
      for (const auto* r : rows.test) result.fan_times.push_back(r->timestamp);
    }
  } catch (const NumericError& e) {
    result.status = CellStatus::failed;
    result.reason = e.what();
  } catch (const std::exception& e) {
    result.status = CellStatus::skipped;
    result.reason = e.what();
  }
  return result;
}

BacktestResult run_plan(const BacktestPlan& plan, const TimeSeriesDataset& data) {
  plan.validate();
  std::vector<CellKey> keys;
  for (const auto& zone : plan.zones)
    for (const auto& month : plan.test_months)
      for (const auto model : plan.models) keys.push_back(CellKey{zone, month, model});

  BacktestResult result;
  result.cells.resize(keys.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < keys.size(); i = next++) {
      result.cells[i] = run_cell(keys[i], data, plan);
    }
  };
  const unsigned jobs = std::clamp<unsigned>(plan.jobs, 1, static_cast<unsigned>(keys.size()));
  {
    std::vector<std::jthread> pool;
    for (unsigned j = 1; j < jobs; ++j) pool.emplace_back(worker);
    worker();
  }

  for (const auto& zone : plan.zones) {
    for (const auto model : plan.models) {
      ZoneSummary s{zone, model};
      for (const auto& cell : result.cells) {
        if (cell.key.zone != zone || cell.key.model != model || !cell.report) continue;
        ++s.months;
        s.qs += cell.report->qs;
        s.interval_score += cell.report->interval_score;
        s.ace += cell.report->ace;
        s.crossovers += static_cast<double>(cell.report->crossovers);
      }
      if (s.months > 0) {
        const double n = static_cast<double>(s.months);
        s.qs /= n;
        s.interval_score /= n;
        s.ace /= n;
        s.crossovers /= n;
      }
      result.summary.push_back(s);
    }
  }
  return result;
}

void write_reports_csv(std::ostream& out, const BacktestResult& result, const QuantileLevels& levels) {
  out << "model,zone,month,qs,ace,interval_score,crossovers";
  const std::size_t half = levels.size() / 2;
  for (std::size_t i = 0; i < half; ++i) {
    const double coverage = levels[half + i] - levels[half - 1 - i];
    out << ",picp_" << std::lround(100.0 * coverage);
  }
  out << '\n';
  for (const auto& cell : result.cells) {
    if (!cell.report) continue;
    const auto& r = *cell.report;
    out << to_string(cell.key.model) << ',' << cell.key.zone << ',' << format_month(cell.key.month)
        << ',' << fmt(r.qs) << ',' << fmt(r.ace) << ',' << fmt(r.interval_score) << ','
        << r.crossovers;
    for (double p : r.picp) out << ',' << fmt(p);
    out << '\n';
  }
}

void write_diagnostics_csv(std::ostream& out, const BacktestResult& result) {
  out << "model,zone,month,status,reason\n";
  for (const auto& cell : result.cells) {
    if (cell.status == CellStatus::ok) continue;
    std::string reason = cell.reason;
    std::replace(reason.begin(), reason.end(), ',', ';');
    out << to_string(cell.key.model) << ',' << cell.key.zone << ',' << format_month(cell.key.month)
        << ',' << to_string(cell.status) << ',' << reason << '\n';
  }
}

void write_summary_table(std::ostream& out, const BacktestResult& result,
                         const std::vector<ModelKind>& models) {
  std::vector<std::string> zones;
  for (const auto& s : result.summary)
    if (std::find(zones.begin(), zones.end(), s.zone) == zones.end()) zones.push_back(s.zone);

  auto lookup = [&](const std::string& zone, ModelKind model) -> const ZoneSummary* {
    for (const auto& s : result.summary)
      if (s.zone == zone && s.model == model) return &s;
    return nullptr;
  };
  const std::pair<const char*, double ZoneSummary::*> blocks[] = {
      {"QS", &ZoneSummary::qs}, {"IS", &ZoneSummary::interval_score}, {"ACE", &ZoneSummary::ace}};
  for (const auto& [name, field] : blocks) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%-6s%-6s", name, "zone");
    out << buf;
    for (auto m : models) {
      std::snprintf(buf, sizeof buf, "%13s", std::string(to_string(m)).c_str());
      out << buf;
    }
    out << '\n';
    for (const auto& zone : zones) {
      std::snprintf(buf, sizeof buf, "%-6s%-6s", "", zone.c_str());
      out << buf;
      for (auto m : models) {
        const ZoneSummary* s = lookup(zone, m);
        if (s == nullptr || s->months == 0) {
          std::snprintf(buf, sizeof buf, "%13s", "-");
        } else {
          std::snprintf(buf, sizeof buf, "%13.4f", s->*field);
        }
        out << buf;
      }
      out << '\n';
    }
  }
}

std::string plan_to_json(const BacktestPlan& plan) {
  nlohmann::json j;
  j["zones"] = plan.zones;
  std::vector<std::string> months;
  for (auto m : plan.test_months) months.push_back(format_month(m));
  j["test_months"] = months;
  j["train_window_months"] = plan.train_window_months;
  j["levels"] = std::vector<double>(plan.levels.begin(), plan.levels.end());
  std::vector<std::string> models;
  for (auto m : plan.models) models.emplace_back(to_string(m));
  j["models"] = models;
  j["seed"] = plan.seed;
  j["hyper"] = {{"iterations", plan.hyper.iterations},
                {"hidden_nodes", plan.hyper.hidden_nodes},
                {"learning_rate", plan.hyper.learning_rate},
                {"alpha", plan.hyper.alpha},
                {"lambda1", plan.hyper.lambda1},
                {"lambda2", plan.hyper.lambda2}};
  j["min_train_rows"] = plan.min_train_rows;
  j["clip_baselines"] = plan.clip_baselines;
  j["negate_interval_score"] = plan.negate_interval_score;
  return j.dump(2) + "\n";
}

}  // namespace qfan
