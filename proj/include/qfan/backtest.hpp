#pragma once

#include <chrono>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qfan/dataset.hpp"
#include "qfan/metrics.hpp"
#include "qfan/network.hpp"
#include "qfan/quantiles.hpp"

namespace qfan {

enum class ModelKind { uniform, persistence, climatology, mqr, spnn_w, spnn_wo };

std::string_view to_string(ModelKind kind);
std::optional<ModelKind> parse_model_kind(std::string_view name);

/// The 18 levels 0.05, 0.10, ..., 0.45, 0.55, ..., 0.95. Pairing tau with
/// 1 - tau gives central intervals of nominal coverage 10%, 20%, ..., 90%.
QuantileLevels default_levels();

struct BacktestPlan {
  std::vector<std::string> zones;
  std::vector<std::chrono::year_month> test_months;
  int train_window_months = 2;
  QuantileLevels levels = default_levels();
  std::vector<ModelKind> models;
  std::uint64_t seed = 0;
  /// Network and MQR settings; the seed field is replaced per cell.
  HyperParams hyper;
  /// Minimum observed training rows before a cell is attempted.
  std::size_t min_train_rows = 48;
  bool clip_baselines = false;
  bool negate_interval_score = false;
  bool keep_fans = false;
  unsigned jobs = 1;

  void validate() const;
};

struct CellKey {
  std::string zone;
  std::chrono::year_month month;
  ModelKind model;
};

enum class CellStatus { ok, skipped, failed };
std::string_view to_string(CellStatus status);

struct CellResult {
  CellKey key;
  CellStatus status = CellStatus::ok;
  std::string reason;
  std::optional<EvaluationReport> report;
  std::optional<QuantileFan> fan;
  std::vector<Timestamp> fan_times;
};

/// Mean scores of one model in one zone over its successful months.
struct ZoneSummary {
  std::string zone;
  ModelKind model;
  std::size_t months = 0;
  double qs = 0.0;
  double interval_score = 0.0;
  double ace = 0.0;
  double crossovers = 0.0;
};

struct BacktestResult {
  std::vector<CellResult> cells;  // plan order: zone, month, model
  std::vector<ZoneSummary> summary;

  bool all_ok() const;
};

/// Seed for the cell (zone, month), shared by every model kind in that cell so
/// the two network variants start from the same input weights.
std::uint64_t cell_seed(std::uint64_t plan_seed, const std::string& zone,
                        std::chrono::year_month month);

/// Fits one forecaster on the training rows (rows without power are dropped)
/// and forecasts every test row. Features are standardized with statistics of
/// the training rows only. Persistence uses the observations in the 24 hours
/// before `boundary`.
QuantileFan fit_and_forecast(ModelKind kind, std::span<const RawRecord> train_rows,
                             std::span<const RawRecord> test_rows, Timestamp boundary,
                             const QuantileLevels& levels, const HyperParams& hyper,
                             bool clip_baselines = false);

/// Trains on the window of months before key.month, forecasts every hour of
/// key.month, and scores against the observed power. Uses only rows strictly
/// before the month for fitting.
CellResult run_cell(const CellKey& key, const TimeSeriesDataset& data, const BacktestPlan& plan);

/// Runs every (zone, month, model) cell on plan.jobs threads; failures are
/// recorded per cell and never abort the others.
BacktestResult run_plan(const BacktestPlan& plan, const TimeSeriesDataset& data);

/// Header `model,zone,month,qs,ace,interval_score,crossovers,picp_10,...`,
/// one row per successful cell.
void write_reports_csv(std::ostream& out, const BacktestResult& result, const QuantileLevels& levels);

/// `model,zone,month,status,reason` for cells that did not complete.
void write_diagnostics_csv(std::ostream& out, const BacktestResult& result);

/// Zones as rows, models as columns, one block each for QS, IS and ACE.
void write_summary_table(std::ostream& out, const BacktestResult& result,
                         const std::vector<ModelKind>& models);

std::string plan_to_json(const BacktestPlan& plan);

}  // namespace qfan
