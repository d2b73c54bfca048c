#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "qfan/backtest.hpp"
#include "qfan/error.hpp"
#include "qfan/features.hpp"
#include "qfan/model_io.hpp"
#include "qfan/synthetic.hpp"

namespace qfan::cli {
namespace {

namespace fs = std::filesystem;
using std::chrono::year_month;

// Raised for problems with the command line itself; maps to exit code 1.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<std::string> split(const std::string& text, char sep = ',') {
  std::vector<std::string> parts;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep)) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t\r");
    if (b != std::string::npos) parts.push_back(item.substr(b, e - b + 1));
  }
  return parts;
}

year_month month_or_throw(const std::string& text) {
  auto m = parse_month(text);
  if (!m) throw UsageError("invalid month '" + text + "' (expected YYYY-MM)");
  return *m;
}

/// Accepts "2013-01,2013-03" and inclusive ranges "2013-01:2013-12".
std::vector<year_month> parse_months(const std::string& text) {
  std::vector<year_month> months;
  for (const auto& part : split(text)) {
    const auto colon = part.find(':');
    if (colon == std::string::npos) {
      months.push_back(month_or_throw(part));
      continue;
    }
    year_month m = month_or_throw(part.substr(0, colon));
    const year_month last = month_or_throw(part.substr(colon + 1));
    if (last < m) throw UsageError("empty month range '" + part + "'");
    for (; m <= last; m += std::chrono::months{1}) months.push_back(m);
  }
  return months;
}

QuantileLevels parse_levels(const std::string& text) {
  if (text.empty()) return default_levels();
  std::vector<double> taus;
  for (const auto& part : split(text)) {
    try {
      std::size_t used = 0;
      taus.push_back(std::stod(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw UsageError("invalid quantile level '" + part + "'");
    }
  }
  return QuantileLevels(std::move(taus));
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  const char* env = std::getenv("QFAN_SEED");
  if (env == nullptr || *env == '\0') return 0;
  try {
    std::size_t used = 0;
    const std::string text(env);
    if (text.front() == '-') throw std::invalid_argument(text);
    const auto value = std::stoull(text, &used, 10);
    if (used != text.size()) throw std::invalid_argument(text);
    return value;
  } catch (const std::exception&) {
    throw UsageError(std::string("QFAN_SEED is not an unsigned integer: '") + env + "'");
  }
}

struct DataOptions {
  std::string path;
  ColumnMap columns;

  void add_to(CLI::App* app, bool required) {
    auto* opt = app->add_option("--data", path, "Input CSV with a header row");
    if (required) opt->required();
    app->add_option("--col-timestamp", columns.timestamp, "Timestamp column name");
    app->add_option("--col-zone", columns.zone, "Zone column name");
    app->add_option("--col-target", columns.target, "Normalized power column name");
    app->add_option("--col-u10", columns.u10, "10 m zonal wind column name");
    app->add_option("--col-v10", columns.v10, "10 m meridional wind column name");
    app->add_option("--col-u100", columns.u100, "100 m zonal wind column name");
    app->add_option("--col-v100", columns.v100, "100 m meridional wind column name");
  }

  IngestResult load() const { return read_dataset_file(path, columns); }
};

void add_hyper_options(CLI::App* app, HyperParams& hp) {
  app->add_option("--iterations", hp.iterations, "Gradient descent iterations");
  app->add_option("--hidden-nodes", hp.hidden_nodes, "Hidden layer width");
  app->add_option("--learning-rate", hp.learning_rate, "Gradient descent step size");
  app->add_option("--alpha", hp.alpha, "Smoothing parameter of the pinball loss");
  app->add_option("--lambda1", hp.lambda1, "Input weight penalty");
  app->add_option("--lambda2", hp.lambda2, "Output weight penalty");
}

/// Rows of one zone, restricted to the inclusive month range when given.
std::vector<RawRecord> select_zone_rows(const TimeSeriesDataset& data, std::string zone,
                                        const std::string& from, const std::string& to) {
  if (zone.empty()) {
    if (data.zones.size() != 1) {
      throw UsageError("--zone is required when the data holds " +
                       std::to_string(data.zones.size()) + " zones");
    }
    zone = data.zones.front().zone;
  }
  const ZoneSeries* series = data.find(zone);
  if (series == nullptr) throw DataError("zone '" + zone + "' not present in data");
  const Timestamp begin = from.empty() ? Timestamp::min() : month_start(month_or_throw(from));
  const Timestamp end = to.empty() ? Timestamp::max()
                                   : month_start(month_or_throw(to) + std::chrono::months{1});
  std::vector<RawRecord> rows;
  for (const auto& r : series->records)
    if (r.timestamp >= begin && r.timestamp < end) rows.push_back(r);
  if (rows.empty()) throw DataError("no records for zone '" + zone + "' in the requested range");
  return rows;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  return out;
}

/// Writes to `path`, or to `fallback` when the path is "-".
template <class Fn>
void emit(const std::string& path, std::ostream& fallback, Fn&& write) {
  if (path == "-") {
    write(fallback);
    return;
  }
  auto file = open_output(path);
  write(file);
}

// ---------------------------------------------------------------- ingest

struct IngestCmd {
  DataOptions data;
  std::string output;

  void setup(CLI::App* app) {
    data.add_to(app, true);
    app->add_option("--output", output, "Write the validated records in the default layout");
  }

  int run(std::ostream& out) const {
    const IngestResult r = data.load();
    out << "records " << r.dataset.record_count() << "\n";
    out << "zones " << r.dataset.zones.size() << "\n";
    for (const auto& z : r.dataset.zones) {
      out << "  zone " << z.zone << ": " << z.records.size() << " rows, "
          << format_timestamp(z.records.front().timestamp) << " .. "
          << format_timestamp(z.records.back().timestamp) << "\n";
    }
    out << "missing power " << r.missing_power << "\n";
    out << "gaps " << r.gaps.size() << "\n";
    for (const auto& g : r.gaps) {
      out << "  zone " << g.zone << ": " << format_timestamp(g.after) << " -> "
          << format_timestamp(g.before) << ", ";
      if (g.missing_hours < 0) {
        out << "non-hourly spacing\n";
      } else {
        out << g.missing_hours << " missing hour" << (g.missing_hours == 1 ? "" : "s") << "\n";
      }
    }
    if (!output.empty()) emit(output, out, [&](std::ostream& o) { write_dataset(o, r.dataset); });
    return kSuccess;
  }
};

// ------------------------------------------------------------- synthetic

struct SyntheticCmd {
  std::string output;
  std::optional<std::uint64_t> seed;
  std::string zones = "1";
  std::string start = "2013-01";
  std::size_t hours = 2160;

  void setup(CLI::App* app) {
    app->add_option("--output", output, "Destination CSV ('-' for stdout)")->required();
    app->add_option("--seed", seed, "Random seed (falls back to QFAN_SEED, then 0)");
    app->add_option("--zones", zones, "Comma-separated zone identifiers");
    app->add_option("--start", start, "First month, YYYY-MM");
    app->add_option("--hours", hours, "Hourly rows per zone")->check(CLI::PositiveNumber);
  }

  int run(std::ostream& out) const {
    SyntheticOptions opt;
    opt.seed = resolve_seed(seed);
    opt.zones = split(zones);
    if (opt.zones.empty()) throw UsageError("--zones is empty");
    opt.start = month_or_throw(start);
    opt.hours = hours;
    const auto data = make_synthetic_dataset(opt);
    emit(output, out, [&](std::ostream& o) { write_dataset(o, data); });
    return kSuccess;
  }
};

// ----------------------------------------------------------------- train

struct TrainCmd {
  DataOptions data;
  std::string zone, from, to, output, levels;
  std::string model = "spnn-w";
  std::optional<std::uint64_t> seed;
  HyperParams hyper;

  void setup(CLI::App* app) {
    data.add_to(app, true);
    app->add_option("--zone", zone, "Zone to train on (optional for single-zone data)");
    app->add_option("--from", from, "First training month, YYYY-MM (inclusive)");
    app->add_option("--to", to, "Last training month, YYYY-MM (inclusive)");
    app->add_option("--model", model, "spnn-w, spnn-wo or mqr");
    app->add_option("--levels", levels, "Comma-separated quantile levels (default 0.05..0.95)");
    app->add_option("--output", output, "Model file to write")->required();
    app->add_option("--seed", seed, "Random seed (falls back to QFAN_SEED, then 0)");
    add_hyper_options(app, hyper);
  }

  int run(std::ostream& out) const {
    const auto kind = parse_model_kind(model);
    if (!kind || (*kind != ModelKind::spnn_w && *kind != ModelKind::spnn_wo && *kind != ModelKind::mqr)) {
      throw UsageError("--model must be spnn-w, spnn-wo or mqr, got '" + model + "'");
    }
    HyperParams hp = hyper;
    hp.seed = resolve_seed(seed);
    hp.validate();
    const QuantileLevels lv = parse_levels(levels);

    const auto ingest = data.load();
    std::vector<RawRecord> observed;
    std::vector<double> y;
    for (auto& r : select_zone_rows(ingest.dataset, zone, from, to)) {
      if (!r.power) continue;
      y.push_back(*r.power);
      observed.push_back(std::move(r));
    }
    if (observed.size() < 2) throw DataError("fewer than two observed training rows");

    const FeatureMatrix raw = derive_features(observed);
    const Standardizer standardizer = fit_standardizer(raw);
    const Matrix x = apply_standardizer(raw.values, standardizer);

    ModelFile file{SpnnModel{}, standardizer};
    if (*kind == ModelKind::mqr) {
      file.model = train_mqr(x, y, lv, hp);
    } else {
      SpnnModel init = *kind == ModelKind::spnn_w ? init_noncrossing(x.cols(), x, hp, lv)
                                                  : init_random(x.cols(), hp, lv);
      auto result = train(std::move(init), x, y);
      out << "initial objective " << result.loss_trace.front() << "\n";
      out << "final objective " << result.loss_trace.back() << "\n";
      file.model = std::move(result.model);
    }
    save_model_file(file, output);
    out << "trained " << model << " on " << observed.size() << " rows; wrote " << output << "\n";
    return kSuccess;
  }
};

// -------------------------------------------------------------- forecast

/// Features CSV: a `timestamp` column followed by the raw feature columns.
struct FeatureTable {
  std::vector<Timestamp> times;
  Matrix values;
};

FeatureTable read_feature_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open features file '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw DataError("no records");
  const auto header = split(line);
  if (header.empty() || header.front() != "timestamp") {
    throw DataError("features file must start with a 'timestamp' column");
  }
  const std::size_t width = header.size() - 1;
  FeatureTable table;
  std::vector<double> flat;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split(line);
    if (cells.size() != header.size()) {
      throw DataError("line " + std::to_string(line_no) + ": expected " +
                      std::to_string(header.size()) + " fields, got " + std::to_string(cells.size()));
    }
    const auto ts = parse_timestamp(cells.front());
    if (!ts) throw DataError("line " + std::to_string(line_no) + ": bad timestamp '" + cells.front() + "'");
    table.times.push_back(*ts);
    for (std::size_t k = 1; k < cells.size(); ++k) {
      char* end = nullptr;
      const double v = std::strtod(cells[k].c_str(), &end);
      if (end == cells[k].c_str() || *end != '\0' || !std::isfinite(v)) {
        throw DataError("line " + std::to_string(line_no) + ": bad value '" + cells[k] + "'");
      }
      flat.push_back(v);
    }
  }
  if (table.times.empty()) throw DataError("no records");
  table.values = Matrix(table.times.size(), width, std::move(flat));
  return table;
}

struct ForecastCmd {
  std::string model_path, features, zone, from, to, output = "-";
  DataOptions data;

  void setup(CLI::App* app) {
    app->add_option("--model", model_path, "Model file written by train")->required();
    data.add_to(app, false);
    app->add_option("--features", features, "CSV of raw features: timestamp then one column per input");
    app->add_option("--zone", zone, "Zone to forecast when --data is used");
    app->add_option("--from", from, "First month to forecast, YYYY-MM");
    app->add_option("--to", to, "Last month to forecast, YYYY-MM");
    app->add_option("--output", output, "Fan CSV destination ('-' for stdout)");
  }

  int run(std::ostream& out) const {
    if (data.path.empty() == features.empty()) throw UsageError("give exactly one of --data or --features");
    const ModelFile file = load_model_file(model_path);
    FeatureTable table;
    if (!features.empty()) {
      table = read_feature_csv(features);
    } else {
      const auto rows = select_zone_rows(data.load().dataset, zone, from, to);
      for (const auto& r : rows) table.times.push_back(r.timestamp);
      table.values = derive_features(rows).values;
    }
    const std::size_t n_x = file.input_width();
    if (table.values.cols() != n_x) {
      throw DataError("model expects n_x = " + std::to_string(n_x) + " feature columns, got " +
                      std::to_string(table.values.cols()));
    }
    const Matrix x = file.standardizer ? apply_standardizer(table.values, *file.standardizer)
                                       : table.values;
    const QuantileFan fan = predict_fan(file, x);
    emit(output, out, [&](std::ostream& o) { write_fan_csv(o, table.times, fan); });
    return kSuccess;
  }
};

// -------------------------------------------------------------- backtest

struct BacktestCmd {
  DataOptions data;
  std::string zones, months, levels;
  std::string models = "uniform,persistence,climatology,mqr,spnn-w,spnn-wo";
  std::string output_dir = "results";
  std::optional<std::uint64_t> seed;
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
  BacktestPlan plan;

  void setup(CLI::App* app) {
    data.add_to(app, true);
    app->add_option("--zones", zones, "Comma-separated zones (default: every zone in the data)");
    app->add_option("--months", months, "Test months: YYYY-MM list or YYYY-MM:YYYY-MM range")->required();
    app->add_option("--models", models, "Comma-separated model kinds");
    app->add_option("--levels", levels, "Comma-separated quantile levels (default 0.05..0.95)");
    app->add_option("--window", plan.train_window_months, "Training window in months");
    app->add_option("--min-train-rows", plan.min_train_rows, "Skip cells with fewer observed rows");
    app->add_flag("--clip-baselines", plan.clip_baselines, "Clamp baseline quantiles to [0, 1]");
    app->add_flag("--negate-is", plan.negate_interval_score, "Report the interval score negated");
    app->add_flag("--keep-fans", plan.keep_fans, "Write one fan CSV per successful cell");
    app->add_option("--output-dir", output_dir, "Directory for reports.csv, plan.json, diagnostics.csv");
    app->add_option("--seed", seed, "Random seed (falls back to QFAN_SEED, then 0)");
    app->add_option("--jobs", jobs, "Cells run in parallel (default: available cores)")
        ->check(CLI::PositiveNumber);
    add_hyper_options(app, plan.hyper);
  }

  int run(std::ostream& out, std::ostream& err) {
    plan.seed = resolve_seed(seed);
    plan.jobs = jobs;
    plan.levels = parse_levels(levels);
    plan.test_months = parse_months(months);
    plan.models.clear();
    for (const auto& name : split(models)) {
      const auto kind = parse_model_kind(name);
      if (!kind) throw UsageError("unknown model '" + name + "'");
      plan.models.push_back(*kind);
    }
    const auto ingest = data.load();
    plan.zones = split(zones);
    if (plan.zones.empty())
      for (const auto& z : ingest.dataset.zones) plan.zones.push_back(z.zone);
    plan.validate();

    const BacktestResult result = run_plan(plan, ingest.dataset);

    fs::create_directories(output_dir);
    const fs::path dir(output_dir);
    {
      auto f = open_output((dir / "plan.json").string());
      f << plan_to_json(plan);
    }
    {
      auto f = open_output((dir / "reports.csv").string());
      write_reports_csv(f, result, plan.levels);
    }
    {
      auto f = open_output((dir / "diagnostics.csv").string());
      write_diagnostics_csv(f, result);
    }
    if (plan.keep_fans) {
      for (const auto& cell : result.cells) {
        if (!cell.fan) continue;
        const std::string name = "fan_" + cell.key.zone + "_" + format_month(cell.key.month) + "_" +
                                 std::string(to_string(cell.key.model)) + ".csv";
        auto f = open_output((dir / name).string());
        write_fan_csv(f, cell.fan_times, *cell.fan);
      }
    }
    write_summary_table(out, result, plan.models);

    std::size_t skipped = 0, failed = 0;
    for (const auto& cell : result.cells) {
      if (cell.status == CellStatus::ok) continue;
      (cell.status == CellStatus::failed ? failed : skipped) += 1;
      err << to_string(cell.status) << ": " << to_string(cell.key.model) << " zone "
          << cell.key.zone << " " << format_month(cell.key.month) << ": " << cell.reason << "\n";
    }
    out << result.cells.size() << " cells, " << skipped << " skipped, " << failed << " failed\n";
    return failed > 0 ? kNumericFailure : kSuccess;
  }
};

// ---------------------------------------------------------------- config

/// Turns `--config file.json` into ordinary flags placed before the user's
/// own arguments. Options keep their last value, so explicit flags win.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::vector<std::string> rest;
  std::string config_path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw UsageError("--config needs a file name");
      config_path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
    }
  }
  if (config_path.empty() || rest.empty()) return rest;

  std::ifstream in(config_path);
  if (!in) throw UsageError("cannot open config file '" + config_path + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("config file '" + config_path + "': " + e.what());
  }
  if (!doc.is_object()) throw DataError("config file '" + config_path + "' must hold a JSON object");

  std::vector<std::string> injected;
  for (const auto& [key, value] : doc.items()) {
    const std::string flag = "--" + key;
    if (value.is_boolean()) {
      if (value.get<bool>()) injected.push_back(flag);
    } else if (value.is_array()) {
      std::string joined;
      for (const auto& v : value) {
        if (!joined.empty()) joined += ',';
        joined += v.is_string() ? v.get<std::string>() : v.dump();
      }
      injected.insert(injected.end(), {flag, joined});
    } else if (value.is_string()) {
      injected.insert(injected.end(), {flag, value.get<std::string>()});
    } else if (value.is_number()) {
      injected.insert(injected.end(), {flag, value.dump()});
    } else {
      throw DataError("config key '" + key + "' has an unsupported type");
    }
  }
  // The subcommand name stays first.
  rest.insert(rest.begin() + 1, injected.begin(), injected.end());
  return rest;
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multiple-quantile wind power forecasting with smooth pinball networks", "qfan"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);

  IngestCmd ingest;
  SyntheticCmd synthetic;
  TrainCmd train_cmd;
  ForecastCmd forecast;
  BacktestCmd backtest;
  const auto add = [&app](const char* name, const char* help) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", "JSON file whose keys are long option names");
    return sub;
  };
  auto* ingest_app = add("ingest", "Validate a CSV and print a gap report");
  auto* synthetic_app = add("synthetic", "Generate the seeded heteroskedastic fixture");
  auto* train_app = add("train", "Fit one model and serialize it");
  auto* forecast_app = add("forecast", "Emit a quantile fan CSV from a model file");
  auto* backtest_app = add("backtest", "Run the sliding-window evaluation plan");
  ingest.setup(ingest_app);
  synthetic.setup(synthetic_app);
  train_cmd.setup(train_app);
  forecast.setup(forecast_app);
  backtest.setup(backtest_app);

  try {
    const auto args = expand_config(raw_args);
    std::vector<std::string> argv_store{"qfan"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& a : argv_store) argv.push_back(a.data());
    try {
      app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e, out, err);
      return code == 0 ? kSuccess : kUsage;
    }

    if (ingest_app->parsed()) return ingest.run(out);
    if (synthetic_app->parsed()) return synthetic.run(out);
    if (train_app->parsed()) return train_cmd.run(out);
    if (forecast_app->parsed()) return forecast.run(out);
    if (backtest_app->parsed()) return backtest.run(out, err);
    return kUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << "\n";
    return kNumericFailure;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "data error: " << e.what() << "\n";
    return kDataError;
  }
}

}  // namespace qfan::cli
