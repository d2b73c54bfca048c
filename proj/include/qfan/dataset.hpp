#pragma once

#include <chrono>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace qfan {

using Timestamp = std::chrono::sys_seconds;

/// Parses `YYYYMMDD H:MM` (GEFCom layout, one- or two-digit hour) or ISO-8601
/// `YYYY-MM-DD[T ]HH:MM[:SS][Z]`. Returns nullopt on anything else.
std::optional<Timestamp> parse_timestamp(const std::string& text);

/// ISO-8601 UTC, minute resolution: `2013-06-01T00:00Z`.
std::string format_timestamp(Timestamp ts);

/// `YYYY-MM`.
std::optional<std::chrono::year_month> parse_month(const std::string& text);
std::string format_month(std::chrono::year_month ym);
Timestamp month_start(std::chrono::year_month ym);

/// One hourly row of numerical weather prediction inputs and observed power.
struct RawRecord {
  Timestamp timestamp;
  std::string zone;
  double u10 = 0.0;
  double v10 = 0.0;
  double u100 = 0.0;
  double v100 = 0.0;
  std::optional<double> power;  // normalized to [0, 1]; missing allowed
};

/// Records of one zone, strictly increasing in time.
struct ZoneSeries {
  std::string zone;
  std::vector<RawRecord> records;
};

struct TimeSeriesDataset {
  std::vector<ZoneSeries> zones;  // sorted by zone identifier

  const ZoneSeries* find(const std::string& zone) const;
  std::size_t record_count() const;
};

/// Header names for each field; defaults follow the GEFCom2014 wind layout.
struct ColumnMap {
  std::string timestamp = "TIMESTAMP";
  std::string zone = "ZONEID";
  std::string target = "TARGETVAR";
  std::string u10 = "U10";
  std::string v10 = "V10";
  std::string u100 = "U100";
  std::string v100 = "V100";
};

/// A stretch of missing hours, or a step that is not a whole number of hours.
struct Gap {
  std::string zone;
  Timestamp after;
  Timestamp before;
  long missing_hours = 0;  // -1 when the spacing is not hourly
};

struct IngestResult {
  TimeSeriesDataset dataset;
  std::vector<Gap> gaps;
  std::size_t missing_power = 0;
};

/// Reads a CSV with a header row. Throws DataError naming the line for
/// unparseable rows, "no records" for an empty file, and the timestamp for
/// duplicates within a zone. Irregular spacing is reported, not fatal.
IngestResult read_dataset(std::istream& in, const ColumnMap& columns = {});
IngestResult read_dataset_file(const std::string& path, const ColumnMap& columns = {});

/// Writes records back in the default GEFCom layout.
void write_dataset(std::ostream& out, const TimeSeriesDataset& dataset);

}  // namespace qfan
