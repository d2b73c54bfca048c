#include "qfan/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>

#include "qfan/error.hpp"

namespace qfan {

using namespace std::chrono;

namespace {

bool parse_int(std::string_view s, int& out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::optional<Timestamp> make_timestamp(int y, int mo, int d, int h, int mi, int s) {
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)},
                           day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h < 0 || h > 23 || mi < 0 || mi > 59 || s < 0 || s > 60) return std::nullopt;
  return sys_days{ymd} + hours{h} + minutes{mi} + seconds{s};
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '"')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '"' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    const std::string_view field(line.data() + start,
                                 (comma == std::string::npos ? line.size() : comma) - start);
    out.emplace_back(trim(field));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::optional<double> parse_double(const std::string& s) {
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

bool is_missing(const std::string& s) {
  return s.empty() || s == "NA" || s == "NaN" || s == "nan" || s == "null";
}

// Numeric zone identifiers sort numerically ("2" before "10").
bool zone_less(const std::string& a, const std::string& b) {
  int ia = 0, ib = 0;
  if (parse_int(a, ia) && parse_int(b, ib)) return ia < ib;
  return a < b;
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::optional<Timestamp> parse_timestamp(const std::string& raw) {
  const std::string_view text = trim(raw);
  // GEFCom: YYYYMMDD H:MM
  if (text.size() >= 12 && text[8] == ' ' && text.find('-') == std::string_view::npos) {
    int y = 0, mo = 0, d = 0, h = 0, mi = 0;
    const auto colon = text.find(':', 9);
    if (colon == std::string_view::npos) return std::nullopt;
    if (!parse_int(text.substr(0, 4), y) || !parse_int(text.substr(4, 2), mo) ||
        !parse_int(text.substr(6, 2), d) || !parse_int(text.substr(9, colon - 9), h) ||
        !parse_int(text.substr(colon + 1), mi)) {
      return std::nullopt;
    }
    return make_timestamp(y, mo, d, h, mi, 0);
  }
  // ISO-8601: YYYY-MM-DD[T ]HH:MM[:SS][Z]
  std::string_view s = text;
  if (!s.empty() && s.back() == 'Z') s.remove_suffix(1);
  if (s.size() != 16 && s.size() != 19) return std::nullopt;
  if (s[4] != '-' || s[7] != '-' || (s[10] != 'T' && s[10] != ' ') || s[13] != ':') {
    return std::nullopt;
  }
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, sec = 0;
  if (!parse_int(s.substr(0, 4), y) || !parse_int(s.substr(5, 2), mo) ||
      !parse_int(s.substr(8, 2), d) || !parse_int(s.substr(11, 2), h) ||
      !parse_int(s.substr(14, 2), mi)) {
    return std::nullopt;
  }
  if (s.size() == 19 && (s[16] != ':' || !parse_int(s.substr(17, 2), sec))) return std::nullopt;
  return make_timestamp(y, mo, d, h, mi, sec);
}

std::string format_timestamp(Timestamp ts) {
  const auto day_point = floor<days>(ts);
  const year_month_day ymd{day_point};
  const hh_mm_ss hms{ts - day_point};
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02ld:%02ldZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<long>(hms.hours().count()), static_cast<long>(hms.minutes().count()));
  return buf;
}

std::optional<year_month> parse_month(const std::string& raw) {
  const std::string_view s = trim(raw);
  int y = 0, m = 0;
  if (s.size() != 7 || s[4] != '-' || !parse_int(s.substr(0, 4), y) ||
      !parse_int(s.substr(5, 2), m)) {
    return std::nullopt;
  }
  const year_month ym{year{y}, month{static_cast<unsigned>(m)}};
  if (!ym.ok()) return std::nullopt;
  return ym;
}

std::string format_month(year_month ym) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u", static_cast<int>(ym.year()),
                static_cast<unsigned>(ym.month()));
  return buf;
}

Timestamp month_start(year_month ym) { return sys_days{ym / 1}; }

const ZoneSeries* TimeSeriesDataset::find(const std::string& zone) const {
  for (const auto& z : zones)
    if (z.zone == zone) return &z;
  return nullptr;
}

std::size_t TimeSeriesDataset::record_count() const {
  std::size_t n = 0;
  for (const auto& z : zones) n += z.records.size();
  return n;
}

IngestResult read_dataset(std::istream& in, const ColumnMap& columns) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) {
      header = split_csv(line);
      break;
    }
  }
  if (header.empty()) throw DataError("no records");

  auto column_index = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw DataError("missing column '" + name + "' in header");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t i_ts = column_index(columns.timestamp);
  const std::size_t i_zone = column_index(columns.zone);
  const std::size_t i_target = column_index(columns.target);
  const std::size_t i_u10 = column_index(columns.u10);
  const std::size_t i_v10 = column_index(columns.v10);
  const std::size_t i_u100 = column_index(columns.u100);
  const std::size_t i_v100 = column_index(columns.v100);

  IngestResult result;
  std::map<std::string, std::vector<RawRecord>, decltype(&zone_less)> by_zone(&zone_less);
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv(line);
    const std::string where = "line " + std::to_string(line_no);
    if (fields.size() != header.size()) {
      throw DataError(where + ": expected " + std::to_string(header.size()) + " fields, got " +
                      std::to_string(fields.size()));
    }
    RawRecord rec;
    const auto ts = parse_timestamp(fields[i_ts]);
    if (!ts) throw DataError(where + ": unparseable timestamp '" + fields[i_ts] + "'");
    rec.timestamp = *ts;
    rec.zone = fields[i_zone];
    if (rec.zone.empty()) throw DataError(where + ": empty zone identifier");

    const std::pair<std::size_t, double*> winds[] = {
        {i_u10, &rec.u10}, {i_v10, &rec.v10}, {i_u100, &rec.u100}, {i_v100, &rec.v100}};
    for (const auto& [idx, dst] : winds) {
      const auto v = parse_double(fields[idx]);
      if (!v) {
        throw DataError(where + ": missing or invalid wind component '" + header[idx] + "' at " +
                        format_timestamp(rec.timestamp));
      }
      *dst = *v;
    }
    if (is_missing(fields[i_target])) {
      ++result.missing_power;
    } else {
      const auto p = parse_double(fields[i_target]);
      if (!p) throw DataError(where + ": invalid target value '" + fields[i_target] + "'");
      if (*p < 0.0 || *p > 1.0) {
        throw DataError(where + ": target " + fields[i_target] + " outside normalized [0, 1]");
      }
      rec.power = *p;
    }
    by_zone[rec.zone].push_back(std::move(rec));
  }
  if (by_zone.empty()) throw DataError("no records");

  for (auto& [zone, records] : by_zone) {
    std::stable_sort(records.begin(), records.end(),
                     [](const RawRecord& a, const RawRecord& b) { return a.timestamp < b.timestamp; });
    for (std::size_t i = 1; i < records.size(); ++i) {
      const auto step = records[i].timestamp - records[i - 1].timestamp;
      if (step == seconds{0}) {
        throw DataError("zone " + zone + ": duplicated timestamp " +
                        format_timestamp(records[i].timestamp));
      }
      if (step != hours{1}) {
        const bool whole_hours = step % hours{1} == seconds{0};
        result.gaps.push_back(Gap{zone, records[i - 1].timestamp, records[i].timestamp,
                                  whole_hours ? static_cast<long>(duration_cast<hours>(step).count() - 1) : -1});
      }
    }
    result.dataset.zones.push_back(ZoneSeries{zone, std::move(records)});
  }
  return result;
}

IngestResult read_dataset_file(const std::string& path, const ColumnMap& columns) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open data file '" + path + "'");
  return read_dataset(in, columns);
}

void write_dataset(std::ostream& out, const TimeSeriesDataset& dataset) {
  out << "ZONEID,TIMESTAMP,TARGETVAR,U10,V10,U100,V100\n";
  for (const auto& zone : dataset.zones) {
    for (const auto& r : zone.records) {
      out << r.zone << ',' << format_timestamp(r.timestamp) << ','
          << (r.power ? format_number(*r.power) : std::string()) << ',' << format_number(r.u10)
          << ',' << format_number(r.v10) << ',' << format_number(r.u100) << ','
          << format_number(r.v100) << '\n';
    }
  }
}

}  // namespace qfan
