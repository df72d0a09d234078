#include "drydown/timeseries.hpp"

#include "drydown/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <limits>
#include <sstream>
#include <utility>
#include <vector>

namespace drydown {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) {
    // trim whitespace and CR
    auto begin = field.find_first_not_of(" \t\r");
    auto end = field.find_last_not_of(" \t\r");
    fields.push_back(begin == std::string::npos ? std::string()
                                                : field.substr(begin, end - begin + 1));
  }
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

bool is_missing_token(const std::string& s) {
  return s.empty() || s == "NA" || s == "NaN" || s == "nan";
}

// ISO-8601 date-time (space or 'T' separator, optional seconds, optional 'Z')
// or plain integer epoch seconds.
std::int64_t parse_timestamp(const std::string& s, const std::string& path) {
  int year, month, day, hour, minute, sec = 0;
  char sep;
  int n = std::sscanf(s.c_str(), "%d-%d-%d%c%d:%d:%d", &year, &month, &day, &sep,
                      &hour, &minute, &sec);
  if (n >= 6 && (sep == ' ' || sep == 'T')) {
    std::tm tm{};
    tm.tm_year = year - 1900;
    tm.tm_mon = month - 1;
    tm.tm_mday = day;
    tm.tm_hour = hour;
    tm.tm_min = minute;
    tm.tm_sec = sec;
    return static_cast<std::int64_t>(timegm(&tm));
  }
  try {
    std::size_t pos = 0;
    std::int64_t t = std::stoll(s, &pos);
    if (pos == s.size()) return t;
  } catch (const std::exception&) {
  }
  throw IoError(path + ": unparseable timestamp '" + s + "'");
}

struct RawTable {
  std::int64_t start_time = 0;
  VectorXd values;
  BoolArray missing;
};

RawTable read_regular_grid(const std::string& path, const ColumnMap& columns,
                           std::int64_t step) {
  if (step <= 0) throw ValidationError("step must be positive");
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);

  std::string line;
  if (!std::getline(in, line)) throw IoError(path + ": empty file");
  const auto header = split_csv_line(line);
  std::ptrdiff_t time_col = -1, value_col = -1;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == columns.time) time_col = static_cast<std::ptrdiff_t>(i);
    if (header[i] == columns.value) value_col = static_cast<std::ptrdiff_t>(i);
  }
  if (time_col < 0) throw IoError(path + ": no column '" + columns.time + "'");
  if (value_col < 0) throw IoError(path + ": no column '" + columns.value + "'");

  std::vector<std::pair<std::int64_t, double>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() <= static_cast<std::size_t>(std::max(time_col, value_col))) {
      throw IoError(path + ":" + std::to_string(line_no) + ": too few fields");
    }
    const std::int64_t t = parse_timestamp(fields[time_col], path);
    const std::string& v = fields[value_col];
    double value = kNaN;
    if (!is_missing_token(v)) {
      try {
        value = std::stod(v);
      } catch (const std::exception&) {
        throw IoError(path + ":" + std::to_string(line_no) + ": bad value '" + v + "'");
      }
    }
    rows.emplace_back(t, value);
  }
  if (rows.empty()) throw ValidationError(path + ": no data rows");

  std::stable_sort(rows.begin(), rows.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  const std::int64_t t0 = rows.front().first;
  const std::int64_t span = rows.back().first - t0;
  const Eigen::Index n = static_cast<Eigen::Index>(span / step) + 1;

  RawTable table;
  table.start_time = t0;
  table.values = VectorXd::Constant(n, kNaN);
  table.missing = BoolArray::Constant(n, true);
  Eigen::Index prev_slot = -1;
  for (const auto& [t, v] : rows) {
    const std::int64_t offset = t - t0;
    if (offset % step != 0) {
      throw ValidationError(path + ": timestamp " + std::to_string(t) +
                            " is off the " + std::to_string(step) + "s grid");
    }
    const Eigen::Index slot = static_cast<Eigen::Index>(offset / step);
    if (slot == prev_slot) {
      throw ValidationError(path + ": duplicate timestamp " + std::to_string(t));
    }
    prev_slot = slot;
    table.values[slot] = v;
    table.missing[slot] = !std::isfinite(v);
  }
  return table;
}

}  // namespace

SoilSeries ingest_soil_csv(const std::string& path, const ColumnMap& columns,
                           std::int64_t step_seconds) {
  RawTable table = read_regular_grid(path, columns, step_seconds);
  SoilSeries series;
  series.start_time = table.start_time;
  series.step = step_seconds;
  series.values = std::move(table.values);
  series.interpolated = BoolArray::Constant(series.values.size(), false);
  series.source_id = path;
  return series;
}

PrecipSeries ingest_precip_csv(const std::string& path, const ColumnMap& columns,
                               std::int64_t step_seconds) {
  RawTable table = read_regular_grid(path, columns, step_seconds);
  for (Eigen::Index i = 0; i < table.values.size(); ++i) {
    if (!table.missing[i] && table.values[i] < 0.0) {
      throw ValidationError(path + ": negative rainfall depth at index " +
                            std::to_string(i));
    }
  }
  PrecipSeries series;
  series.start_time = table.start_time;
  series.step = step_seconds;
  series.depths = std::move(table.values);
  series.missing = std::move(table.missing);
  return series;
}

SoilSeries subsample(const SoilSeries& series, int factor) {
  if (factor < 1) throw ValidationError("subsample factor must be >= 1");
  if (factor == 1) return series;
  const Eigen::Index n = (series.size() + factor - 1) / factor;
  SoilSeries out;
  out.start_time = series.start_time;
  out.step = series.step * factor;
  out.values.resize(n);
  out.interpolated.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out.values[i] = series.values[i * factor];
    out.interpolated[i] = series.interpolated[i * factor];
  }
  out.source_id = series.source_id;
  return out;
}

SoilSeries interpolate_gaps(const SoilSeries& series, int max_gap) {
  const Eigen::Index n = series.size();
  Eigen::Index n_present = 0;
  for (Eigen::Index i = 0; i < n; ++i) n_present += std::isfinite(series.values[i]) ? 1 : 0;
  if (n_present < 2) throw ValidationError("need at least 2 observed points to interpolate");

  SoilSeries out = series;
  std::vector<std::pair<Eigen::Index, Eigen::Index>> bad_spans;
  Eigen::Index i = 0;
  while (i < n) {
    if (std::isfinite(out.values[i])) {
      ++i;
      continue;
    }
    Eigen::Index j = i;
    while (j < n && !std::isfinite(out.values[j])) ++j;
    const Eigen::Index run = j - i;
    if (i == 0 || j == n || run > max_gap) {
      bad_spans.emplace_back(i, j - 1);
    } else {
      const double lo = out.values[i - 1];
      const double hi = out.values[j];
      for (Eigen::Index k = i; k < j; ++k) {
        const double w = static_cast<double>(k - i + 1) / static_cast<double>(run + 1);
        out.values[k] = lo + w * (hi - lo);
        out.interpolated[k] = true;
      }
    }
    i = j;
  }
  if (!bad_spans.empty()) {
    std::string msg = "unfillable gaps (max_gap=" + std::to_string(max_gap) + "):";
    for (const auto& [a, b] : bad_spans) {
      msg += " [" + std::to_string(a) + "," + std::to_string(b) + "]";
    }
    throw ValidationError(msg);
  }
  return out;
}

CapResult cap_values(const SoilSeries& series, double cap) {
  if (!(cap > 0.0)) throw ValidationError("cap must be > 0");
  CapResult result{series, 0};
  for (Eigen::Index i = 0; i < result.series.size(); ++i) {
    if (result.series.values[i] > cap) {
      result.series.values[i] = cap;
      ++result.n_capped;
    }
  }
  return result;
}

}  // namespace drydown
