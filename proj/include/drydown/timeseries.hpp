#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <string>

namespace drydown {

using Eigen::VectorXd;
using BoolArray = Eigen::Array<bool, Eigen::Dynamic, 1>;

// Soil volumetric water content on a regular time grid. Missing points are
// NaN until interpolate_gaps fills them; `interpolated` marks every filled
// point. Immutable after construction by convention: every operation returns
// a new series.
struct SoilSeries {
  std::int64_t start_time = 0;  // epoch seconds, UTC
  std::int64_t step = 3600;     // seconds, > 0
  VectorXd values;              // volumetric water content fractions
  BoolArray interpolated;       // same length as values
  std::string source_id;

  Eigen::Index size() const { return values.size(); }
  std::int64_t time_at(Eigen::Index i) const { return start_time + step * i; }
};

// Rainfall depth per step (mm). Missing observations keep NaN depths and are
// flagged in `missing`; they are never interpolated.
struct PrecipSeries {
  std::int64_t start_time = 0;
  std::int64_t step = 3600;
  VectorXd depths;
  BoolArray missing;

  Eigen::Index size() const { return depths.size(); }
  std::int64_t time_at(Eigen::Index i) const { return start_time + step * i; }
};

// Names of the timestamp and value columns in an input CSV.
struct ColumnMap {
  std::string time = "time";
  std::string value = "value";
};

// Reads a headered CSV onto a regular grid at `step_seconds`. Timestamps may
// be ISO-8601 ("2018-06-01 12:30:00", "T" separator and trailing "Z" accepted)
// or integer epoch seconds. Rows are sorted by time; duplicate timestamps and
// rows off the step grid are errors. Grid slots with no row become missing
// (NaN) points. Empty cells, "NA", "NaN" and "nan" are missing values.
SoilSeries ingest_soil_csv(const std::string& path, const ColumnMap& columns,
                           std::int64_t step_seconds);
PrecipSeries ingest_precip_csv(const std::string& path, const ColumnMap& columns,
                               std::int64_t step_seconds);

// Keeps every factor-th point starting at index 0; step is multiplied.
SoilSeries subsample(const SoilSeries& series, int factor);

// Fills NaN runs of length <= max_gap linearly between the bracketing
// observations and flags them. Longer runs, and leading or trailing missing
// values, raise ValidationError listing the offending spans.
SoilSeries interpolate_gaps(const SoilSeries& series, int max_gap = 6);

struct CapResult {
  SoilSeries series;
  Eigen::Index n_capped = 0;
};

// Replaces values above `cap` by cap (cap must be > 0).
CapResult cap_values(const SoilSeries& series, double cap);

}  // namespace drydown
