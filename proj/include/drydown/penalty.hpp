#pragma once

#include "drydown/pelt.hpp"
#include "drydown/timeseries.hpp"

#include <string>
#include <vector>

namespace drydown {

struct CountRange {
  int lo = 0;
  int hi = 0;
  bool contains(int count) const { return count >= lo && count <= hi; }
};

// Half-open index range on the series axis with the allowed number of
// changepoints inside it.
struct AnnotationRegion {
  Eigen::Index start = 0;
  Eigen::Index end = 0;
  CountRange allowed;
};

struct AnnotationSet {
  std::vector<AnnotationRegion> regions;
};

// Splits the axis into consecutive regions of region_len steps (a partial
// tail is dropped), discards regions overlapping missing precipitation, and
// derives each region's allowed count range by thresholding: the high
// threshold gives the lower count, the low threshold the higher one.
AnnotationSet annotations_from_precip(const PrecipSeries& precip, Eigen::Index region_len,
                                      double low_thresh, double high_thresh);

// Number of regions whose detected-changepoint count falls outside the
// allowed set.
int annotation_loss(const std::vector<Eigen::Index>& changepoints,
                    const AnnotationSet& annotations);

// Rain instants above `threshold`, mapped onto the soil series' index grid
// (the two series must share step and grid alignment). Instants within
// min_seg_len of each other or of the series boundaries are thinned (first
// one wins) since a refit cannot honor them.
std::vector<Eigen::Index> expert_changepoints(const PrecipSeries& precip,
                                              const SoilSeries& soil, double threshold,
                                              Eigen::Index min_seg_len);

// 20 log-spaced penalties spanning [0.1, 10] x BIC with BIC = 3 log n.
std::vector<double> default_lambda_grid(Eigen::Index n, int count = 20);

struct SweepPoint {
  double lambda = 0.0;
  int n_changepoints = 0;
  int annotation_loss = -1;      // -1 when no annotations supplied
  double excess_risk = 0.0;      // NaN when no expert changepoints supplied
  double optimal_cost = 0.0;     // R(lambda; Y, tau(lambda))
  double expert_cost = 0.0;      // R(lambda; Y, tau_xpt)
  std::vector<Eigen::Index> changepoints;
};

struct PenaltySweepResult {
  std::vector<SweepPoint> points;  // ascending lambda
  std::vector<std::string> warnings;
};

// Runs detect over the grid with a shared cost cache, scoring each penalty
// against the annotations and/or expert changepoints when given. Changepoint
// counts are checked to be non-increasing in lambda; violations are
// reported as warnings.
PenaltySweepResult sweep_penalty(const SoilSeries& series, const PeltConfig& base,
                                 const std::vector<double>& lambdas,
                                 const AnnotationSet* annotations = nullptr,
                                 const std::vector<Eigen::Index>* expert = nullptr);

// Excess penalized risk R(lambda; Y, expert) - R(lambda; Y, tau(lambda)) on
// the grid; non-negative up to fit noise by DP optimality.
std::vector<double> excess_risk(const SoilSeries& series,
                                const std::vector<Eigen::Index>& expert_cpts,
                                const std::vector<double>& lambdas, const PeltConfig& base);

}  // namespace drydown
