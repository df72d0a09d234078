#include "drydown/penalty.hpp"

#include "drydown/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace drydown {

AnnotationSet annotations_from_precip(const PrecipSeries& precip, Eigen::Index region_len,
                                      double low_thresh, double high_thresh) {
  if (region_len < 1) throw ValidationError("region_len must be >= 1");
  if (!(low_thresh > 0.0) || !(high_thresh > 0.0) || low_thresh > high_thresh) {
    throw ValidationError("thresholds must satisfy 0 < low <= high");
  }
  AnnotationSet annotations;
  const Eigen::Index n = precip.size();
  for (Eigen::Index start = 0; start + region_len <= n; start += region_len) {
    const Eigen::Index end = start + region_len;
    bool has_missing = false;
    int count_low = 0, count_high = 0;
    for (Eigen::Index i = start; i < end; ++i) {
      if (precip.missing[i]) {
        has_missing = true;
        break;
      }
      if (precip.depths[i] > low_thresh) ++count_low;
      if (precip.depths[i] > high_thresh) ++count_high;
    }
    if (has_missing) continue;
    annotations.regions.push_back({start, end, {count_high, count_low}});
  }
  return annotations;
}

int annotation_loss(const std::vector<Eigen::Index>& changepoints,
                    const AnnotationSet& annotations) {
  int loss = 0;
  for (const AnnotationRegion& region : annotations.regions) {
    const auto lo = std::lower_bound(changepoints.begin(), changepoints.end(), region.start);
    const auto hi = std::lower_bound(changepoints.begin(), changepoints.end(), region.end);
    const int count = static_cast<int>(hi - lo);
    if (!region.allowed.contains(count)) ++loss;
  }
  return loss;
}

std::vector<Eigen::Index> expert_changepoints(const PrecipSeries& precip,
                                              const SoilSeries& soil, double threshold,
                                              Eigen::Index min_seg_len) {
  if (precip.step != soil.step) {
    throw ValidationError("precipitation and soil series must share the same step");
  }
  const std::int64_t shift = precip.start_time - soil.start_time;
  if (shift % soil.step != 0) {
    throw ValidationError("precipitation grid is not aligned with the soil series");
  }
  const auto offset = static_cast<Eigen::Index>(shift / soil.step);
  const Eigen::Index n = soil.size();

  std::vector<Eigen::Index> instants;
  for (Eigen::Index j = 0; j < precip.size(); ++j) {
    if (precip.missing[j] || !(precip.depths[j] > threshold)) continue;
    const Eigen::Index tau = j + offset;
    if (tau < min_seg_len || tau > n - min_seg_len) continue;
    if (!instants.empty() && tau - instants.back() < min_seg_len) continue;
    instants.push_back(tau);
  }
  return instants;
}

std::vector<double> default_lambda_grid(Eigen::Index n, int count) {
  if (n < 2) throw ValidationError("series too short for a penalty grid");
  if (count < 2) throw ValidationError("grid needs at least 2 points");
  const double bic = 3.0 * std::log(static_cast<double>(n));
  std::vector<double> grid(count);
  for (int i = 0; i < count; ++i) {
    const double exponent = -1.0 + 2.0 * static_cast<double>(i) / (count - 1);
    grid[i] = bic * std::pow(10.0, exponent);
  }
  return grid;
}

PenaltySweepResult sweep_penalty(const SoilSeries& series, const PeltConfig& base,
                                 const std::vector<double>& lambdas,
                                 const AnnotationSet* annotations,
                                 const std::vector<Eigen::Index>* expert) {
  if (lambdas.empty()) throw ValidationError("empty penalty grid");
  std::vector<double> grid = lambdas;
  std::sort(grid.begin(), grid.end());

  // One cache for the whole sweep: the fit configuration is shared, lambda
  // enters only the DP.
  CostCache cache(series, effective_fit_config(base), true, base.warm_start);

  PenaltySweepResult result;
  for (const double lambda : grid) {
    PeltConfig config = base;
    config.penalty = lambda;
    const Segmentation segmentation = detect(series, config, cache);

    SweepPoint point;
    point.lambda = lambda;
    point.changepoints = segmentation.changepoints;
    point.n_changepoints = static_cast<int>(segmentation.changepoints.size());
    point.optimal_cost = segmentation.total_cost;
    if (annotations != nullptr) {
      point.annotation_loss = annotation_loss(segmentation.changepoints, *annotations);
    }
    if (expert != nullptr) {
      const Segmentation at_expert = refit(series, *expert, config, cache);
      point.expert_cost = at_expert.total_cost;
      point.excess_risk = at_expert.total_cost - segmentation.total_cost;
    } else {
      point.excess_risk = std::numeric_limits<double>::quiet_NaN();
    }
    result.points.push_back(std::move(point));
  }

  for (std::size_t i = 0; i + 1 < result.points.size(); ++i) {
    if (result.points[i + 1].n_changepoints > result.points[i].n_changepoints) {
      result.warnings.push_back(
          "changepoint count increased from lambda=" + std::to_string(result.points[i].lambda) +
          " to lambda=" + std::to_string(result.points[i + 1].lambda));
    }
  }
  return result;
}

std::vector<double> excess_risk(const SoilSeries& series,
                                const std::vector<Eigen::Index>& expert_cpts,
                                const std::vector<double>& lambdas, const PeltConfig& base) {
  const PenaltySweepResult sweep = sweep_penalty(series, base, lambdas, nullptr, &expert_cpts);
  std::vector<double> risks;
  risks.reserve(sweep.points.size());
  for (const SweepPoint& point : sweep.points) risks.push_back(point.excess_risk);
  return risks;
}

}  // namespace drydown
