#pragma once

#include "drydown/pelt.hpp"
#include "drydown/simulation.hpp"

#include <utility>
#include <vector>

namespace drydown {

// True/false positive rates under exact matching and under the relaxed
// window |detected - true| < window. fp rates are per non-changepoint
// position, i.e. unmatched detections / (n - #true).
struct MatchReport {
  double tp_exact = 0.0;
  double fp_exact = 0.0;
  double tp_window = 0.0;
  double fp_window = 0.0;
  std::vector<std::pair<Eigen::Index, Eigen::Index>> matched;  // (true, detected), window rule
  int window = 10;
};

// Greedy nearest-first matching without replacement; each true changepoint
// matches at most one detection.
MatchReport match_rates(const std::vector<Eigen::Index>& truth,
                        const std::vector<Eigen::Index>& detected, int window,
                        Eigen::Index n);

// d(truth, detected) = |m - k| + min-cost assignment of the smaller set into
// the larger with costs |tau_i - eta_j| / n, solved exactly.
struct DistanceReport {
  double distance = 0.0;
  std::vector<std::pair<Eigen::Index, Eigen::Index>> assignment;  // (truth idx, detected idx)
  Eigen::Index m = 0;  // |truth|
  Eigen::Index k = 0;  // |detected|
};

DistanceReport changepoint_distance(const std::vector<Eigen::Index>& truth,
                                    const std::vector<Eigen::Index>& detected,
                                    Eigen::Index n);

// RMSE of the fitted series against the clean truth, and of the estimated
// piecewise-constant gamma track against the true one.
double rmse_fit(const GroundTruth& truth, const Segmentation& segmentation);
double rmse_gamma(const GroundTruth& truth, const Segmentation& segmentation);

// gamma at every time point implied by the true segments.
VectorXd true_gamma_track(const GroundTruth& truth);

}  // namespace drydown
