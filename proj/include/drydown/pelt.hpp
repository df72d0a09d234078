#pragma once

#include "drydown/segment_cost.hpp"

#include <string>
#include <vector>

namespace drydown {

struct PeltConfig {
  double penalty = 0.0;     // lambda >= 0; CLI defaults to the BIC scale 3 log n
  int min_seg_len = 24;     // l >= 3
  double pruning_constant = 0.0;  // K in the pruning inequality
  double safe_margin = 0.0;       // extra slack that makes pruning more conservative
  double min_jump = 1e-3;         // lower bound on alpha1 in every fit
  FitConfig fit;
  int jobs = 1;  // parallel cost evaluations within one DP step
  bool trace_candidates = false;  // record the per-step candidate sets
  // Seed each candidate's fit from its fit one point shorter instead of the
  // full gamma multi-start. Off by default; turns the dominant cost of long
  // runs (repeated multi-start fits of slowly growing segments) into single
  // damped-Gauss-Newton continuations.
  bool warm_start = false;
};

struct SegmentRecord {
  Eigen::Index start = 0;  // exclusive changepoint
  Eigen::Index end = 0;
  double cost = kCostSentinel;
  FitResult fit;
};

struct Segmentation {
  std::vector<Eigen::Index> changepoints;  // strictly increasing, in (0, n)
  std::vector<SegmentRecord> segments;     // changepoints.size() + 1 records
  double total_cost = 0.0;                 // sum of segment costs + lambda * k
  std::vector<double> f_trace;             // optimal cost F(0..n)
  std::vector<std::string> warnings;
  // candidate_trace[i] is the candidate set searched at step t = 2l + i,
  // recorded only when PeltConfig::trace_candidates is set
  std::vector<std::vector<Eigen::Index>> candidate_trace;
};

// Penalized optimal partitioning with PELT pruning and the modified
// iteration for non-converged fits. The overloads taking a CostCache share
// fits across runs (penalty sweeps, oracle comparisons); the cache must wrap
// the same series and fit configuration.
Segmentation detect(const SoilSeries& series, const PeltConfig& config);
Segmentation detect(const SoilSeries& series, const PeltConfig& config, CostCache& cache);

// Same recursion with no pruning; the testing oracle. Quadratic in n.
Segmentation detect_exhaustive(const SoilSeries& series, const PeltConfig& config);
Segmentation detect_exhaustive(const SoilSeries& series, const PeltConfig& config,
                               CostCache& cache);

// Fits the segmentation implied by the given changepoints and prices it at
// config.penalty. Spacing violations are flagged in warnings; segments
// shorter than 3 points get the sentinel cost.
Segmentation refit(const SoilSeries& series, const std::vector<Eigen::Index>& changepoints,
                   const PeltConfig& config);
Segmentation refit(const SoilSeries& series, const std::vector<Eigen::Index>& changepoints,
                   const PeltConfig& config, CostCache& cache);

// Model values implied by the per-segment fits, one per observation.
VectorXd fitted_series(const Segmentation& segmentation, Eigen::Index n);

// Piecewise-constant decay-rate track: point i carries its segment's gamma.
VectorXd gamma_track(const Segmentation& segmentation, Eigen::Index n);

// Post-hoc check of the cross-segment constraint alpha0_i + alpha1_i >
// alpha0_{i+1}; returns one message per violation.
std::vector<std::string> level_consistency_warnings(const Segmentation& segmentation);

// Fit config with min_jump folded into the alpha1 lower bound, as used by
// every detection entry point.
FitConfig effective_fit_config(const PeltConfig& config);

}  // namespace drydown
