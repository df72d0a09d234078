#pragma once

#include "drydown/decay_model.hpp"

#include <Eigen/Core>

#include <vector>

namespace drydown {

// Box bounds and Levenberg-Marquardt controls for one segment fit. Bounds
// order: alpha0, alpha1, gamma. beta coefficients, when present, are
// unbounded.
struct FitConfig {
  Eigen::Vector3d lower{0.0, 1e-3, -10.0};
  Eigen::Vector3d upper{0.4, 0.4, 3.0};
  std::vector<double> gamma_grid{-8.0, -6.0, -5.0, -4.0, -3.0, -2.0, -1.0, 0.0};
  int max_iter = 100;
  double rel_tol = 1e-9;    // relative RSS improvement on an accepted step
  double grad_tol = 1e-10;  // max-norm of J'r
  double lambda_init = 1e-3;
  double lambda_up = 10.0;
  double lambda_down = 10.0;
};

struct FitResult {
  DecayParams params{};
  VectorXd beta;          // empty without covariates
  double rss = 0.0;
  bool converged = false;
  int n_points = 0;
  VectorXd std_errors;    // 3 + P entries, NaN when unavailable
  bool se_reliable = false;  // false when a parameter sits at a bound
  int iterations = 0;
};

// Damped Gauss-Newton with parameter clamping to the box, restarted from
// every gamma in config.gamma_grid; returns the best-RSS converged run, or
// the best attempt with converged=false when no start converges. Constant
// segments are degenerate and report converged=false immediately.
FitResult fit_segment(const Eigen::Ref<const VectorXd>& values, const FitConfig& config,
                      const SegmentCovariates& covariates = {});

// alpha0 <- max(lower, min(values) - 0.1 * range), alpha1 <- values[0] - alpha0,
// both clamped to their bounds; gamma is filled per start by fit_segment.
DecayParams initial_params(const Eigen::Ref<const VectorXd>& values, const FitConfig& config);

// Single Levenberg-Marquardt run from the given start, skipping the gamma
// multi-start. Used to warm-start a segment fit from the fit of the same
// segment one point shorter.
FitResult fit_segment_from(const Eigen::Ref<const VectorXd>& values, const FitConfig& config,
                           const DecayParams& start);

}  // namespace drydown
