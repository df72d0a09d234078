#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <vector>

namespace drydown {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Per-segment exponential drydown parameters in the reparameterized form
//   y(u) = alpha0 + alpha1 * exp(-exp(gamma) * u),   u = t - tau >= 1.
// phi = exp(-exp(gamma)) is the one-step decay factor, in (0,1) for any
// finite gamma.
struct DecayParams {
  double alpha0 = 0.0;  // asymptotic soil moisture
  double alpha1 = 0.0;  // jump amplitude above alpha0
  double gamma = 0.0;   // log-log decay rate
};

enum class CovariateKind { none, continuous, indicator };

// Covariate design for one segment, aligned with offsets 1..m. Column j of
// `design` multiplies beta[j] inside the amplitude:
//   y(u) = alpha0 + (alpha1 + design.row(u-1) * beta) * exp(-exp(gamma) u).
// continuous: one column of precipitation values at the segment's times;
// indicator: one step-function column 1(t >= z_p) per rainfall instant z_p.
struct SegmentCovariates {
  CovariateKind kind = CovariateKind::none;
  MatrixXd design;

  Eigen::Index count() const { return kind == CovariateKind::none ? 0 : design.cols(); }
};

SegmentCovariates continuous_covariates(const Eigen::Ref<const VectorXd>& segment_precip);

// Instants are given in changepoint coordinates; the segment covers
// (segment_start, segment_start + length]. Instants outside it are an error.
SegmentCovariates indicator_covariates(const std::vector<Eigen::Index>& instants,
                                       Eigen::Index segment_start, Eigen::Index length);

double phi_of_gamma(double gamma);
double gamma_of_phi(double phi);  // requires phi in (0,1)

// e-folding decay 1/exp(gamma), in series steps / in seconds for the given step.
double efolding_steps(double gamma);
double efolding_of_gamma(double gamma, std::int64_t step_seconds);

VectorXd unit_offsets(Eigen::Index m);  // 1, 2, ..., m

VectorXd predict(const DecayParams& params, const Eigen::Ref<const VectorXd>& offsets);
VectorXd predict(const DecayParams& params, const Eigen::Ref<const VectorXd>& offsets,
                 const SegmentCovariates& covariates, const Eigen::Ref<const VectorXd>& beta);

// Columns: d/dalpha0 = 1, d/dalpha1 = exp(-exp(gamma) u),
// d/dgamma = -alpha1 u exp(gamma) exp(-exp(gamma) u); with covariates the
// amplitude in the gamma column becomes alpha1 + z' beta and one column
// z_p exp(-exp(gamma) u) is appended per coefficient.
MatrixXd jacobian(const DecayParams& params, const Eigen::Ref<const VectorXd>& offsets);
MatrixXd jacobian(const DecayParams& params, const Eigen::Ref<const VectorXd>& offsets,
                  const SegmentCovariates& covariates, const Eigen::Ref<const VectorXd>& beta);

}  // namespace drydown
