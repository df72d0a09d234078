#include "drydown/decay_model.hpp"

#include "drydown/errors.hpp"

#include <cmath>
#include <string>

namespace drydown {

SegmentCovariates continuous_covariates(const Eigen::Ref<const VectorXd>& segment_precip) {
  for (Eigen::Index i = 0; i < segment_precip.size(); ++i) {
    if (!std::isfinite(segment_precip[i])) {
      throw ValidationError("covariate missing at segment offset " + std::to_string(i + 1));
    }
  }
  SegmentCovariates cov;
  cov.kind = CovariateKind::continuous;
  cov.design = segment_precip;
  return cov;
}

SegmentCovariates indicator_covariates(const std::vector<Eigen::Index>& instants,
                                       Eigen::Index segment_start, Eigen::Index length) {
  SegmentCovariates cov;
  cov.kind = CovariateKind::indicator;
  cov.design.setZero(length, static_cast<Eigen::Index>(instants.size()));
  for (std::size_t p = 0; p < instants.size(); ++p) {
    const Eigen::Index z = instants[p];
    if (z <= segment_start || z > segment_start + length) {
      throw ValidationError("rainfall instant " + std::to_string(z) +
                            " outside segment (" + std::to_string(segment_start) + ", " +
                            std::to_string(segment_start + length) + "]");
    }
    // Z^p_u = 1(t >= z_p) with t = segment_start + u
    for (Eigen::Index u = z - segment_start; u <= length; ++u) {
      cov.design(u - 1, static_cast<Eigen::Index>(p)) = 1.0;
    }
  }
  return cov;
}

double phi_of_gamma(double gamma) { return std::exp(-std::exp(gamma)); }

double gamma_of_phi(double phi) {
  if (!(phi > 0.0) || !(phi < 1.0)) {
    throw ValidationError("phi must lie strictly in (0,1)");
  }
  return std::log(-std::log(phi));
}

double efolding_steps(double gamma) { return std::exp(-gamma); }

double efolding_of_gamma(double gamma, std::int64_t step_seconds) {
  return efolding_steps(gamma) * static_cast<double>(step_seconds);
}

VectorXd unit_offsets(Eigen::Index m) {
  return VectorXd::LinSpaced(m, 1.0, static_cast<double>(m));
}

VectorXd predict(const DecayParams& params, const Eigen::Ref<const VectorXd>& offsets) {
  const double rate = std::exp(params.gamma);
  return params.alpha0 + params.alpha1 * (-rate * offsets.array()).exp();
}

VectorXd predict(const DecayParams& params, const Eigen::Ref<const VectorXd>& offsets,
                 const SegmentCovariates& covariates, const Eigen::Ref<const VectorXd>& beta) {
  if (covariates.kind == CovariateKind::none) return predict(params, offsets);
  if (covariates.design.rows() != offsets.size()) {
    throw ValidationError("covariate design does not cover every segment time point");
  }
  const double rate = std::exp(params.gamma);
  const Eigen::ArrayXd decay = (-rate * offsets.array()).exp();
  const Eigen::ArrayXd amplitude = params.alpha1 + (covariates.design * beta).array();
  return params.alpha0 + amplitude * decay;
}

MatrixXd jacobian(const DecayParams& params, const Eigen::Ref<const VectorXd>& offsets) {
  const Eigen::Index m = offsets.size();
  const double rate = std::exp(params.gamma);
  MatrixXd jac(m, 3);
  jac.col(0).setOnes();
  jac.col(1) = (-rate * offsets.array()).exp();
  jac.col(2) = -params.alpha1 * rate * offsets.array() * jac.col(1).array();
  return jac;
}

MatrixXd jacobian(const DecayParams& params, const Eigen::Ref<const VectorXd>& offsets,
                  const SegmentCovariates& covariates, const Eigen::Ref<const VectorXd>& beta) {
  if (covariates.kind == CovariateKind::none) return jacobian(params, offsets);
  if (covariates.design.rows() != offsets.size()) {
    throw ValidationError("covariate design does not cover every segment time point");
  }
  const Eigen::Index m = offsets.size();
  const Eigen::Index p = covariates.count();
  const double rate = std::exp(params.gamma);
  MatrixXd jac(m, 3 + p);
  jac.col(0).setOnes();
  jac.col(1) = (-rate * offsets.array()).exp();
  const Eigen::ArrayXd amplitude = params.alpha1 + (covariates.design * beta).array();
  jac.col(2) = -amplitude * rate * offsets.array() * jac.col(1).array();
  for (Eigen::Index j = 0; j < p; ++j) {
    jac.col(3 + j) = covariates.design.col(j).array() * jac.col(1).array();
  }
  return jac;
}

}  // namespace drydown
