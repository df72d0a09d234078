#include "drydown/nls.hpp"

#include "drydown/errors.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace drydown {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kBoundSnap = 1e-8;   // distance at which a parameter counts as "at bound"
constexpr double kDampingMax = 1e12;  // give up on a start once damping explodes

double clamp(double x, double lo, double hi) { return std::min(std::max(x, lo), hi); }

struct LmProblem {
  const Eigen::Ref<const VectorXd>& y;
  const SegmentCovariates& cov;
  VectorXd offsets;
  Eigen::Index n_beta;

  // One shared evaluation: the decay column exp(-exp(gamma) u) feeds the
  // model value and three of the Jacobian columns, so compute it once.
  double residuals(const VectorXd& p, VectorXd& r) const {
    const double rate = std::exp(p[2]);
    if (n_beta == 0) {
      r = y.array() - p[0] - p[1] * (-rate * offsets.array()).exp();
    } else {
      const Eigen::ArrayXd amplitude = p[1] + (cov.design * p.tail(n_beta)).array();
      r = y.array() - p[0] - amplitude * (-rate * offsets.array()).exp();
    }
    return r.squaredNorm();
  }

  void residuals_and_jac(const VectorXd& p, VectorXd& r, MatrixXd& jac) const {
    const double rate = std::exp(p[2]);
    const Eigen::Index m = offsets.size();
    jac.resize(m, 3 + n_beta);
    jac.col(0).setOnes();
    jac.col(1) = (-rate * offsets.array()).exp();
    if (n_beta == 0) {
      r = y.array() - (p[0] + p[1] * jac.col(1).array());
      jac.col(2) = -p[1] * rate * offsets.array() * jac.col(1).array();
      return;
    }
    const Eigen::ArrayXd amplitude = p[1] + (cov.design * p.tail(n_beta)).array();
    r = y.array() - (p[0] + amplitude * jac.col(1).array());
    jac.col(2) = -amplitude * rate * offsets.array() * jac.col(1).array();
    for (Eigen::Index j = 0; j < n_beta; ++j) {
      jac.col(3 + j) = cov.design.col(j).array() * jac.col(1).array();
    }
  }
};

struct LmRun {
  VectorXd p;
  double rss = std::numeric_limits<double>::infinity();
  bool converged = false;
  int iterations = 0;
};

void project(VectorXd& p, const FitConfig& config) {
  for (int j = 0; j < 3; ++j) p[j] = clamp(p[j], config.lower[j], config.upper[j]);
}

LmRun run_lm(const LmProblem& problem, VectorXd p, const FitConfig& config) {
  LmRun run;
  project(p, config);
  VectorXd r, r_new, candidate, step, grad;
  MatrixXd jac, lhs, jtj;
  double rss = problem.residuals(p, r);
  double damping = config.lambda_init;

  // max_iter caps outer iterations (one Jacobian build each); the inner
  // damping search is bounded by the damping cap.
  while (run.iterations < config.max_iter) {
    ++run.iterations;
    problem.residuals_and_jac(p, r, jac);
    grad.noalias() = jac.transpose() * r;
    if (grad.lpNorm<Eigen::Infinity>() < config.grad_tol) {
      run.converged = true;
      break;
    }
    jtj.noalias() = jac.transpose() * jac;

    // Marquardt scaling: damp by the diagonal of J'J. The floor is relative
    // to the dominant direction so flat directions (d/dgamma when alpha1 is
    // tiny) are damped on the same scale instead of stepping wildly.
    const double diag_floor = std::max(1e-8 * jtj.diagonal().maxCoeff(), 1e-30);
    const VectorXd diag = jtj.diagonal().cwiseMax(diag_floor);

    bool accepted = false;
    while (damping < kDampingMax) {
      lhs = jtj;
      lhs.diagonal() += damping * diag;
      step = lhs.ldlt().solve(grad);
      candidate = p + step;
      project(candidate, config);
      const double rss_new = problem.residuals(candidate, r_new);
      if (std::isfinite(rss_new) && rss_new < rss) {
        const double improvement = (rss - rss_new) / std::max(rss, 1e-300);
        p.swap(candidate);
        rss = rss_new;
        damping = std::max(damping / config.lambda_down, 1e-12);
        accepted = true;
        if (improvement < config.rel_tol) run.converged = true;
        break;
      }
      if (std::isfinite(rss_new) &&
          rss_new - rss <= config.rel_tol * std::max(rss, 1e-300)) {
        // No descent left within the RSS tolerance: the current point is a
        // (numerically) stationary optimum, typical when warm-started at the
        // previous solution.
        run.converged = true;
        break;
      }
      damping *= config.lambda_up;
    }
    if (!accepted || run.converged) break;
  }

  run.p = p;
  run.rss = rss;
  return run;
}

// sigma^2 diag((J'J)^-1) with sigma^2 = rss/(n-p); unreliable when any core
// parameter is pinned to its bound or the normal matrix is near singular.
void fill_std_errors(FitResult& result, const LmProblem& problem, const FitConfig& config) {
  const Eigen::Index dim = 3 + problem.n_beta;
  result.std_errors = VectorXd::Constant(dim, kNaN);
  result.se_reliable = false;

  const Eigen::Index dof = problem.y.size() - dim;
  if (dof <= 0) return;

  VectorXd p(dim);
  p[0] = result.params.alpha0;
  p[1] = result.params.alpha1;
  p[2] = result.params.gamma;
  if (problem.n_beta > 0) p.tail(problem.n_beta) = result.beta;

  VectorXd r;
  MatrixXd jac;
  problem.residuals_and_jac(p, r, jac);
  const MatrixXd jtj = jac.transpose() * jac;
  Eigen::FullPivLU<MatrixXd> lu(jtj);
  if (!lu.isInvertible()) return;
  const double sigma2 = result.rss / static_cast<double>(dof);
  const VectorXd var = sigma2 * lu.inverse().diagonal();
  for (Eigen::Index j = 0; j < dim; ++j) {
    result.std_errors[j] = var[j] > 0.0 ? std::sqrt(var[j]) : kNaN;
  }

  bool at_bound = false;
  for (int j = 0; j < 3; ++j) {
    if (p[j] - config.lower[j] < kBoundSnap || config.upper[j] - p[j] < kBoundSnap) {
      at_bound = true;
    }
  }
  result.se_reliable = !at_bound;
}

}  // namespace

DecayParams initial_params(const Eigen::Ref<const VectorXd>& values, const FitConfig& config) {
  if (values.size() < 3) throw ValidationError("segment too short to initialize a fit");
  const double lo = values.minCoeff();
  const double hi = values.maxCoeff();
  const double range = hi - lo;
  DecayParams init;
  init.alpha0 = clamp(std::max(config.lower[0], lo - 0.1 * range), config.lower[0],
                      config.upper[0]);
  init.alpha1 = clamp(values[0] - init.alpha0, config.lower[1], config.upper[1]);
  init.gamma = clamp(config.gamma_grid.empty() ? -3.0 : config.gamma_grid.front(),
                     config.lower[2], config.upper[2]);
  return init;
}

namespace {

// Shared validation and degenerate-input handling; returns true when the
// caller should return `result` as-is.
bool prepare_fit(const Eigen::Ref<const VectorXd>& values, const FitConfig& config,
                 const SegmentCovariates& covariates, FitResult& result) {
  const Eigen::Index m = values.size();
  const Eigen::Index n_beta = covariates.count();
  if (m < 3 + n_beta) {
    throw ValidationError("segment of " + std::to_string(m) +
                          " points is too short for " + std::to_string(3 + n_beta) +
                          " parameters");
  }
  if (covariates.kind != CovariateKind::none && covariates.design.rows() != m) {
    throw ValidationError("covariate design does not cover every segment time point");
  }

  result.n_points = static_cast<int>(m);
  result.std_errors = VectorXd::Constant(3 + n_beta, kNaN);
  if (n_beta > 0) result.beta = VectorXd::Zero(n_beta);

  // A flat segment carries no decay signal; report the degenerate fit rather
  // than letting gamma run to a bound.
  const double spread = values.maxCoeff() - values.minCoeff();
  if (!(spread > 1e-14 * std::max(1.0, std::abs(values.maxCoeff())))) {
    result.params = initial_params(values, config);
    result.rss = (values.array() - values.mean()).matrix().squaredNorm();
    result.converged = false;
    return true;
  }
  return false;
}

}  // namespace

FitResult fit_segment(const Eigen::Ref<const VectorXd>& values, const FitConfig& config,
                      const SegmentCovariates& covariates) {
  FitResult result;
  if (prepare_fit(values, config, covariates, result)) return result;
  const Eigen::Index m = values.size();
  const Eigen::Index n_beta = covariates.count();

  LmProblem problem{values, covariates, unit_offsets(m), n_beta};
  const DecayParams init = initial_params(values, config);

  LmRun best_converged;
  LmRun best_any;
  int total_iterations = 0;
  for (const double gamma0 : config.gamma_grid) {
    VectorXd p = VectorXd::Zero(3 + n_beta);
    p[0] = init.alpha0;
    p[1] = init.alpha1;
    p[2] = clamp(gamma0, config.lower[2], config.upper[2]);
    LmRun run = run_lm(problem, std::move(p), config);
    total_iterations += run.iterations;
    if (run.rss < best_any.rss) best_any = run;
    if (run.converged && run.rss < best_converged.rss) best_converged = run;
  }

  const LmRun& chosen = best_converged.converged ? best_converged : best_any;
  result.params = DecayParams{chosen.p[0], chosen.p[1], chosen.p[2]};
  if (n_beta > 0) result.beta = chosen.p.tail(n_beta);
  result.rss = chosen.rss;
  result.converged = best_converged.converged;
  result.iterations = total_iterations;
  if (result.converged) fill_std_errors(result, problem, config);
  return result;
}

FitResult fit_segment_from(const Eigen::Ref<const VectorXd>& values, const FitConfig& config,
                           const DecayParams& start) {
  FitResult result;
  const SegmentCovariates no_covariates;
  if (prepare_fit(values, config, no_covariates, result)) return result;

  LmProblem problem{values, no_covariates, unit_offsets(values.size()), 0};
  VectorXd p(3);
  p << start.alpha0, start.alpha1, start.gamma;
  const LmRun run = run_lm(problem, std::move(p), config);
  result.params = DecayParams{run.p[0], run.p[1], run.p[2]};
  result.rss = run.rss;
  result.converged = run.converged;
  result.iterations = run.iterations;
  if (result.converged) fill_std_errors(result, problem, config);
  return result;
}

}  // namespace drydown
