#include "drydown/pelt.hpp"

#include "drydown/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

namespace drydown {

namespace {

void validate_series(const SoilSeries& series) {
  for (Eigen::Index i = 0; i < series.size(); ++i) {
    if (!std::isfinite(series.values[i])) {
      throw ValidationError("series has non-finite values; interpolate gaps first");
    }
  }
}

void validate_config(const PeltConfig& config) {
  if (config.min_seg_len < 3) throw ValidationError("min_seg_len must be >= 3");
  if (!(config.penalty >= 0.0)) throw ValidationError("penalty must be >= 0");
  if (config.safe_margin < 0.0) throw ValidationError("safe_margin must be >= 0");
}

// Runs fn(i) for i in [0, count) on up to `jobs` threads. Small batches are
// not worth the thread spawn.
template <typename Fn>
void parallel_for(Eigen::Index count, int jobs, Fn&& fn) {
  int workers = std::max(1, std::min<int>(jobs, static_cast<int>(count)));
  if (count < 8) workers = 1;
  if (workers == 1) {
    for (Eigen::Index i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w]() {
      for (Eigen::Index i = w; i < count; i += workers) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

struct Candidate {
  Eigen::Index tau;
  // Horizon of the first failed keep test. One failure makes the candidate
  // dominated at every horizon from fail_since + l on, so removal is
  // scheduled there; until then it stays searchable (the re-admission set
  // S_t, a rolling window of the last l-1 pruning decisions). An infinite
  // segment cost clears the pending failure: such candidates are exempt
  // from pruning until their fit converges again.
  Eigen::Index fail_since = -1;
};

Segmentation run_dp(const SoilSeries& series, const PeltConfig& config, CostCache& cache,
                    bool prune) {
  validate_series(series);
  validate_config(config);
  const Eigen::Index n = series.size();
  const Eigen::Index l = config.min_seg_len;
  if (n < 2 * l) {
    throw ValidationError("series of length " + std::to_string(n) +
                          " is shorter than 2*min_seg_len = " + std::to_string(2 * l));
  }
  const double lambda = config.penalty;
  const double keep_slack = config.pruning_constant - config.safe_margin;

  std::vector<double> F(n + 1, kCostSentinel);
  std::vector<Eigen::Index> prev(n + 1, 0);
  F[0] = -lambda;

  // Initialisation: single-segment costs for every prefix shorter than 2l.
  // Prefixes of fewer than 3 points cannot be fitted and carry the sentinel;
  // they can never end a valid segment once l >= 3.
  parallel_for(std::min<Eigen::Index>(2 * l - 1, n) - 2, config.jobs, [&](Eigen::Index i) {
    const Eigen::Index t = i + 3;
    F[t] = cache.cost(0, t).cost;
  });

  std::vector<Candidate> candidates;
  candidates.push_back({0, -1});
  candidates.push_back({l, -1});

  Segmentation result;
  std::vector<double> seg_cost(candidates.capacity());
  for (Eigen::Index t = 2 * l; t <= n; ++t) {
    const Eigen::Index n_cand = static_cast<Eigen::Index>(candidates.size());
    seg_cost.resize(n_cand);
    if (config.trace_candidates) {
      std::vector<Eigen::Index> snapshot(n_cand);
      for (Eigen::Index i = 0; i < n_cand; ++i) snapshot[i] = candidates[i].tau;
      result.candidate_trace.push_back(std::move(snapshot));
    }
    parallel_for(n_cand, config.jobs, [&](Eigen::Index i) {
      seg_cost[i] = cache.cost(candidates[i].tau, t).cost;
    });

    // Argmin in two tiers, mirroring the modified iteration: prefer
    // candidates whose history and segment cost are both finite; if every
    // segment cost is infinite, choose by history alone (F(tau) + lambda),
    // which keeps the recursion moving until a fittable segment appears.
    Eigen::Index best_tau = -1;
    double best_val = std::numeric_limits<double>::infinity();
    bool any_finite = false;
    for (Eigen::Index i = 0; i < n_cand; ++i) {
      const double f = F[candidates[i].tau];
      if (is_infinite_cost(f) || is_infinite_cost(seg_cost[i])) continue;
      any_finite = true;
      const double val = f + seg_cost[i] + lambda;
      if (val < best_val) {
        best_val = val;
        best_tau = candidates[i].tau;
      }
    }
    if (!any_finite) {
      double best_hist = std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < n_cand; ++i) {
        const double f = F[candidates[i].tau];
        if (is_infinite_cost(f)) continue;
        if (f + lambda < best_hist) {
          best_hist = f + lambda;
          best_tau = candidates[i].tau;
        }
      }
      if (best_tau < 0) best_tau = candidates.front().tau;  // fully degenerate prefix
      best_val = F[best_tau] + kCostSentinel + lambda;
    }
    F[t] = best_val;
    prev[t] = best_tau;

    // Candidate update. Candidates with infinite history can never become
    // optimal and are dropped on sight. Candidates whose current segment
    // cost is infinite are exempt from pruning while their history stays
    // finite (the fit may converge once more points arrive); when every
    // candidate is in that state the update reduces to the modified
    // iteration's R_{t+1} = {t-l+1} union Q_t.
    if (prune) {
      std::size_t kept = 0;
      for (Eigen::Index i = 0; i < n_cand; ++i) {
        Candidate cand = candidates[i];
        const double f = F[cand.tau];
        if (is_infinite_cost(f)) continue;
        if (is_infinite_cost(seg_cost[i])) {
          cand.fail_since = -1;
        } else if (any_finite && cand.fail_since < 0 &&
                   f + seg_cost[i] + keep_slack > F[t]) {
          cand.fail_since = t;
        }
        if (cand.fail_since >= 0 && cand.fail_since <= t + 1 - l) continue;
        candidates[kept++] = cand;
      }
      candidates.resize(kept);
    }
    if (t + 1 <= n) candidates.push_back({t - l + 1, -1});
  }

  for (Eigen::Index cur = n; cur > 0; cur = prev[cur]) {
    if (prev[cur] > 0) result.changepoints.push_back(prev[cur]);
  }
  std::reverse(result.changepoints.begin(), result.changepoints.end());
  result.total_cost = F[n];
  result.f_trace = std::move(F);

  std::vector<Eigen::Index> bounds;
  bounds.push_back(0);
  bounds.insert(bounds.end(), result.changepoints.begin(), result.changepoints.end());
  bounds.push_back(n);
  for (std::size_t i = 0; i + 1 < bounds.size(); ++i) {
    const CostEntry& entry = cache.cost(bounds[i], bounds[i + 1]);
    result.segments.push_back({entry.start, entry.end, entry.cost, entry.fit});
  }
  return result;
}

}  // namespace

FitConfig effective_fit_config(const PeltConfig& config) {
  FitConfig fit = config.fit;
  fit.lower[1] = config.min_jump;
  return fit;
}

Segmentation detect(const SoilSeries& series, const PeltConfig& config) {
  CostCache cache(series, effective_fit_config(config), true, config.warm_start);
  return run_dp(series, config, cache, true);
}

Segmentation detect(const SoilSeries& series, const PeltConfig& config, CostCache& cache) {
  return run_dp(series, config, cache, true);
}

Segmentation detect_exhaustive(const SoilSeries& series, const PeltConfig& config) {
  CostCache cache(series, effective_fit_config(config), true, config.warm_start);
  return run_dp(series, config, cache, false);
}

Segmentation detect_exhaustive(const SoilSeries& series, const PeltConfig& config,
                               CostCache& cache) {
  return run_dp(series, config, cache, false);
}

Segmentation refit(const SoilSeries& series, const std::vector<Eigen::Index>& changepoints,
                   const PeltConfig& config) {
  CostCache cache(series, effective_fit_config(config), true, config.warm_start);
  return refit(series, changepoints, config, cache);
}

Segmentation refit(const SoilSeries& series, const std::vector<Eigen::Index>& changepoints,
                   const PeltConfig& config, CostCache& cache) {
  validate_series(series);
  validate_config(config);
  const Eigen::Index n = series.size();

  Segmentation result;
  std::vector<Eigen::Index> bounds;
  bounds.push_back(0);
  for (const Eigen::Index tau : changepoints) {
    if (tau <= 0 || tau >= n) {
      throw ValidationError("changepoint " + std::to_string(tau) + " out of range (0, " +
                            std::to_string(n) + ")");
    }
    if (!bounds.empty() && tau <= bounds.back()) {
      throw ValidationError("changepoints must be strictly increasing");
    }
    bounds.push_back(tau);
  }
  bounds.push_back(n);
  result.changepoints.assign(changepoints.begin(), changepoints.end());

  double total = 0.0;
  for (std::size_t i = 0; i + 1 < bounds.size(); ++i) {
    const Eigen::Index start = bounds[i];
    const Eigen::Index end = bounds[i + 1];
    if (end - start < config.min_seg_len) {
      result.warnings.push_back("segment [" + std::to_string(start) + "," +
                                std::to_string(end) + ") shorter than min_seg_len");
    }
    if (end - start < 3) {
      SegmentRecord record;
      record.start = start;
      record.end = end;
      record.cost = kCostSentinel;
      record.fit.n_points = static_cast<int>(end - start);
      result.segments.push_back(std::move(record));
      total += kCostSentinel;
      continue;
    }
    const CostEntry& entry = cache.cost(start, end);
    result.segments.push_back({entry.start, entry.end, entry.cost, entry.fit});
    total += entry.cost;
  }
  result.total_cost = total + config.penalty * static_cast<double>(changepoints.size());
  return result;
}

VectorXd fitted_series(const Segmentation& segmentation, Eigen::Index n) {
  VectorXd fitted = VectorXd::Constant(n, std::numeric_limits<double>::quiet_NaN());
  for (const SegmentRecord& seg : segmentation.segments) {
    const Eigen::Index m = seg.end - seg.start;
    if (m <= 0) continue;
    fitted.segment(seg.start, m) = predict(seg.fit.params, unit_offsets(m));
  }
  return fitted;
}

VectorXd gamma_track(const Segmentation& segmentation, Eigen::Index n) {
  VectorXd track = VectorXd::Constant(n, std::numeric_limits<double>::quiet_NaN());
  for (const SegmentRecord& seg : segmentation.segments) {
    const Eigen::Index m = seg.end - seg.start;
    if (m <= 0) continue;
    track.segment(seg.start, m).setConstant(seg.fit.params.gamma);
  }
  return track;
}

std::vector<std::string> level_consistency_warnings(const Segmentation& segmentation) {
  std::vector<std::string> warnings;
  for (std::size_t i = 0; i + 1 < segmentation.segments.size(); ++i) {
    const auto& cur = segmentation.segments[i].fit.params;
    const auto& next = segmentation.segments[i + 1].fit.params;
    if (!(cur.alpha0 + cur.alpha1 > next.alpha0)) {
      warnings.push_back("segment " + std::to_string(i) + ": alpha0 + alpha1 = " +
                         std::to_string(cur.alpha0 + cur.alpha1) +
                         " does not exceed next segment's alpha0 = " +
                         std::to_string(next.alpha0));
    }
  }
  return warnings;
}

}  // namespace drydown
