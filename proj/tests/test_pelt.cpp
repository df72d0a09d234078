#include "drydown/pelt.hpp"

#include "drydown/errors.hpp"
#include "drydown/simulation.hpp"

#include <doctest.h>

#include <cmath>
#include <map>
#include <random>

using namespace drydown;

namespace {

SoilSeries series_from(VectorXd values) {
  SoilSeries s;
  s.values = std::move(values);
  s.interpolated = BoolArray::Constant(s.values.size(), false);
  return s;
}

// Two decay segments with a planted jump at `jump_at`.
SoilSeries planted_jump(Eigen::Index n, Eigen::Index jump_at, double sd, unsigned seed) {
  VectorXd values(n);
  values.head(jump_at) = predict({0.06, 0.11, -3.5}, unit_offsets(jump_at));
  values.tail(n - jump_at) = predict({0.07, 0.14, -4.0}, unit_offsets(n - jump_at));
  std::mt19937 rng(seed);
  std::normal_distribution<double> noise(0.0, sd);
  for (Eigen::Index i = 0; i < n; ++i) values[i] += noise(rng);
  return series_from(values);
}

ScenarioSpec small_scenario(Eigen::Index n, double rate, unsigned seed) {
  ScenarioSpec spec = default_spec("1a");
  spec.length = n;
  spec.rate_a = rate;
  spec.seed = seed;
  return spec;
}

bool same_segmentation(const Segmentation& a, const Segmentation& b) {
  if (a.changepoints != b.changepoints) return false;
  const double scale = std::max({std::abs(a.total_cost), std::abs(b.total_cost), 1.0});
  return std::abs(a.total_cost - b.total_cost) <= 1e-6 * scale;
}

}  // namespace

TEST_CASE("a planted jump is found exactly") {
  const SoilSeries s = planted_jump(200, 100, 0.0005, 21);
  PeltConfig config;
  config.min_seg_len = 10;
  config.penalty = 3.0 * std::log(200.0);
  const Segmentation exhaustive = detect_exhaustive(s, config);
  REQUIRE(exhaustive.changepoints.size() == 1);
  CHECK(exhaustive.changepoints[0] == 100);

  const Segmentation pruned = detect(s, config);
  CHECK(same_segmentation(pruned, exhaustive));
}

TEST_CASE("huge penalties remove all changepoints") {
  const SoilSeries s = planted_jump(160, 80, 0.0005, 5);
  PeltConfig config;
  config.min_seg_len = 10;
  config.penalty = 1e9;
  CHECK(detect_exhaustive(s, config).changepoints.empty());
  CHECK(detect(s, config).changepoints.empty());
}

TEST_CASE("zero penalty saturates the spacing constraint") {
  // Convex decay that no single exponential matches exactly: every minimal
  // 3-point window interpolates, so maximal splitting is strictly optimal.
  const Eigen::Index n = 30;
  VectorXd values(n);
  for (Eigen::Index t = 0; t < n; ++t) values[t] = 0.05 + 0.1 / static_cast<double>(t + 1);
  PeltConfig config;
  config.min_seg_len = 3;
  config.penalty = 0.0;
  const Segmentation result = detect_exhaustive(series_from(values), config);
  CHECK(result.changepoints.size() == n / 3 - 1);
}

TEST_CASE("pruned and exhaustive detection agree on simulated series") {
  for (unsigned seed = 0; seed < 2; ++seed) {
    const GroundTruth truth = generate(small_scenario(140, 0.03, seed));
    const SoilSeries s = to_soil_series(truth);
    for (const int l : {5, 10}) {
      PeltConfig config;
      config.min_seg_len = l;
      CostCache cache(s, effective_fit_config(config));
      for (const double factor : {0.2, 1.0, 5.0}) {
        config.penalty = factor * 3.0 * std::log(140.0);
        const Segmentation pruned = detect(s, config, cache);
        const Segmentation exhaustive = detect_exhaustive(s, config, cache);
        CAPTURE(seed);
        CAPTURE(l);
        CAPTURE(factor);
        CHECK(same_segmentation(pruned, exhaustive));
      }
    }
  }
}

TEST_CASE("changepoint counts are non-increasing in the penalty") {
  const GroundTruth truth = generate(small_scenario(200, 0.03, 11));
  const SoilSeries s = to_soil_series(truth);
  PeltConfig config;
  config.min_seg_len = 8;
  CostCache cache(s, effective_fit_config(config));
  std::size_t prev_count = std::numeric_limits<std::size_t>::max();
  for (const double lambda : {1.0, 4.0, 16.0, 64.0, 256.0}) {
    config.penalty = lambda;
    const std::size_t count = detect(s, config, cache).changepoints.size();
    CHECK(count <= prev_count);
    prev_count = count;
  }
}

TEST_CASE("segmentation invariants hold") {
  const GroundTruth truth = generate(small_scenario(300, 0.02, 3));
  const SoilSeries s = to_soil_series(truth);
  PeltConfig config;
  config.min_seg_len = 12;
  config.penalty = 3.0 * std::log(300.0);
  const Segmentation result = detect(s, config);

  // spacing: every gap >= l, including the boundaries
  Eigen::Index prev = 0;
  for (const Eigen::Index tau : result.changepoints) {
    CHECK(tau - prev >= config.min_seg_len);
    prev = tau;
  }
  CHECK(s.size() - prev >= config.min_seg_len);

  // total cost recomputes from the segment fits
  double recomputed = config.penalty * static_cast<double>(result.changepoints.size());
  for (const SegmentRecord& seg : result.segments) recomputed += seg.cost;
  CHECK(result.total_cost ==
        doctest::Approx(recomputed).epsilon(1e-6));

  // determinism
  const Segmentation again = detect(s, config);
  CHECK(again.changepoints == result.changepoints);
  CHECK(again.total_cost == result.total_cost);

  // jobs > 1 changes nothing
  PeltConfig parallel_config = config;
  parallel_config.jobs = 2;
  const Segmentation parallel_run = detect(s, parallel_config);
  CHECK(parallel_run.changepoints == result.changepoints);
  CHECK(parallel_run.total_cost == result.total_cost);
}

TEST_CASE("refit reproduces and never beats the DP") {
  const GroundTruth truth = generate(small_scenario(240, 0.025, 9));
  const SoilSeries s = to_soil_series(truth);
  PeltConfig config;
  config.min_seg_len = 10;
  config.penalty = 3.0 * std::log(240.0);
  CostCache cache(s, effective_fit_config(config));
  const Segmentation best = detect(s, config, cache);

  const Segmentation same = refit(s, best.changepoints, config, cache);
  CHECK(same.total_cost == doctest::Approx(best.total_cost).epsilon(1e-9));

  std::vector<Eigen::Index> wrong = {30, 77, 150};
  const Segmentation off = refit(s, wrong, config, cache);
  CHECK(off.total_cost >= best.total_cost - 1e-9 * std::abs(best.total_cost));

  const Segmentation single = refit(s, {}, config, cache);
  CHECK(single.segments.size() == 1);
  CHECK(single.changepoints.empty());

  CHECK_THROWS_AS(refit(s, {-1}, config, cache), ValidationError);
  CHECK_THROWS_AS(refit(s, {400}, config, cache), ValidationError);

  // spacing violations are flagged, not fatal; sub-3 segments get sentinels
  const Segmentation tight = refit(s, {100, 102}, config, cache);
  CHECK(!tight.warnings.empty());
  CHECK(tight.segments[1].cost == kCostSentinel);
}

TEST_CASE("constant series yields no changepoints via the modified iteration") {
  const SoilSeries flat = series_from(VectorXd::Constant(80, 0.2));
  PeltConfig config;
  config.min_seg_len = 10;
  config.penalty = 10.0;
  const Segmentation pruned = detect(flat, config);
  const Segmentation exhaustive = detect_exhaustive(flat, config);
  CHECK(pruned.changepoints.empty());
  CHECK(exhaustive.changepoints.empty());
  REQUIRE(pruned.segments.size() == 1);
  CHECK_FALSE(pruned.segments[0].fit.converged);
  CHECK(is_infinite_cost(pruned.total_cost));
}

TEST_CASE("unfittable prefixes keep the recursion alive") {
  // Constant opening (every all-constant window is degenerate) followed by
  // two decay segments: the modified iteration must carry candidates through.
  VectorXd values(150);
  values.head(50).setConstant(0.06);
  values.segment(50, 50) = predict({0.06, 0.12, -3.5}, unit_offsets(50));
  values.tail(50) = predict({0.07, 0.1, -4.0}, unit_offsets(50));
  std::mt19937 rng(77);
  std::normal_distribution<double> noise(0.0, 0.0003);
  for (Eigen::Index i = 0; i < 150; ++i) values[i] += noise(rng);

  const SoilSeries s = series_from(values);
  PeltConfig config;
  config.min_seg_len = 10;
  config.penalty = 3.0 * std::log(150.0);
  const Segmentation pruned = detect(s, config);
  const Segmentation exhaustive = detect_exhaustive(s, config);
  CHECK(same_segmentation(pruned, exhaustive));
  // the later jump is recoverable whatever happens inside the flat opening
  bool found_second = false;
  for (const Eigen::Index tau : pruned.changepoints) {
    if (std::abs(tau - 100) <= 2) found_second = true;
  }
  CHECK(found_second);
}

TEST_CASE("series shorter than 2l or with gaps are rejected") {
  PeltConfig config;
  config.min_seg_len = 24;
  CHECK_THROWS_AS(detect(series_from(VectorXd::Constant(47, 0.1)), config), ValidationError);

  VectorXd with_nan = VectorXd::Constant(60, 0.1);
  with_nan[10] = std::nan("");
  config.min_seg_len = 10;
  CHECK_THROWS_AS(detect(series_from(with_nan), config), ValidationError);

  config.min_seg_len = 2;
  CHECK_THROWS_AS(detect(series_from(VectorXd::Constant(60, 0.1)), config), ValidationError);
}

TEST_CASE("candidate bookkeeping matches a from-scratch replay") {
  const GroundTruth truth = generate(small_scenario(140, 0.03, 13));
  const SoilSeries s = to_soil_series(truth);
  PeltConfig config;
  config.min_seg_len = 7;
  config.penalty = 3.0 * std::log(140.0);
  config.trace_candidates = true;
  CostCache cache(s, effective_fit_config(config));
  const Segmentation run = detect(s, config, cache);
  const Eigen::Index l = config.min_seg_len;
  const Eigen::Index n = s.size();
  REQUIRE(run.candidate_trace.size() == static_cast<std::size_t>(n - 2 * l + 1));

  // Replay the rule declaratively from the recorded F values: the first
  // failed keep test schedules removal l-1 horizons later, an infinite
  // segment cost clears the pending failure, and an infinite F(tau) removes
  // the candidate outright.
  std::vector<Eigen::Index> live = {0, l};
  std::map<Eigen::Index, Eigen::Index> fail_since;
  for (Eigen::Index t = 2 * l; t <= n; ++t) {
    const auto& recorded = run.candidate_trace[t - 2 * l];
    REQUIRE(recorded == live);

    bool any_finite = false;
    for (const Eigen::Index tau : live) {
      if (!is_infinite_cost(run.f_trace[tau]) && !is_infinite_cost(cache.cost(tau, t).cost)) {
        any_finite = true;
      }
    }
    std::vector<Eigen::Index> next;
    for (const Eigen::Index tau : live) {
      if (is_infinite_cost(run.f_trace[tau])) continue;
      const double c = cache.cost(tau, t).cost;
      if (is_infinite_cost(c)) {
        fail_since.erase(tau);
      } else if (any_finite && !fail_since.count(tau) &&
                 run.f_trace[tau] + c + config.pruning_constant - config.safe_margin >
                     run.f_trace[t]) {
        fail_since[tau] = t;
      }
      if (fail_since.count(tau) && fail_since[tau] <= t + 1 - l) continue;
      next.push_back(tau);
    }
    if (t + 1 <= n) next.push_back(t - l + 1);
    live = std::move(next);
  }
}

TEST_CASE("level consistency warnings fire on violations") {
  Segmentation fake;
  SegmentRecord a, b;
  a.fit.params = {0.06, 0.05, -3.0};
  b.fit.params = {0.2, 0.1, -3.0};  // next asymptote above previous peak
  fake.segments = {a, b};
  CHECK(level_consistency_warnings(fake).size() == 1);

  b.fit.params.alpha0 = 0.08;
  fake.segments = {a, b};
  CHECK(level_consistency_warnings(fake).empty());
}
