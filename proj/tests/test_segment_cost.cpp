#include "drydown/segment_cost.hpp"

#include "drydown/errors.hpp"
#include "drydown/simulation.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace drydown;

namespace {

SoilSeries series_from(VectorXd values) {
  SoilSeries s;
  s.values = std::move(values);
  s.interpolated = BoolArray::Constant(s.values.size(), false);
  return s;
}

}  // namespace

TEST_CASE("profiled Gaussian cost formula") {
  // log(rss/m) = 0 case
  CHECK(profiled_gaussian_cost(10, 10.0) == doctest::Approx(28.37877066409345).epsilon(1e-12));
  // near-exact fit, frozen by direct substitution
  CHECK(profiled_gaussian_cost(100, 1e-20) ==
        doctest::Approx(-4781.899497945966).epsilon(1e-12));
  // the floor keeps an exact fit finite
  CHECK(std::isfinite(profiled_gaussian_cost(100, 0.0)));
}

TEST_CASE("segment_cost fits the window and prices it") {
  const DecayParams truth{0.06, 0.11, -4.0};
  SoilSeries s = series_from(predict(truth, unit_offsets(120)));
  const CostEntry entry = segment_cost(s, 10, 110, FitConfig{});
  REQUIRE(entry.fit.converged);
  CHECK(entry.cost == doctest::Approx(profiled_gaussian_cost(100, entry.fit.rss)));
  CHECK(entry.cost < -3000);  // near-exact fit drives the cost far negative
}

TEST_CASE("non-converging segments get the sentinel") {
  SoilSeries flat = series_from(VectorXd::Constant(60, 0.2));
  const CostEntry entry = segment_cost(flat, 0, 60, FitConfig{});
  CHECK_FALSE(entry.fit.converged);
  CHECK(entry.cost == kCostSentinel);
  CHECK(is_infinite_cost(entry.cost));
}

TEST_CASE("invalid ranges are rejected") {
  SoilSeries s = series_from(VectorXd::LinSpaced(20, 0.3, 0.1));
  CHECK_THROWS_AS(segment_cost(s, 5, 7, FitConfig{}), ValidationError);
  CHECK_THROWS_AS(segment_cost(s, -1, 10, FitConfig{}), ValidationError);
  CHECK_THROWS_AS(segment_cost(s, 0, 25, FitConfig{}), ValidationError);
  CHECK_THROWS_AS(segment_cost(s, 0, 10, FitConfig{}, 12), ValidationError);
}

TEST_CASE("cost is invariant under level shifts") {
  std::mt19937 rng(3);
  std::normal_distribution<double> noise(0.0, 0.0005);
  VectorXd base = predict({0.06, 0.11, -3.0}, unit_offsets(80));
  for (Eigen::Index i = 0; i < 80; ++i) base[i] += noise(rng);

  FitConfig wide;
  wide.upper = {0.9, 0.9, 3.0};
  const CostEntry original = segment_cost(series_from(base), 0, 80, wide);
  const CostEntry shifted = segment_cost(series_from(base.array() + 0.3), 0, 80, wide);
  REQUIRE(original.fit.converged);
  REQUIRE(shifted.fit.converged);
  CHECK(shifted.cost == doctest::Approx(original.cost).epsilon(1e-9));
  CHECK(shifted.fit.params.alpha0 - original.fit.params.alpha0 ==
        doctest::Approx(0.3).epsilon(1e-4));
}

TEST_CASE("cache memoizes by range") {
  GroundTruth truth = generate(default_spec("1a"), 3);
  SoilSeries s = to_soil_series(truth);
  CostCache cache(s, FitConfig{});

  const CostEntry& first = cache.cost(0, 100);
  CHECK(cache.fit_count() == 1);
  const CostEntry& again = cache.cost(0, 100);
  CHECK(cache.fit_count() == 1);  // memoized: one fit for two queries
  CHECK(&first == &again);

  cache.cost(0, 101);
  CHECK(cache.fit_count() == 2);  // distinct key, distinct entry
  CHECK(cache.size() == 2);
}

TEST_CASE("disabled cache recomputes but matches") {
  GroundTruth truth = generate(default_spec("1a"), 4);
  SoilSeries s = to_soil_series(truth);
  CostCache cached(s, FitConfig{}, true);
  CostCache uncached(s, FitConfig{}, false);

  const double a = cached.cost(5, 90).cost;
  const double b = uncached.cost(5, 90).cost;
  CHECK(a == b);
  uncached.cost(5, 90);
  CHECK(uncached.fit_count() == 2);  // recomputed each time
  CHECK(cached.fit_count() == 1);
}

TEST_CASE("subadditivity holds on simulated nested triples") {
  GroundTruth truth = generate(default_spec("1a"), 5);
  SoilSeries s = to_soil_series(truth);
  CostCache cache(s, FitConfig{});

  std::mt19937 rng(12);
  std::uniform_int_distribution<Eigen::Index> pick(0, s.size() - 61);
  int checked = 0, violations = 0;
  while (checked < 40) {
    const Eigen::Index a = pick(rng);
    const Eigen::Index b = a + 10 + static_cast<Eigen::Index>(rng() % 20);
    const Eigen::Index c = b + 10 + static_cast<Eigen::Index>(rng() % 20);
    if (c > s.size()) continue;
    const CostEntry& left = cache.cost(a, b);
    const CostEntry& right = cache.cost(b, c);
    const CostEntry& whole = cache.cost(a, c);
    if (!left.fit.converged || !right.fit.converged || !whole.fit.converged) continue;
    ++checked;
    if (left.cost + right.cost > whole.cost + 1e-6 * std::abs(whole.cost)) ++violations;
  }
  CHECK(violations <= 1);  // < 1% target at scale; allow one on a small draw
}
