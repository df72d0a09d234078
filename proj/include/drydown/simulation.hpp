#pragma once

#include "drydown/decay_model.hpp"
#include "drydown/timeseries.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace drydown {

struct UniformRange {
  double lo = 0.0;
  double hi = 1.0;
};

// How changepoint times and per-regime parameters are laid out:
//   single     one Poisson process over the whole span,
//   half_split different intensities (and jump sizes) per half,
//   nested     a global process plus a faster one inside the longest
//              inter-arrival gap of the global process.
enum class ScenarioLayout { single, half_split, nested };

struct ScenarioSpec {
  std::string scenario_id = "custom";
  ScenarioLayout layout = ScenarioLayout::single;
  Eigen::Index length = 5000;
  double rate_a = 0.003;  // single: whole span; half_split: first half; nested: global
  double rate_b = 0.0;    // half_split: second half; nested: nested process
  // Decay ranges for phi. single/half_split: slow regime before the series
  // midpoint, fast after; nested: large-scale vs small-scale segments.
  UniformRange phi_a{0.99, 0.995};
  UniformRange phi_b{0.95, 0.99};
  // Jump sizes. single: jump_a everywhere; half_split: per half; nested:
  // large vs small scale.
  UniformRange jump_a{0.10, 0.12};
  UniformRange jump_b{0.10, 0.12};
  UniformRange asymptote{0.05, 0.08};
  double noise_sd = 0.0005;
  std::uint64_t seed = 0;
};

struct TrueSegment {
  Eigen::Index start = 0;  // exclusive changepoint
  Eigen::Index end = 0;
  double alpha0 = 0.0;
  double alpha1 = 0.0;
  double phi = 0.0;
  double gamma = 0.0;
  bool small_scale = false;
};

struct GroundTruth {
  std::vector<Eigen::Index> changepoints;
  std::vector<bool> small_scale;  // per changepoint; only nested layouts set true
  std::vector<double> jumps;      // observed increase at each changepoint
  std::vector<TrueSegment> segments;
  VectorXd clean;
  VectorXd noisy;
};

// The six scenarios 1a..3b with the published rates, ranges and noise levels.
ScenarioSpec default_spec(const std::string& scenario_id);

// Deterministic given (spec.seed, replicate): changepoints from the Poisson
// layout (draws closer than 3 steps merged, keeping the earlier time and
// summing the jumps), per-segment parameters from the uniform ranges, the
// clean series from the decay recursion, plus i.i.d. Gaussian noise.
GroundTruth generate(const ScenarioSpec& spec, std::uint64_t replicate = 0);

// Wraps the noisy draw as an hourly SoilSeries starting at epoch 0.
SoilSeries to_soil_series(const GroundTruth& truth, std::int64_t step_seconds = 3600);

// Deterministic stream for simulation draws: mt19937_64 with documented
// transforms (inverse-CDF exponential, Box-Muller normal), so a fixed
// (seed, stream) reproduces bit-identical series.
class SplitRng {
 public:
  SplitRng(std::uint64_t seed, std::uint64_t stream);

  double uniform01();  // [0, 1) with 53-bit resolution
  double uniform(const UniformRange& range);
  double exponential(double rate);
  double normal(double sd);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace drydown
