#include "drydown/simulation.hpp"

#include "drydown/errors.hpp"

#include <algorithm>
#include <cmath>

namespace drydown {

namespace {

constexpr Eigen::Index kMinSpacing = 3;  // closer draws are merged

struct RawChangepoint {
  Eigen::Index position;
  bool small_scale;
};

// Poisson process times on (from, to), rounded to the grid.
void append_poisson(std::vector<RawChangepoint>& out, SplitRng& rng, double rate,
                    Eigen::Index from, Eigen::Index to, bool small_scale) {
  if (rate <= 0.0) return;
  double t = static_cast<double>(from);
  while (true) {
    t += rng.exponential(rate);
    const auto pos = static_cast<Eigen::Index>(std::llround(t));
    if (pos >= to) break;
    if (pos > from) out.push_back({pos, small_scale});
  }
}

}  // namespace

SplitRng::SplitRng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(stream >> 32)};
  engine_.seed(seq);
}

double SplitRng::uniform01() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double SplitRng::uniform(const UniformRange& range) {
  return range.lo + (range.hi - range.lo) * uniform01();
}

double SplitRng::exponential(double rate) {
  double u = uniform01();
  while (u <= 0.0) u = uniform01();
  return -std::log(u) / rate;
}

double SplitRng::normal(double sd) {
  if (has_spare_) {
    has_spare_ = false;
    return spare_ * sd;
  }
  double u1 = uniform01();
  while (u1 <= 0.0) u1 = uniform01();
  const double u2 = uniform01();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * M_PI * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle) * sd;
}

ScenarioSpec default_spec(const std::string& scenario_id) {
  ScenarioSpec spec;
  spec.scenario_id = scenario_id;
  const bool high_noise = scenario_id.size() == 2 && scenario_id[1] == 'b';
  spec.noise_sd = high_noise ? 0.001 : 0.0005;
  if (scenario_id == "1a" || scenario_id == "1b") {
    spec.layout = ScenarioLayout::single;
    spec.rate_a = 0.003;
  } else if (scenario_id == "2a" || scenario_id == "2b") {
    spec.layout = ScenarioLayout::half_split;
    spec.rate_a = 0.002;
    spec.rate_b = 0.005;
    spec.jump_a = {0.10, 0.12};  // the half with fewer increases
    spec.jump_b = {0.05, 0.10};
  } else if (scenario_id == "3a" || scenario_id == "3b") {
    spec.layout = ScenarioLayout::nested;
    spec.rate_a = 0.002;
    spec.rate_b = 0.02;
    spec.phi_a = {0.98, 0.99};
    spec.phi_b = {0.95, 0.99};
    spec.jump_a = {0.10, 0.12};
    spec.jump_b = {0.01, 0.02};
  } else {
    throw ValidationError("unknown scenario id '" + scenario_id + "'");
  }
  return spec;
}

GroundTruth generate(const ScenarioSpec& spec, std::uint64_t replicate) {
  const Eigen::Index n = spec.length;
  if (n < 2 * kMinSpacing) throw ValidationError("series length too small to simulate");
  if (spec.noise_sd < 0.0) throw ValidationError("noise_sd must be >= 0");
  SplitRng rng(spec.seed, replicate);

  std::vector<RawChangepoint> raw;
  switch (spec.layout) {
    case ScenarioLayout::single:
      append_poisson(raw, rng, spec.rate_a, 0, n, false);
      break;
    case ScenarioLayout::half_split:
      append_poisson(raw, rng, spec.rate_a, 0, n / 2, false);
      append_poisson(raw, rng, spec.rate_b, n / 2, n, false);
      break;
    case ScenarioLayout::nested: {
      append_poisson(raw, rng, spec.rate_a, 0, n, false);
      // Host the fast process inside the longest drying period.
      Eigen::Index gap_start = 0, gap_len = 0, prev = 0;
      for (std::size_t i = 0; i <= raw.size(); ++i) {
        const Eigen::Index bound = i < raw.size() ? raw[i].position : n;
        if (bound - prev > gap_len) {
          gap_len = bound - prev;
          gap_start = prev;
        }
        prev = bound;
      }
      append_poisson(raw, rng, spec.rate_b, gap_start, gap_start + gap_len, true);
      std::sort(raw.begin(), raw.end(),
                [](const RawChangepoint& a, const RawChangepoint& b) {
                  return a.position < b.position;
                });
      break;
    }
  }

  // Keep changepoints clear of the boundaries, then draw jumps and merge
  // draws that landed within kMinSpacing of each other (earlier time and its
  // scale win; jump sizes add).
  std::erase_if(raw, [n](const RawChangepoint& c) {
    return c.position < kMinSpacing || c.position > n - kMinSpacing;
  });

  GroundTruth truth;
  std::vector<double> jumps;
  for (const RawChangepoint& c : raw) {
    const UniformRange& range = spec.layout == ScenarioLayout::single ? spec.jump_a
                                : spec.layout == ScenarioLayout::half_split
                                    ? (c.position < n / 2 ? spec.jump_a : spec.jump_b)
                                    : (c.small_scale ? spec.jump_b : spec.jump_a);
    jumps.push_back(rng.uniform(range));
  }
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (!truth.changepoints.empty() &&
        raw[i].position - truth.changepoints.back() < kMinSpacing) {
      truth.jumps.back() += jumps[i];
      continue;
    }
    truth.changepoints.push_back(raw[i].position);
    truth.small_scale.push_back(raw[i].small_scale);
    truth.jumps.push_back(jumps[i]);
  }

  // Per-segment parameters and the clean decay recursion.
  const auto phi_range = [&](Eigen::Index seg_start, bool small_scale) {
    if (spec.layout == ScenarioLayout::nested) {
      return small_scale ? spec.phi_b : spec.phi_a;
    }
    return seg_start < n / 2 ? spec.phi_a : spec.phi_b;
  };

  truth.clean.resize(n);
  truth.noisy.resize(n);
  const std::size_t n_segments = truth.changepoints.size() + 1;
  double prev_level = 0.0;
  for (std::size_t i = 0; i < n_segments; ++i) {
    TrueSegment seg;
    seg.start = i == 0 ? 0 : truth.changepoints[i - 1];
    seg.end = i < truth.changepoints.size() ? truth.changepoints[i] : n;
    seg.small_scale = i > 0 && truth.small_scale[i - 1];
    seg.phi = rng.uniform(phi_range(seg.start, seg.small_scale));
    seg.gamma = gamma_of_phi(seg.phi);

    if (i == 0) {
      // The series opens mid-decay, as if a jump had just occurred.
      seg.alpha0 = rng.uniform(spec.asymptote);
      seg.alpha1 = rng.uniform(spec.jump_a);
    } else {
      // The observed increase equals the drawn jump: the peak value
      // prev + jump sits at offset 1, so alpha1 = (prev + jump - alpha0)/phi.
      // Resample alpha0 when the draw would leave too little amplitude.
      const double jump = truth.jumps[i - 1];
      double alpha0 = 0.0, alpha1 = -1.0;
      for (int tries = 0; tries < 1000 && alpha1 < 0.25 * jump; ++tries) {
        alpha0 = rng.uniform(spec.asymptote);
        alpha1 = (prev_level + jump - alpha0) / seg.phi;
      }
      seg.alpha0 = alpha0;
      seg.alpha1 = alpha1;
    }

    double level = seg.alpha0 + seg.alpha1;  // latent value at offset 0
    for (Eigen::Index t = seg.start; t < seg.end; ++t) {
      level = seg.alpha0 + seg.phi * (level - seg.alpha0);
      truth.clean[t] = level;
    }
    prev_level = level;
    truth.segments.push_back(seg);
  }

  for (Eigen::Index t = 0; t < n; ++t) {
    truth.noisy[t] = truth.clean[t] + (spec.noise_sd > 0.0 ? rng.normal(spec.noise_sd) : 0.0);
  }
  return truth;
}

SoilSeries to_soil_series(const GroundTruth& truth, std::int64_t step_seconds) {
  SoilSeries series;
  series.start_time = 0;
  series.step = step_seconds;
  series.values = truth.noisy;
  series.interpolated = BoolArray::Constant(truth.noisy.size(), false);
  series.source_id = "simulated";
  return series;
}

}  // namespace drydown
