#pragma once

#include "drydown/nls.hpp"
#include "drydown/timeseries.hpp"

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <unordered_map>

namespace drydown {

// Non-converged fits get this finite stand-in for an infinite cost so DP
// sums never overflow; anything above kInfiniteCostThreshold is treated as
// infinite. Finite costs are orders of magnitude below the threshold for any
// realistic series length.
inline constexpr double kCostSentinel = 1e12;
inline constexpr double kInfiniteCostThreshold = 1e11;

inline bool is_infinite_cost(double cost) { return cost > kInfiniteCostThreshold; }

// Cost of the segment covering values[start..end), i.e. the paper's
// Y_{start+1..end}: twice the profiled Gaussian negative log-likelihood
// m (log 2pi + 1 + log(rss/m)) of the fitted decay model.
struct CostEntry {
  Eigen::Index start = 0;  // exclusive changepoint
  Eigen::Index end = 0;    // inclusive endpoint
  double cost = kCostSentinel;
  FitResult fit;
};

// m (log 2pi + 1 + log(rss/m)); rss is floored at 1e-30 so exact fits stay
// finite.
double profiled_gaussian_cost(Eigen::Index m, double rss);

CostEntry segment_cost(const SoilSeries& series, Eigen::Index start, Eigen::Index end,
                       const FitConfig& config, Eigen::Index min_seg_len = 3);

// Memoizes segment costs by (start, end); the fit config is fixed per cache.
// Concurrent reads and inserts are serialized by a mutex; duplicate
// computation of a key is harmless (fits are pure) and the first insert wins.
class CostCache {
 public:
  // warm_start seeds the fit of (start, end) from the cached (start, end-1)
  // fit, falling back to the full gamma multi-start whenever the warm run
  // fails to converge or its per-point residual degrades noticeably. Off by
  // default: every fit then runs the full multi-start.
  CostCache(const SoilSeries& series, FitConfig config, bool enabled = true,
            bool warm_start = false)
      : series_(&series), config_(std::move(config)), enabled_(enabled),
        warm_start_(warm_start) {}

  const SoilSeries& series() const { return *series_; }
  const FitConfig& fit_config() const { return config_; }

  // Computes (or recalls) the cost of values[start..end); length >= 3.
  const CostEntry& cost(Eigen::Index start, Eigen::Index end);

  std::size_t fit_count() const { return fit_count_.load(); }
  // fits that ran the full gamma multi-start (cache misses without a usable
  // warm seed, plus warm rejections)
  std::size_t multistart_fit_count() const { return multistart_count_.load(); }
  std::size_t size() const;

 private:
  const SoilSeries* series_;
  FitConfig config_;
  bool enabled_;  // when false every query recomputes (entry storage stays, for stable refs)
  bool warm_start_;
  mutable std::mutex mutex_;
  std::unordered_map<std::uint64_t, std::unique_ptr<CostEntry>> entries_;
  std::atomic<std::size_t> fit_count_{0};
  std::atomic<std::size_t> multistart_count_{0};
};

}  // namespace drydown
