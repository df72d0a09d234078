#include "drydown/segment_cost.hpp"

#include "drydown/errors.hpp"

#include <cmath>
#include <string>

namespace drydown {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;
constexpr double kRssFloor = 1e-30;  // keeps log(rss/m) finite on exact fits

std::uint64_t pack_key(Eigen::Index start, Eigen::Index end) {
  return (static_cast<std::uint64_t>(start) << 32) | static_cast<std::uint64_t>(end);
}

CostEntry compute(const SoilSeries& series, Eigen::Index start, Eigen::Index end,
                  const FitConfig& config) {
  CostEntry entry;
  entry.start = start;
  entry.end = end;
  entry.fit = fit_segment(series.values.segment(start, end - start), config);
  entry.cost = entry.fit.converged ? profiled_gaussian_cost(end - start, entry.fit.rss)
                                   : kCostSentinel;
  return entry;
}

}  // namespace

double profiled_gaussian_cost(Eigen::Index m, double rss) {
  const double points = static_cast<double>(m);
  return points * (kLog2Pi + 1.0 + std::log(std::max(rss, kRssFloor) / points));
}

CostEntry segment_cost(const SoilSeries& series, Eigen::Index start, Eigen::Index end,
                       const FitConfig& config, Eigen::Index min_seg_len) {
  if (start < 0 || end > series.size() || end - start < std::max<Eigen::Index>(3, min_seg_len)) {
    throw ValidationError("invalid segment range [" + std::to_string(start) + "," +
                          std::to_string(end) + ")");
  }
  return compute(series, start, end, config);
}

const CostEntry& CostCache::cost(Eigen::Index start, Eigen::Index end) {
  if (start < 0 || end > series_->size() || end - start < 3) {
    throw ValidationError("invalid segment range [" + std::to_string(start) + "," +
                          std::to_string(end) + ")");
  }
  const std::uint64_t key = pack_key(start, end);
  bool have_warm = false;
  DecayParams warm{};
  double warm_rss_per_point = 0.0;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    if (enabled_) {
      auto it = entries_.find(key);
      if (it != entries_.end()) return *it->second;
    }
    if (warm_start_ && end - start > 3) {
      auto prev = entries_.find(pack_key(start, end - 1));
      if (prev != entries_.end() && prev->second->fit.converged) {
        have_warm = true;
        warm = prev->second->fit.params;
        warm_rss_per_point =
            prev->second->fit.rss / static_cast<double>(end - 1 - start);
      }
    }
  }

  CostEntry fresh;
  bool done = false;
  if (have_warm) {
    fresh.start = start;
    fresh.end = end;
    fresh.fit = fit_segment_from(series_->values.segment(start, end - start), config_, warm);
    const double per_point = fresh.fit.rss / static_cast<double>(end - start);
    if (fresh.fit.converged && per_point <= 4.0 * warm_rss_per_point + 1e-12) {
      fresh.cost = profiled_gaussian_cost(end - start, fresh.fit.rss);
      done = true;
    }
  }
  if (!done) {
    fresh = compute(*series_, start, end, config_);
    multistart_count_.fetch_add(1);
  }
  fit_count_.fetch_add(1);

  std::lock_guard<std::mutex> lock(mutex_);
  auto it = entries_.find(key);
  if (it == entries_.end()) {
    it = entries_.emplace(key, std::make_unique<CostEntry>(std::move(fresh))).first;
  } else if (!enabled_) {
    *it->second = std::move(fresh);
  }
  return *it->second;  // first insert wins on a duplicate race
}

std::size_t CostCache::size() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return entries_.size();
}

}  // namespace drydown
