#include "drydown/evaluation.hpp"

#include "drydown/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

namespace drydown {

namespace {

// Classic Hungarian algorithm with row/column potentials, O(rows^2 cols);
// rows <= cols required. Returns the column assigned to each row.
std::vector<int> hungarian(const MatrixXd& cost) {
  const int rows = static_cast<int>(cost.rows());
  const int cols = static_cast<int>(cost.cols());
  std::vector<double> u(rows + 1, 0.0), v(cols + 1, 0.0);
  std::vector<int> match_col(cols + 1, 0);  // 1-based; 0 = unmatched
  std::vector<int> way(cols + 1, 0);

  for (int i = 1; i <= rows; ++i) {
    match_col[0] = i;
    int j0 = 0;
    std::vector<double> min_v(cols + 1, std::numeric_limits<double>::infinity());
    std::vector<bool> used(cols + 1, false);
    do {
      used[j0] = true;
      const int i0 = match_col[j0];
      double delta = std::numeric_limits<double>::infinity();
      int j1 = 0;
      for (int j = 1; j <= cols; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < min_v[j]) {
          min_v[j] = cur;
          way[j] = j0;
        }
        if (min_v[j] < delta) {
          delta = min_v[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= cols; ++j) {
        if (used[j]) {
          u[match_col[j]] += delta;
          v[j] -= delta;
        } else {
          min_v[j] -= delta;
        }
      }
      j0 = j1;
    } while (match_col[j0] != 0);
    do {
      const int j1 = way[j0];
      match_col[j0] = match_col[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<int> row_to_col(rows, -1);
  for (int j = 1; j <= cols; ++j) {
    if (match_col[j] >= 1) row_to_col[match_col[j] - 1] = j - 1;
  }
  return row_to_col;
}

double rmse(const VectorXd& a, const VectorXd& b) {
  if (a.size() != b.size()) throw ValidationError("length mismatch in RMSE");
  if (a.size() == 0) return 0.0;
  return std::sqrt((a - b).squaredNorm() / static_cast<double>(a.size()));
}

void require_covers(const Segmentation& segmentation, Eigen::Index n) {
  Eigen::Index expected = 0;
  for (const SegmentRecord& seg : segmentation.segments) {
    if (seg.start != expected) break;
    expected = seg.end;
  }
  if (expected != n) {
    throw ValidationError("segmentation does not cover a series of length " +
                          std::to_string(n));
  }
}

}  // namespace

MatchReport match_rates(const std::vector<Eigen::Index>& truth,
                        const std::vector<Eigen::Index>& detected, int window,
                        Eigen::Index n) {
  MatchReport report;
  report.window = window;

  // Greedy nearest-first; ties broken by true index, then detected index.
  const auto run_matching = [&](bool exact) {
    std::vector<std::tuple<Eigen::Index, std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      for (std::size_t j = 0; j < detected.size(); ++j) {
        const Eigen::Index d = std::abs(truth[i] - detected[j]);
        if (exact ? d == 0 : d < window) pairs.emplace_back(d, i, j);
      }
    }
    std::sort(pairs.begin(), pairs.end());
    std::vector<bool> truth_used(truth.size(), false), det_used(detected.size(), false);
    std::vector<std::pair<Eigen::Index, Eigen::Index>> matched;
    for (const auto& [d, i, j] : pairs) {
      if (truth_used[i] || det_used[j]) continue;
      truth_used[i] = true;
      det_used[j] = true;
      matched.emplace_back(truth[i], detected[j]);
    }
    return matched;
  };

  const auto matched_exact = run_matching(true);
  report.matched = run_matching(false);

  const double n_true = static_cast<double>(truth.size());
  const double n_det = static_cast<double>(detected.size());
  const double negatives = static_cast<double>(n) - n_true;
  report.tp_exact = truth.empty() ? 1.0 : static_cast<double>(matched_exact.size()) / n_true;
  report.tp_window = truth.empty() ? 1.0 : static_cast<double>(report.matched.size()) / n_true;
  report.fp_exact =
      negatives > 0 ? (n_det - static_cast<double>(matched_exact.size())) / negatives : 0.0;
  report.fp_window =
      negatives > 0 ? (n_det - static_cast<double>(report.matched.size())) / negatives : 0.0;
  return report;
}

DistanceReport changepoint_distance(const std::vector<Eigen::Index>& truth,
                                    const std::vector<Eigen::Index>& detected,
                                    Eigen::Index n) {
  if (n <= 0) throw ValidationError("series length must be positive");
  DistanceReport report;
  report.m = static_cast<Eigen::Index>(truth.size());
  report.k = static_cast<Eigen::Index>(detected.size());
  report.distance = static_cast<double>(std::abs(report.m - report.k));
  if (truth.empty() || detected.empty()) return report;

  // Assign the smaller set into the larger; the |m-k| term already accounts
  // for the unmatched remainder.
  const bool truth_smaller = truth.size() <= detected.size();
  const auto& small = truth_smaller ? truth : detected;
  const auto& large = truth_smaller ? detected : truth;
  MatrixXd cost(small.size(), large.size());
  for (std::size_t i = 0; i < small.size(); ++i) {
    for (std::size_t j = 0; j < large.size(); ++j) {
      cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          static_cast<double>(std::abs(small[i] - large[j])) / static_cast<double>(n);
    }
  }
  const std::vector<int> row_to_col = hungarian(cost);
  double assignment_cost = 0.0;
  for (std::size_t i = 0; i < small.size(); ++i) {
    const int j = row_to_col[i];
    assignment_cost += cost(static_cast<Eigen::Index>(i), j);
    const Eigen::Index ti = truth_smaller ? static_cast<Eigen::Index>(i) : j;
    const Eigen::Index dj = truth_smaller ? j : static_cast<Eigen::Index>(i);
    report.assignment.emplace_back(ti, dj);
  }
  report.distance += assignment_cost;
  return report;
}

double rmse_fit(const GroundTruth& truth, const Segmentation& segmentation) {
  const Eigen::Index n = truth.clean.size();
  require_covers(segmentation, n);
  return rmse(fitted_series(segmentation, n), truth.clean);
}

VectorXd true_gamma_track(const GroundTruth& truth) {
  const Eigen::Index n = truth.clean.size();
  VectorXd track(n);
  for (const TrueSegment& seg : truth.segments) {
    track.segment(seg.start, seg.end - seg.start).setConstant(seg.gamma);
  }
  return track;
}

double rmse_gamma(const GroundTruth& truth, const Segmentation& segmentation) {
  const Eigen::Index n = truth.clean.size();
  require_covers(segmentation, n);
  return rmse(gamma_track(segmentation, n), true_gamma_track(truth));
}

}  // namespace drydown
