#pragma once

#include "revloc/core.hpp"

#include <limits>
#include <utility>

namespace revloc {

/// Minimum-cost perfect matching on a square cost matrix (Hungarian method
/// with row/column potentials, O(n^3)). Returns assignment[row] = column.
template <typename Derived>
std::vector<Eigen::Index> min_cost_assignment(const Eigen::MatrixBase<Derived>& cost) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = cost.rows();
  if (cost.cols() != n) throw ContractError("min_cost_assignment: cost matrix must be square");
  const Scalar inf = std::numeric_limits<Scalar>::infinity();

  // 1-based bookkeeping; column 0 is a virtual start column.
  std::vector<Scalar> u(n + 1, 0), v(n + 1, 0), minv(n + 1);
  std::vector<Eigen::Index> match(n + 1, 0), way(n + 1, 0);
  std::vector<bool> used(n + 1);
  for (Eigen::Index i = 1; i <= n; ++i) {
    match[0] = i;
    Eigen::Index j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), false);
    do {
      used[j0] = true;
      const Eigen::Index i0 = match[j0];
      Scalar delta = inf;
      Eigen::Index j1 = 0;
      for (Eigen::Index j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const Scalar cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (Eigen::Index j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const Eigen::Index j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<Eigen::Index> assignment(static_cast<std::size_t>(n));
  for (Eigen::Index j = 1; j <= n; ++j) assignment[static_cast<std::size_t>(match[j] - 1)] = j - 1;
  return assignment;
}

template <typename Scalar>
struct TrialReport {
  /// Mean Euclidean error over the optimally matched pairs.
  Scalar le_m = 0;
  std::vector<Scalar> per_source_errors;
  /// (truth index, estimate index), one per true source, in truth order.
  std::vector<std::pair<std::size_t, std::size_t>> matched_pairs;
  bool support_exact = false;
  Scalar beta_energy_fraction = 0;
};

/// Localization error under the minimum-total-distance matching of
/// estimates to true sources.
template <typename Scalar>
TrialReport<Scalar> localization_error(std::span<const Position<Scalar>> truth,
                                       std::span<const Position<Scalar>> est,
                                       Scalar exact_tolerance = Scalar(1e-9)) {
  if (truth.size() != est.size() || truth.empty()) {
    throw ContractError("localization_error: need equal, non-empty position lists");
  }
  const auto n = static_cast<Eigen::Index>(truth.size());
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> dist(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) dist(i, j) = (truth[i] - est[j]).norm();
  }
  const auto assignment = min_cost_assignment(dist);

  TrialReport<Scalar> report;
  Scalar total = 0;
  report.support_exact = true;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index j = assignment[static_cast<std::size_t>(i)];
    const Scalar e = dist(i, j);
    report.per_source_errors.push_back(e);
    report.matched_pairs.emplace_back(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
    report.support_exact = report.support_exact && e <= exact_tolerance;
    total += e;
  }
  report.le_m = total / Scalar(n);
  return report;
}

template <typename Scalar>
TrialReport<Scalar> localization_error(const std::vector<Position<Scalar>>& truth,
                                       const std::vector<Position<Scalar>>& est) {
  return localization_error<Scalar>(std::span<const Position<Scalar>>(truth),
                                    std::span<const Position<Scalar>>(est));
}

/// Scores a result against ground truth and copies the error into it.
template <typename Scalar>
TrialReport<Scalar> score(LocalizationResult<Scalar>& result,
                          const std::vector<Position<Scalar>>& truth) {
  TrialReport<Scalar> report = localization_error(truth, result.estimated_positions);
  report.beta_energy_fraction = result.diagnostics.beta_energy_fraction;
  result.localization_error_m = report.le_m;
  return report;
}

}  // namespace revloc
