#pragma once

// Sign split, cancellation subset, and Dorfler-with-cancellation marking on
// per-element error indicators.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace momadapt {

struct MarkingConfig {
  /// Refinement fraction c in (0, 1]; c = 1 marks everything that remains
  /// after cancellations have been accounted for.
  double fraction_c = 1.0;

  void validate() const {
    if (!(fraction_c > 0.0) || !(fraction_c <= 1.0))
      throw std::invalid_argument("MarkingConfig: fraction must be in (0,1]");
  }
};

/// Raised when the signed estimate is exactly zero: there is nothing to
/// mark and adaptation terminates.
struct ZeroEstimateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SignSplit {
  std::vector<int> t_plus;   ///< indicators sharing the sign of the estimate
  std::vector<int> t_minus;  ///< the rest, including exact zeros
};

/// Partition elements by whether their indicator increases or decreases the
/// magnitude of the signed estimate. Zero indicators go to t_minus.
inline SignSplit split_signs(const std::vector<double>& zeta) {
  if (zeta.empty()) throw std::invalid_argument("split_signs: empty input");
  const double total = std::accumulate(zeta.begin(), zeta.end(), 0.0);
  if (total == 0.0)
    throw ZeroEstimateError("split_signs: estimate is zero, nothing to mark");
  const double sign = total > 0.0 ? 1.0 : -1.0;
  SignSplit split;
  for (int k = 0; k < static_cast<int>(zeta.size()); ++k) {
    if (zeta[k] * sign > 0.0)
      split.t_plus.push_back(k);
    else
      split.t_minus.push_back(k);
  }
  return split;
}

/// Greedy maximal subset of t_plus whose aggregate indicator can be
/// cancelled against the aggregate of t_minus: ascending |zeta| prefix that
/// stays within the t_minus budget. Returned in ascending element order.
inline std::vector<int> cancellation_subset(const std::vector<double>& zeta,
                                            const SignSplit& split) {
  double budget = 0.0;
  for (int k : split.t_minus) budget += std::abs(zeta[k]);

  std::vector<int> order = split.t_plus;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const double za = std::abs(zeta[a]), zb = std::abs(zeta[b]);
    return za != zb ? za < zb : a < b;
  });

  std::vector<int> subset;
  double running = 0.0;
  for (int k : order) {
    if (running + std::abs(zeta[k]) > budget) break;
    running += std::abs(zeta[k]);
    subset.push_back(k);
  }
  std::sort(subset.begin(), subset.end());
  return subset;
}

/// Dorfler marking after the cancellation discount: the shortest descending
/// |zeta| prefix of t_plus minus the cancellation subset whose aggregate
/// reaches c times the estimate. Elements flagged unmarkable (saturated
/// order) are skipped and the next-largest candidates take their place; if
/// the target is then unreachable, all remaining candidates are returned.
inline std::vector<int> mark(const std::vector<double>& zeta,
                             const MarkingConfig& cfg,
                             const std::vector<bool>* markable = nullptr) {
  cfg.validate();
  if (markable && markable->size() != zeta.size())
    throw std::invalid_argument("mark: markable mask size mismatch");
  const SignSplit split = split_signs(zeta);
  const std::vector<int> cancelled = cancellation_subset(zeta, split);

  std::vector<int> candidates;
  for (int k : split.t_plus) {
    if (std::binary_search(cancelled.begin(), cancelled.end(), k)) continue;
    if (markable && !(*markable)[k]) continue;
    candidates.push_back(k);
  }
  std::sort(candidates.begin(), candidates.end(), [&](int a, int b) {
    const double za = std::abs(zeta[a]), zb = std::abs(zeta[b]);
    return za != zb ? za > zb : a < b;
  });

  const double total = std::accumulate(zeta.begin(), zeta.end(), 0.0);
  const double target = cfg.fraction_c * std::abs(total);
  std::vector<int> marked;
  double sum = 0.0;
  for (int k : candidates) {
    marked.push_back(k);
    sum += std::abs(zeta[k]);  // candidates share the sign of the estimate
    if (sum >= target) break;
  }
  std::sort(marked.begin(), marked.end());
  return marked;
}

}  // namespace momadapt
