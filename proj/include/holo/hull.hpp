#pragma once

#include "holo/numcore.hpp"

#include <optional>
#include <vector>

namespace holo {

/// Convex weights expressing `target` as a combination of `points`, found by a
/// phase-one simplex on  sum w_i p_i = target, sum w_i = 1, w >= 0.
/// Returns nullopt when the system is infeasible (residual above `tol`).
std::optional<std::vector<double>> convex_combination(const std::vector<Vec>& points,
                                                      const Vec& target, double tol = 1e-9);

inline bool hull_contains(const std::vector<Vec>& points, const Vec& target, double tol = 1e-9) {
  return convex_combination(points, target, tol).has_value();
}

}  // namespace holo
