#include "holo/hull.hpp"

#include <cmath>

namespace holo {

std::optional<std::vector<double>> convex_combination(const std::vector<Vec>& points,
                                                      const Vec& target, double tol) {
  const std::size_t d = target.size();
  const std::size_t k = points.size();
  if (k == 0) return std::nullopt;
  for (const Vec& p : points) {
    if (p.size() != d) throw DimensionError("convex_combination: point dimension mismatch");
  }

  // Tableau rows: d coordinate equations and the normalization row.
  // Columns: k weights, rows artificials, rhs.
  const std::size_t rows = d + 1;
  const std::size_t cols = k + rows + 1;
  std::vector<double> tab(rows * cols, 0.0);
  auto at = [&](std::size_t r, std::size_t c) -> double& { return tab[r * cols + c]; };
  for (std::size_t r = 0; r < rows; ++r) {
    double rhs = r < d ? target[r] : 1.0;
    const double sign = rhs < 0 ? -1.0 : 1.0;
    for (std::size_t c = 0; c < k; ++c) at(r, c) = sign * (r < d ? points[c][r] : 1.0);
    at(r, k + r) = 1.0;
    at(r, cols - 1) = sign * rhs;
  }
  std::vector<std::size_t> basis(rows);
  for (std::size_t r = 0; r < rows; ++r) basis[r] = k + r;

  // Phase-one objective: minimize the sum of artificials. Reduced costs of
  // the structural columns are minus the column sums.
  std::vector<double> cost(cols, 0.0);
  for (std::size_t c = 0; c < cols; ++c) {
    if (c >= k && c < k + rows) continue;
    double s = 0.0;
    for (std::size_t r = 0; r < rows; ++r) s += at(r, c);
    cost[c] = -s;
  }

  const double eps = 1e-12;
  for (std::size_t iter = 0; iter < 50 * (k + rows); ++iter) {
    // Bland's rule: first improving column.
    std::size_t enter = cols;
    for (std::size_t c = 0; c + 1 < cols; ++c) {
      if (cost[c] < -eps) {
        enter = c;
        break;
      }
    }
    if (enter == cols) break;
    std::size_t leave = rows;
    double best = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
      const double a = at(r, enter);
      if (a > eps) {
        const double ratio = at(r, cols - 1) / a;
        if (leave == rows || ratio < best - eps ||
            (std::abs(ratio - best) <= eps && basis[r] < basis[leave])) {
          leave = r;
          best = ratio;
        }
      }
    }
    if (leave == rows) break;  // unbounded cannot happen in phase one
    const double piv = at(leave, enter);
    for (std::size_t c = 0; c < cols; ++c) at(leave, c) /= piv;
    for (std::size_t r = 0; r < rows; ++r) {
      if (r == leave) continue;
      const double f = at(r, enter);
      if (f == 0.0) continue;
      for (std::size_t c = 0; c < cols; ++c) at(r, c) -= f * at(leave, c);
    }
    const double f = cost[enter];
    for (std::size_t c = 0; c < cols; ++c) cost[c] -= f * at(leave, c);
    basis[leave] = enter;
  }

  std::vector<double> w(k, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    if (basis[r] < k) w[basis[r]] = std::max(0.0, at(r, cols - 1));
  }
  // Verify the combination directly rather than trusting the tableau.
  double sum = 0.0;
  Vec combo(d, 0.0);
  for (std::size_t c = 0; c < k; ++c) {
    sum += w[c];
    for (std::size_t r = 0; r < d; ++r) combo[r] += w[c] * points[c][r];
  }
  double residual = std::abs(sum - 1.0);
  for (std::size_t r = 0; r < d; ++r) residual = std::max(residual, std::abs(combo[r] - target[r]));
  double scale = 1.0;
  for (std::size_t r = 0; r < d; ++r) scale = std::max(scale, std::abs(target[r]));
  for (const Vec& p : points) scale = std::max(scale, sup_norm(p));
  if (residual > tol * scale) return std::nullopt;
  return w;
}

}  // namespace holo
