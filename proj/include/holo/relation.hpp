#pragma once

// The holonomic approximation relation R_ha(sigma, eps) inside
// J^1(R^m, R x R^n): membership, principal slices in direction e_j and their
// closed-form hyperbola geometry, and explicit ampleness certificates.

#include "holo/jetmodel.hpp"
#include "holo/numcore.hpp"

#include <span>
#include <vector>

namespace holo {

/// (x, (y, w), (Y, W)) in J^1(R^m, R x R^n).
struct JetPoint {
  Vec x;  ///< m
  double y = 0.0;
  Vec w;  ///< n
  Vec Y;  ///< m, the linear form d(delta-part)
  Mat W;  ///< n x m
};

enum class Clause { Height = 0, Value = 1, Derivative = 2 };

struct RhaVerdict {
  bool member = false;
  double margin = 0.0;  ///< eps minus the worst attained value
  double height = 0.0;  ///< |y|
  double value = 0.0;   ///< |w - f(x,y,0)|_sup
  double derivative = 0.0;  ///< restricted operator norm
  Clause worst = Clause::Height;
};

RhaVerdict rha_member(const JetSection& sigma, double eps, const JetPoint& p);

/// Restricted operator norm of (W o p_m - phi(x,y,0)) on Gamma_Y x {0}, Euclidean
/// source and sup-norm target. `phi` is n x (m+1+k).
double restricted_norm(const Mat& W, const Vec& Y, const Mat& phi);

struct SliceSpec {
  Vec lambda;  ///< m-1
  Mat psi;     ///< n x (m-1)
  double eps = 1.0;
};

/// Affine identification of a principal subspace with R x R^n:
/// a = Y_j, b = W_j - a phi_y - phi_xj.
struct SliceChart {
  Vec phi_y;   ///< n
  Vec phi_xj;  ///< n

  /// (Y_j, W_j) -> (a, b).
  std::pair<double, Vec> to_slice(double Yj, const Vec& Wj) const;
  /// (a, b) -> (Y_j, W_j).
  std::pair<double, Vec> from_slice(double a, const Vec& b) const;
};

struct SliceFrame {
  SliceSpec spec;
  SliceChart chart;
};

/// Slice of R_ha through `base` along the principal subspace of maps agreeing
/// with base's (Y, W) on e_j^perp (j zero-based).
SliceFrame slice_from_state(const JetSection& sigma, double eps, const JetPoint& base, int j);

/// Generic-scalar version used by the solver; phi is row-major n x (m+1+k)
/// evaluated at (x, y, 0). Outputs lambda (m-1), psi (n x (m-1), row-major),
/// phi_y (n), phi_xj (n).
template <typename T>
void slice_frame_kernel(int m, int n, int source, int j, std::span<const T> phi,
                        std::span<const T> Y, std::span<const T> W, std::vector<T>& lambda,
                        std::vector<T>& psi, std::vector<T>& phi_y, std::vector<T>& phi_xj) {
  lambda.clear();
  psi.clear();
  phi_y.clear();
  phi_xj.clear();
  for (int c = 0; c < m; ++c)
    if (c != j) lambda.push_back(Y[std::size_t(c)]);
  for (int r = 0; r < n; ++r) {
    const T& py = phi[std::size_t(r * source + m)];
    phi_y.push_back(py);
    phi_xj.push_back(phi[std::size_t(r * source + j)]);
    for (int c = 0; c < m; ++c) {
      if (c == j) continue;
      psi.push_back(W[std::size_t(r * m + c)] - phi[std::size_t(r * source + c)] - py * Y[std::size_t(c)]);
    }
  }
}

/// How the three inner products of the hyperbola computation are obtained.
enum class SliceBranch {
  Trivial,      ///< m = 1: lambda and psi are empty
  ZeroLambda,   ///< lambda = 0
  Collinear,    ///< mu = k lambda
  Independent,  ///< lambda, mu independent: 2x2 formulas on span(lambda, mu)
};

/// Data of one component slice {(b - m0 a)^2 - kappa^2 a^2 < eta^2}.
struct HyperbolaParams {
  double m0 = 0.0;
  double kappa = 0.0;
  double eta = 0.0;
  double K = 0.0;    ///< rescaled (eps = 1) quadratic coefficient
  double det = 0.0;  ///< determinant of A on span(lambda, mu)
  bool empty = true;
  SliceBranch branch = SliceBranch::Trivial;
};

template <typename T>
struct SliceProducts {
  T det;  ///< A restricted to span(lambda, mu)
  T ll;   ///< <lambda, A^-1 lambda>
  T mm;   ///< <mu, A^-1 mu>
  T lm;   ///< <lambda, A^-1 mu>
};

/// Inner products for the eps = 1 problem with mu already rescaled.
template <typename T>
SliceProducts<T> slice_products(std::span<const T> lambda, std::span<const T> mu, SliceBranch branch) {
  T L = T(0.0), M = T(0.0), p = T(0.0);
  for (std::size_t i = 0; i < lambda.size(); ++i) {
    L = L + lambda[i] * lambda[i];
    M = M + mu[i] * mu[i];
    p = p + mu[i] * lambda[i];
  }
  switch (branch) {
    case SliceBranch::Trivial: return {T(1.0), T(0.0), T(0.0), T(0.0)};
    case SliceBranch::ZeroLambda: {
      const T det = 1.0 - M;
      return {det, T(0.0), M / det, T(0.0)};
    }
    case SliceBranch::Collinear: {
      // mu = k lambda, so A lambda = (1 + (1 - k^2)|lambda|^2) lambda.
      const T k = p / L;
      const T det = 1.0 + (1.0 - k * k) * L;
      return {det, L / det, k * k * L / det, k * L / det};
    }
    case SliceBranch::Independent: {
      const T det = (1.0 + L) * (1.0 - M) + p * p;
      return {det, ((1.0 - M) * L + p * p) / det, ((1.0 + L) * M - p * p) / det, p / det};
    }
  }
  return {T(1.0), T(0.0), T(0.0), T(0.0)};
}

template <typename T>
struct HyperbolaT {
  T m0, kappa, eta, K, det;
};

/// Hyperbola data of Omega_{lambda, mu, eps} (mu unscaled) through the given
/// branch. Callers must check det > 0 first; the result is meaningless
/// otherwise.
template <typename T>
HyperbolaT<T> hyperbola_kernel(std::span<const T> lambda, std::span<const T> mu, double eps,
                               SliceBranch branch) {
  std::vector<T> scaled(mu.begin(), mu.end());
  for (T& v : scaled) v = v * (1.0 / eps);
  const SliceProducts<T> s = slice_products<T>(lambda, scaled, branch);
  using std::sqrt;
  const T N2 = 1.0 + s.mm;
  const T K = 1.0 + s.lm * s.lm / N2 - s.ll;
  const T N = sqrt(N2);
  return {eps * s.lm / N2, eps * sqrt(K) / N, eps / N, K, s.det};
}

/// Branch selected by the collinearity test (relative threshold `collinear_tol`).
SliceBranch choose_branch(const Vec& lambda, const Vec& mu, double collinear_tol = 1e-10);

HyperbolaParams hyperbola_params(const Vec& lambda, const Vec& mu, double eps);
HyperbolaParams hyperbola_params(const Vec& lambda, const Vec& mu, double eps, SliceBranch branch);

struct SliceGeometry {
  std::vector<HyperbolaParams> components;
  bool empty = true;
  Vec m0;             ///< per-component m0
  double kappa = 0.0; ///< min over components
  double eta = 0.0;   ///< min over components
};

SliceGeometry slice_geometry(const SliceSpec& spec);

struct SliceVerdict {
  bool member = false;
  /// max_j of (b_j - m0_j a)^2 - kappa_j^2 a^2 - eta_j^2; negative inside.
  double excess = 0.0;
};

SliceVerdict slice_member(const SliceSpec& spec, double a, const Vec& b);
SliceVerdict slice_member(const SliceGeometry& geometry, double a, const Vec& b);

/// Whether (a, b) lies in the inner set {|b - a m0|_sup^2 - kappa^2 a^2 < eta^2}.
bool inner_member(const SliceGeometry& g, double a, const Vec& b);

struct AmplenessCertificate {
  Vec m0;
  double kappa = 0.0;
  double eta = 0.0;
  double kappa_used = 0.0;  ///< asymptote slope of the point set, < kappa
  double half_length = 0.0; ///< |a| of the point set
  std::vector<Vec> points;  ///< each (a, b_1..b_n)
  bool points_in_inner = false;
  bool points_in_slice = false;
  bool hull_verified = false;
  std::size_t lp_checks = 0;
};

/// Finite subset of the inner hyperbolic set whose convex hull contains the
/// box (hence the ball) of radius `radius` around `target` = (a, b_1..b_n).
/// Throws Error for an empty slice.
AmplenessCertificate ampleness_certificate(const SliceSpec& spec, const Vec& target, double radius,
                                           double kappa_fraction = 0.5);

}  // namespace holo
