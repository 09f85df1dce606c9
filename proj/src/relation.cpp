#include "holo/relation.hpp"

#include "holo/hull.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace holo {

namespace {

std::vector<double> jet_slots(const Dims& d, const Vec& x, double y) {
  std::vector<double> slots(std::size_t(d.source()), 0.0);
  for (int i = 0; i < d.m; ++i) slots[std::size_t(i)] = x[std::size_t(i)];
  slots[std::size_t(d.m)] = y;
  return slots;
}

void check_point(const Dims& d, const JetPoint& p) {
  const auto m = std::size_t(d.m), n = std::size_t(d.n);
  if (p.x.size() != m || p.Y.size() != m || p.w.size() != n || p.W.rows() != n || p.W.cols() != m)
    throw DimensionError("jet point dimensions do not match the section");
}

}  // namespace

double restricted_norm(const Mat& W, const Vec& Y, const Mat& phi) {
  const std::size_t m = W.cols();
  if (Y.size() != m || phi.rows() != W.rows() || phi.cols() < m + 1)
    throw DimensionError("restricted_norm: dimension mismatch");
  double worst = 0.0;
  Vec r(m);
  for (std::size_t j = 0; j < W.rows(); ++j) {
    for (std::size_t c = 0; c < m; ++c) r[c] = W(j, c) - phi(j, c) - phi(j, m) * Y[c];
    worst = std::max(worst, std::sqrt(rank_one_inverse_quadratic(r, Y)));
  }
  return worst;
}

RhaVerdict rha_member(const JetSection& sigma, double eps, const JetPoint& p) {
  if (!(eps > 0.0)) throw Error("rha_member: eps must be positive");
  const Dims& d = sigma.dims();
  check_point(d, p);
  const auto slots = jet_slots(d, p.x, p.y);
  const Vec f = sigma.f_value(slots);
  const Mat phi = sigma.phi_value(slots);

  RhaVerdict v;
  v.height = std::abs(p.y);
  v.value = sup_norm(p.w - f);
  v.derivative = restricted_norm(p.W, p.Y, phi);
  double worst = v.height;
  v.worst = Clause::Height;
  if (v.value > worst) {
    worst = v.value;
    v.worst = Clause::Value;
  }
  if (v.derivative > worst) {
    worst = v.derivative;
    v.worst = Clause::Derivative;
  }
  v.margin = eps - worst;
  v.member = v.margin > 0.0;
  return v;
}

std::pair<double, Vec> SliceChart::to_slice(double Yj, const Vec& Wj) const {
  Vec b = Wj - phi_xj;
  b -= Yj * phi_y;
  return {Yj, std::move(b)};
}

std::pair<double, Vec> SliceChart::from_slice(double a, const Vec& b) const {
  Vec W = b + phi_xj;
  W += a * phi_y;
  return {a, std::move(W)};
}

SliceFrame slice_from_state(const JetSection& sigma, double eps, const JetPoint& base, int j) {
  const Dims& d = sigma.dims();
  check_point(d, base);
  if (j < 0 || j >= d.m) throw DimensionError("slice_from_state: direction out of range");
  if (!(eps > 0.0)) throw Error("slice_from_state: eps must be positive");
  const auto slots = jet_slots(d, base.x, base.y);
  const auto phi = sigma.phi_at<double>(slots);
  std::vector<double> W(std::size_t(d.n * d.m));
  for (int r = 0; r < d.n; ++r)
    for (int c = 0; c < d.m; ++c) W[std::size_t(r * d.m + c)] = base.W(std::size_t(r), std::size_t(c));

  std::vector<double> lambda, psi, phi_y, phi_xj;
  slice_frame_kernel<double>(d.m, d.n, d.source(), j, phi, base.Y.span(), W, lambda, psi, phi_y,
                             phi_xj);
  SliceFrame frame;
  frame.spec.lambda = Vec(std::move(lambda));
  frame.spec.psi = Mat(std::size_t(d.n), std::size_t(d.m - 1));
  for (int r = 0; r < d.n; ++r)
    for (int c = 0; c < d.m - 1; ++c)
      frame.spec.psi(std::size_t(r), std::size_t(c)) = psi[std::size_t(r * (d.m - 1) + c)];
  frame.spec.eps = eps;
  frame.chart.phi_y = Vec(std::move(phi_y));
  frame.chart.phi_xj = Vec(std::move(phi_xj));
  return frame;
}

SliceBranch choose_branch(const Vec& lambda, const Vec& mu, double collinear_tol) {
  if (lambda.size() != mu.size()) throw DimensionError("choose_branch: dimension mismatch");
  if (lambda.empty()) return SliceBranch::Trivial;
  const double L = dot(lambda, lambda), M = dot(mu, mu), p = dot(lambda, mu);
  if (L <= 1e-20 * std::max(1.0, M)) return SliceBranch::ZeroLambda;
  if (M == 0.0 || L * M - p * p <= collinear_tol * L * M) return SliceBranch::Collinear;
  return SliceBranch::Independent;
}

HyperbolaParams hyperbola_params(const Vec& lambda, const Vec& mu, double eps, SliceBranch branch) {
  if (!(eps > 0.0)) throw Error("hyperbola_params: eps must be positive");
  if (lambda.size() != mu.size()) throw DimensionError("hyperbola_params: dimension mismatch");
  HyperbolaParams out;
  out.branch = branch;
  const auto h = hyperbola_kernel<double>(lambda.span(), mu.span(), eps, branch);
  out.det = h.det;
  if (!(h.det > 0.0) || !(h.K > 0.0) || !std::isfinite(h.kappa) || !std::isfinite(h.eta)) {
    out.empty = true;
    return out;
  }
  out.empty = false;
  out.m0 = h.m0;
  out.kappa = h.kappa;
  out.eta = h.eta;
  out.K = h.K;
  return out;
}

HyperbolaParams hyperbola_params(const Vec& lambda, const Vec& mu, double eps) {
  return hyperbola_params(lambda, mu, eps, choose_branch(lambda, (1.0 / eps) * mu));
}

SliceGeometry slice_geometry(const SliceSpec& spec) {
  if (spec.psi.cols() != spec.lambda.size()) throw DimensionError("slice_geometry: psi and lambda disagree");
  SliceGeometry g;
  g.empty = false;
  g.kappa = std::numeric_limits<double>::infinity();
  g.eta = std::numeric_limits<double>::infinity();
  g.m0 = Vec(spec.psi.rows());
  for (std::size_t j = 0; j < spec.psi.rows(); ++j) {
    HyperbolaParams h = hyperbola_params(spec.lambda, spec.psi.row(j), spec.eps);
    if (h.empty) g.empty = true;
    g.m0[j] = h.m0;
    g.kappa = std::min(g.kappa, h.kappa);
    g.eta = std::min(g.eta, h.eta);
    g.components.push_back(h);
  }
  if (g.empty) {
    g.kappa = 0.0;
    g.eta = 0.0;
  }
  return g;
}

SliceVerdict slice_member(const SliceGeometry& g, double a, const Vec& b) {
  if (b.size() != g.components.size()) throw DimensionError("slice_member: b has wrong dimension");
  SliceVerdict v;
  if (g.empty) {
    v.excess = std::numeric_limits<double>::infinity();
    return v;
  }
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < b.size(); ++j) {
    const HyperbolaParams& h = g.components[j];
    const double s = b[j] - h.m0 * a;
    worst = std::max(worst, s * s - h.kappa * h.kappa * a * a - h.eta * h.eta);
  }
  v.excess = worst;
  v.member = worst < 0.0;
  return v;
}

SliceVerdict slice_member(const SliceSpec& spec, double a, const Vec& b) {
  return slice_member(slice_geometry(spec), a, b);
}

bool inner_member(const SliceGeometry& g, double a, const Vec& b) {
  if (g.empty) return false;
  double s = 0.0;
  for (std::size_t j = 0; j < b.size(); ++j) s = std::max(s, std::abs(b[j] - a * g.m0[j]));
  return s * s - g.kappa * g.kappa * a * a < g.eta * g.eta;
}

AmplenessCertificate ampleness_certificate(const SliceSpec& spec, const Vec& target, double radius,
                                           double kappa_fraction) {
  const SliceGeometry g = slice_geometry(spec);
  if (g.empty) throw Error("ampleness_certificate: the slice is empty");
  const std::size_t n = spec.psi.rows();
  if (target.size() != n + 1) throw DimensionError("ampleness_certificate: target must be (a, b_1..b_n)");
  if (!(radius >= 0.0)) throw Error("ampleness_certificate: radius must be non-negative");
  if (!(kappa_fraction > 0.0 && kappa_fraction < 1.0))
    throw Error("ampleness_certificate: kappa fraction must lie in (0, 1)");

  AmplenessCertificate cert;
  cert.m0 = g.m0;
  cert.kappa = g.kappa;
  cert.eta = g.eta;
  cert.kappa_used = kappa_fraction * g.kappa;

  // Sheared coordinates b' = b - a m0 turn the inner set into a cone-like
  // region containing the box [-T, T] x [-kappa' T, kappa' T]^n.
  const double ag = target[0];
  double spread = 0.0;
  for (std::size_t j = 0; j < n; ++j)
    spread = std::max(spread, std::abs(target[j + 1] - ag * g.m0[j]) + radius * (1.0 + std::abs(g.m0[j])));
  const double T = std::max({std::abs(ag) + radius, spread / cert.kappa_used, 1e-12}) * (1.0 + 1e-9);
  cert.half_length = T;

  const std::size_t corners = std::size_t{1} << n;
  for (int sa = -1; sa <= 1; sa += 2) {
    for (std::size_t mask = 0; mask < corners; ++mask) {
      Vec p(n + 1);
      const double a = sa * T;
      p[0] = a;
      for (std::size_t j = 0; j < n; ++j) {
        const double bp = ((mask >> j) & 1U) ? cert.kappa_used * T : -cert.kappa_used * T;
        p[j + 1] = bp + a * g.m0[j];
      }
      cert.points.push_back(std::move(p));
    }
  }

  cert.points_in_inner = true;
  cert.points_in_slice = true;
  for (const Vec& p : cert.points) {
    const Vec b(std::vector<double>(p.begin() + 1, p.end()));
    cert.points_in_inner = cert.points_in_inner && inner_member(g, p[0], b);
    cert.points_in_slice = cert.points_in_slice && slice_member(g, p[0], b).member;
  }

  // The box of half-width R around the target contains the ball; check its
  // corners against the hull.
  cert.hull_verified = true;
  const std::size_t box = std::size_t{1} << (n + 1);
  for (std::size_t mask = 0; mask < box && cert.hull_verified; ++mask) {
    Vec c = target;
    for (std::size_t i = 0; i <= n; ++i) c[i] += ((mask >> i) & 1U) ? radius : -radius;
    ++cert.lp_checks;
    cert.hull_verified = hull_contains(cert.points, c);
  }
  return cert;
}

}  // namespace holo
