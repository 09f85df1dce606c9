#include "holo/corrugation.hpp"

#include "holo/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace holo {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::string format_point(std::span<const double> x) {
  std::ostringstream out;
  out << '(';
  for (std::size_t i = 0; i < x.size(); ++i) out << (i ? ", " : "") << x[i];
  out << ')';
  return out.str();
}

// Everything the loop at x needs, expanded to order r around x.
struct LocalData {
  std::vector<Taylor> value;   // 1+n
  std::vector<Taylor> formal;  // (1+n) x m
  std::vector<Taylor> gbar;    // 1+n actual d_j
  std::vector<Taylor> phi;     // n x source at (x, delta(x), 0)
  std::vector<Taylor> m0;      // n
  std::vector<Taylor> db;      // n, Delta b in sheared slice coordinates
  Taylor da;                   // Delta a
};

// `prev` must be expanded to order r + 1.
LocalData local_data(const JetSection& sigma, const StateJet& prev, std::span<const double> x, int j, int r) {
  const Dims& d = sigma.dims();
  const int m = d.m, n = d.n, src = d.source();
  LocalData L;
  for (int i = 0; i <= n; ++i) {
    L.value.push_back(prev.value[std::size_t(i)].truncated(r));
    L.gbar.push_back(prev.value[std::size_t(i)].derivative(j));
  }
  L.formal.reserve(prev.formal.size());
  for (const Taylor& t : prev.formal) L.formal.push_back(t.truncated(r));

  std::vector<Taylor> slots;
  slots.reserve(std::size_t(src));
  for (int i = 0; i < m; ++i) slots.push_back(Taylor::variable(x[std::size_t(i)], i, m, r));
  slots.push_back(L.value[0]);
  for (int i = 0; i < d.k; ++i) slots.push_back(Taylor::constant(0.0, m, r));
  L.phi = sigma.phi_at<Taylor>(slots);

  // m0 = <lambda, psi_r> / (1 + |lambda|^2): the closed form every branch of
  // the hyperbola computation reduces to.
  Taylor lsq = Taylor::constant(1.0, m, r);
  for (int c = 0; c < m; ++c)
    if (c != j) lsq += L.formal[std::size_t(c)] * L.formal[std::size_t(c)];
  const Taylor& Yj = L.formal[std::size_t(j)];
  L.da = L.gbar[0] - Yj;
  for (int row = 0; row < n; ++row) {
    const Taylor& py = L.phi[std::size_t(row * src + m)];
    Taylor p = Taylor::constant(0.0, m, r);
    for (int c = 0; c < m; ++c) {
      if (c == j) continue;
      const Taylor& Yc = L.formal[std::size_t(c)];
      const Taylor psi = L.formal[std::size_t((row + 1) * m + c)] - L.phi[std::size_t(row * src + c)] - py * Yc;
      p += Yc * psi;
    }
    L.m0.push_back(p / lsq);
    const Taylor& Wj = L.formal[std::size_t((row + 1) * m + j)];
    L.db.push_back((L.gbar[std::size_t(row + 1)] - Wj) - L.da * (py + L.m0.back()));
  }
  return L;
}

// Coefficients of gamma - gbar on cos 2 pi t, sin 2 pi t and cos 4 pi t for
// each of the 1+n jet rows.
struct Harmonics {
  std::vector<Taylor> c1, s1, c2;
};

Harmonics harmonics(const LocalData& L, int m, int n, int src, double S) {
  Harmonics h;
  h.c1.push_back(-L.da);
  h.s1.push_back(Taylor(S) + Taylor::constant(0.0, L.da.nvars(), L.da.order()));
  h.c2.push_back(Taylor::constant(0.0, L.da.nvars(), L.da.order()));
  for (int row = 0; row < n; ++row) {
    const Taylor k = L.m0[std::size_t(row)] + L.phi[std::size_t(row * src + m)];
    h.c1.push_back(-(L.da * k));
    h.s1.push_back(S * k);
    h.c2.push_back(-L.db[std::size_t(row)]);
  }
  return h;
}

TrigPoly trig(double c0, double c1, double s1, double c2) {
  TrigPoly p;
  p.c0 = c0;
  p.cos_coeffs = {c1, c2};
  p.sin_coeffs = {s1, 0.0};
  return p;
}

void require_mountain_data(const JetSection& sigma, double base_a, double base_b, double avg_a, double avg_b,
                           std::span<const double> x) {
  const Dims& d = sigma.dims();
  if (d.m != 1 || d.n != 1) throw LoopError("mountain loop requires m = n = 1");
  const double tol = 1e-9;
  if (std::abs(base_a) > tol || std::abs(base_b) > tol)
    throw LoopError("mountain loop requires base (0, 0); got (" + std::to_string(base_a) + ", " +
                    std::to_string(base_b) + ") at x = " + format_point(x));
  if (std::abs(avg_a) > tol || std::abs(avg_b - 1.0) > tol)
    throw LoopError("mountain loop requires average (0, 1); got (" + std::to_string(avg_a) + ", " +
                    std::to_string(avg_b) + ") at x = " + format_point(x));
}

}  // namespace

Vec Loop::operator()(double t) const {
  Vec out(components.size());
  for (std::size_t i = 0; i < components.size(); ++i) out[i] = components[i](t);
  return out;
}

Vec Loop::average() const {
  Vec out(components.size());
  for (std::size_t i = 0; i < components.size(); ++i) out[i] = integrate_trigpoly(components[i], 0.0, 1.0);
  return out;
}

Loop mountain_loop(double eps) {
  if (!(eps > 0.0)) throw LoopError("mountain_loop: eps must be positive");
  Loop loop;
  loop.components.push_back(trig(0.0, 0.0, 4.0 / eps, 0.0));
  loop.components.push_back(trig(1.0, 0.0, 0.0, -1.0));
  return loop;
}

LoopShape choose_loop_shape(const LoopBounds& b, const LoopOptions& options) {
  if (!(b.kappa > 0.0) || !(b.eta > 0.0)) throw LoopError("loop synthesis: empty slice (kappa or eta is zero)");
  if (!(b.B < b.eta)) {
    std::ostringstream msg;
    msg << "loop synthesis: base point outside the inner tube (|beta'_b| = " << b.B << " >= eta = " << b.eta << ")";
    throw LoopError(msg.str());
  }
  LoopShape shape;
  if (b.B + 2.0 * b.Db < b.eta) {
    // Condition (i) holds for every t; the a-component is free.
    shape.s0 = 1.0;
    shape.S_required = 0.0;
  } else {
    const double s_max = std::sqrt((b.eta - b.B) / (2.0 * b.Db));
    const double head = b.B + b.kappa * b.c;
    const auto need = [&](double s) { return (head + 2.0 * b.Db * s * s) / (b.kappa * s); };
    if (head == 0.0) {
      shape.s0 = 0.0;
      shape.S_required = need(1.0);
    } else {
      shape.s0 = std::min(std::sqrt(head / (2.0 * b.Db)), 0.9 * s_max);
      shape.S_required = std::max(need(shape.s0), need(1.0));
    }
  }
  shape.S = options.safety * shape.S_required;
  if (!(shape.S <= options.S_cap)) {
    std::ostringstream msg;
    msg << "loop synthesis: required amplitude S = " << shape.S << " exceeds the cap " << options.S_cap;
    throw LoopError(msg.str());
  }
  return shape;
}

Loop make_loop(const Vec& m0, double base_a, const Vec& base_b, double avg_a, const Vec& avg_b, double S) {
  if (m0.size() != base_b.size() || m0.size() != avg_b.size()) throw DimensionError("make_loop: dimension mismatch");
  const double da = avg_a - base_a;
  Loop loop;
  loop.components.push_back(trig(avg_a, -da, S, 0.0));
  for (std::size_t r = 0; r < m0.size(); ++r) {
    const double db = (avg_b[r] - avg_a * m0[r]) - (base_b[r] - base_a * m0[r]);
    loop.components.push_back(trig(avg_b[r], -da * m0[r], S * m0[r], -db));
  }
  return loop;
}

SynthesizedLoop synthesize_loop(const SliceGeometry& g, const Vec& base, const Vec& average,
                                const LoopOptions& options) {
  if (g.empty) throw LoopError("loop synthesis: the slice is empty");
  const std::size_t n = g.m0.size();
  if (base.size() != n + 1 || average.size() != n + 1)
    throw DimensionError("synthesize_loop: base and average must be (a, b_1..b_n)");
  const Vec base_b(std::vector<double>(base.begin() + 1, base.end()));
  const Vec avg_b(std::vector<double>(average.begin() + 1, average.end()));

  SynthesizedLoop out;
  LoopBounds& b = out.bounds;
  const double da = average[0] - base[0];
  for (std::size_t r = 0; r < n; ++r) {
    b.B = std::max(b.B, std::abs(base_b[r] - base[0] * g.m0[r]));
    b.Db = std::max(b.Db, std::abs((avg_b[r] - average[0] * g.m0[r]) - (base_b[r] - base[0] * g.m0[r])));
  }
  b.c = std::abs(base[0]) + 2.0 * std::abs(da);
  b.kappa = g.kappa;
  b.eta = g.eta;
  out.shape = choose_loop_shape(b, options);
  out.loop = make_loop(g.m0, base[0], base_b, average[0], avg_b, out.shape.S);

  for (int i = 0; i < options.samples; ++i) {
    const double t = double(i) / double(options.samples);
    const Vec p = out.loop(t);
    const Vec pb(std::vector<double>(p.begin() + 1, p.end()));
    if (!slice_member(g, p[0], pb).member) {
      std::ostringstream msg;
      msg << "loop synthesis: sampled containment violated at t = " << t;
      throw LoopError(msg.str());
    }
  }
  return out;
}

Loop LoopFamily::at_slice(const JetSection& sigma, std::span<const double> x) const {
  const Dims& d = sigma.dims();
  const StateJet prev = source(x, 1);
  const LocalData L = local_data(sigma, prev, x, direction, 0);
  const int m = d.m, n = d.n, src = d.source();
  const double base_a = L.formal[std::size_t(direction)].value();
  const double avg_a = L.gbar[0].value();
  const auto nn = static_cast<std::size_t>(n);
  Vec m0(nn), base_b(nn), avg_b(nn);
  for (int r = 0; r < n; ++r) {
    const double py = L.phi[std::size_t(r * src + m)].value();
    const double px = L.phi[std::size_t(r * src + direction)].value();
    m0[std::size_t(r)] = L.m0[std::size_t(r)].value();
    base_b[std::size_t(r)] = L.formal[std::size_t((r + 1) * m + direction)].value() - base_a * py - px;
    avg_b[std::size_t(r)] = L.gbar[std::size_t(r + 1)].value() - avg_a * py - px;
  }
  return make_loop(m0, base_a, base_b, avg_a, avg_b, shape.S);
}

Loop LoopFamily::at_jet(const JetSection& sigma, std::span<const double> x) const {
  const Dims& d = sigma.dims();
  Loop loop = at_slice(sigma, x);
  std::vector<double> slots(std::size_t(d.source()), 0.0);
  for (int i = 0; i < d.m; ++i) slots[std::size_t(i)] = x[std::size_t(i)];
  slots[std::size_t(d.m)] = source(x, 0).value[0].value();
  const auto phi = sigma.phi_at<double>(slots);
  const TrigPoly a = loop.components[0];
  for (int r = 0; r < d.n; ++r) {
    TrigPoly& b = loop.components[std::size_t(r + 1)];
    const double py = phi[std::size_t(r * d.source() + d.m)];
    const double px = phi[std::size_t(r * d.source() + direction)];
    b.c0 += a.c0 * py + px;
    for (std::size_t l = 0; l < b.cos_coeffs.size(); ++l) b.cos_coeffs[l] += a.cos_coeffs[l] * py;
    for (std::size_t l = 0; l < b.sin_coeffs.size(); ++l) b.sin_coeffs[l] += a.sin_coeffs[l] * py;
  }
  return loop;
}

LoopFamily build_loop_family(const FormalSolutionState& state, double eps, int j, const Grid& grid,
                             const FamilyOptions& options) {
  const JetSection& sigma = state.section();
  const Dims& d = sigma.dims();
  if (j < 0 || j >= d.m) throw DimensionError("build_loop_family: direction out of range");
  if (state.holonomic_directions().count(j)) throw Error("direction " + std::to_string(j + 1) + " is already holonomic");
  const int m = d.m, n = d.n, src = d.source();

  struct PointData {
    LoopBounds b;
    bool empty = false;
    double base_a = 0.0, avg_a = 0.0;
    Vec base_b, avg_b;
  };
  std::vector<PointData> data(grid.size());
  parallel_for(grid.size(), [&](std::size_t idx) {
    const Vec x = grid.point(idx);
    const StateJet prev = state.evaluate(x.span(), 1);
    const LocalData L = local_data(sigma, prev, x.span(), j, 0);
    PointData& p = data[idx];
    SliceSpec spec;
    spec.eps = eps;
    spec.lambda = Vec(std::size_t(m - 1));
    spec.psi = Mat(std::size_t(n), std::size_t(m - 1));
    for (int c = 0, k = 0; c < m; ++c) {
      if (c == j) continue;
      spec.lambda[std::size_t(k)] = L.formal[std::size_t(c)].value();
      for (int r = 0; r < n; ++r)
        spec.psi(std::size_t(r), std::size_t(k)) = L.formal[std::size_t((r + 1) * m + c)].value() -
                                                   L.phi[std::size_t(r * src + c)].value() -
                                                   L.phi[std::size_t(r * src + m)].value() * spec.lambda[std::size_t(k)];
      ++k;
    }
    const SliceGeometry g = slice_geometry(spec);
    p.empty = g.empty;
    p.b.kappa = g.kappa;
    p.b.eta = g.eta;
    p.base_a = L.formal[std::size_t(j)].value();
    p.avg_a = L.gbar[0].value();
    p.base_b = Vec(std::size_t(n));
    p.avg_b = Vec(std::size_t(n));
    for (int r = 0; r < n; ++r) {
      const double py = L.phi[std::size_t(r * src + m)].value();
      const double px = L.phi[std::size_t(r * src + j)].value();
      const double m0 = L.m0[std::size_t(r)].value();
      p.base_b[std::size_t(r)] = L.formal[std::size_t((r + 1) * m + j)].value() - p.base_a * py - px;
      p.avg_b[std::size_t(r)] = L.gbar[std::size_t(r + 1)].value() - p.avg_a * py - px;
      p.b.B = std::max(p.b.B, std::abs(p.base_b[std::size_t(r)] - p.base_a * m0));
      p.b.Db = std::max(p.b.Db, std::abs(L.db[std::size_t(r)].value()));
    }
    p.b.c = std::abs(p.base_a) + 2.0 * std::abs(L.da.value());
  });

  LoopBounds bounds;
  bounds.kappa = std::numeric_limits<double>::infinity();
  bounds.eta = std::numeric_limits<double>::infinity();
  for (std::size_t idx = 0; idx < data.size(); ++idx) {
    const PointData& p = data[idx];
    if (p.empty) throw LoopError("loop synthesis: empty slice at x = " + format_point(grid.point(idx).span()));
    bounds.B = std::max(bounds.B, p.b.B);
    bounds.c = std::max(bounds.c, p.b.c);
    bounds.Db = std::max(bounds.Db, p.b.Db);
    bounds.kappa = std::min(bounds.kappa, p.b.kappa);
    bounds.eta = std::min(bounds.eta, p.b.eta);
  }

  LoopFamily family;
  family.direction = j;
  family.eps = eps;
  family.mode = options.mode;
  family.bounds = bounds;
  family.source = state.evaluator();
  if (options.mode == LoopMode::Mountain) {
    for (std::size_t idx = 0; idx < data.size(); ++idx) {
      const PointData& p = data[idx];
      require_mountain_data(sigma, p.base_a, p.base_b[0], p.avg_a, p.avg_b[0], grid.point(idx).span());
    }
    family.shape.S = 4.0 / eps;
    family.shape.S_required = 2.0 / eps;
    family.shape.s0 = 0.0;
  } else {
    family.shape = choose_loop_shape(bounds, options.loop);
  }

  // Dense containment check of every loop of the family.
  std::vector<double> violation(grid.size(), -1.0);
  std::vector<double> amplitude(grid.size(), 0.0);
  parallel_for(grid.size(), [&](std::size_t idx) {
    const Vec x = grid.point(idx);
    const Loop loop = family.at_slice(sigma, x.span());
    const PointData& p = data[idx];
    SliceSpec spec;
    spec.eps = eps;
    const StateJet jet = state.evaluate(x.span(), 0);
    std::vector<double> slots(std::size_t(src), 0.0);
    for (int i = 0; i < m; ++i) slots[std::size_t(i)] = x[std::size_t(i)];
    slots[std::size_t(m)] = jet.value[0].value();
    const auto phi = sigma.phi_at<double>(slots);
    spec.lambda = Vec(std::size_t(m - 1));
    spec.psi = Mat(std::size_t(n), std::size_t(m - 1));
    for (int c = 0, k = 0; c < m; ++c) {
      if (c == j) continue;
      spec.lambda[std::size_t(k)] = jet.formal[std::size_t(c)].value();
      for (int r = 0; r < n; ++r)
        spec.psi(std::size_t(r), std::size_t(k)) = jet.formal[std::size_t((r + 1) * m + c)].value() -
                                                   phi[std::size_t(r * src + c)] -
                                                   phi[std::size_t(r * src + m)] * spec.lambda[std::size_t(k)];
      ++k;
    }
    const SliceGeometry g = slice_geometry(spec);
    double amp = 0.0;
    for (int s = 0; s < options.containment_samples; ++s) {
      const double t = (double(s) + 0.5) / double(options.containment_samples);
      const Vec q = loop(t);
      const Vec qb(std::vector<double>(q.begin() + 1, q.end()));
      if (!slice_member(g, q[0], qb).member && violation[idx] < 0.0) violation[idx] = t;
      amp = std::max(amp, std::abs(q[0] - p.avg_a));
      for (int r = 0; r < n; ++r) {
        const double py = phi[std::size_t(r * src + m)];
        amp = std::max(amp, std::abs(qb[std::size_t(r)] - p.avg_b[std::size_t(r)] + (q[0] - p.avg_a) * py));
      }
    }
    amplitude[idx] = amp;
  });
  for (std::size_t idx = 0; idx < grid.size(); ++idx) {
    if (violation[idx] >= 0.0) {
      std::ostringstream msg;
      msg << "loop synthesis: sampled containment violated at x = " << format_point(grid.point(idx).span())
          << ", t = " << violation[idx];
      throw LoopError(msg.str());
    }
    family.amplitude = std::max(family.amplitude, amplitude[idx]);
  }
  return family;
}

FormalSolutionState corrugate(const FormalSolutionState& state, const LoopFamily& family, int N) {
  const int j = family.direction;
  const Dims& d = state.dims();
  if (N < 1) throw Error("corrugate: frequency must be a positive integer");
  if (j < 0 || j >= d.m) throw DimensionError("corrugate: direction out of range");
  if (state.holonomic_directions().count(j)) throw Error("direction " + std::to_string(j + 1) + " is already holonomic");

  // The family must have been built for this state: its averages are the
  // state's actual j-th partials.
  const int probes = 3;
  std::vector<double> x(std::size_t(d.m));
  std::size_t total = 1;
  for (int i = 0; i < d.m; ++i) total *= probes;
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t rest = idx;
    for (int i = 0; i < d.m; ++i) {
      x[std::size_t(i)] = 0.25 * double(1 + rest % probes);
      rest /= probes;
    }
    const StateJet a = state.evaluate(x, 1);
    const StateJet b = family.source(x, 1);
    for (int i = 0; i <= d.n; ++i) {
      const double ga = a.value[std::size_t(i)].partial(j), gb = b.value[std::size_t(i)].partial(j);
      if (std::abs(ga - gb) > 1e-9 * std::max(1.0, std::abs(ga)))
        throw Error("corrugate: loop average does not match the state's derivative at x = " + format_point(x));
    }
  }

  const StateEvaluator prev = state.evaluator();
  const auto sigma = state.section_ptr();
  const double S = family.shape.S;
  StateEvaluator eval = [prev, sigma, j, N, S](std::span<const double> x, int r) {
    const Dims& dims = sigma->dims();
    const int m = dims.m, n = dims.n;
    const StateJet p = prev(x, r + 1);
    const LocalData L = local_data(*sigma, p, x, j, r);
    const Harmonics h = harmonics(L, m, n, dims.source(), S);
    const Taylor t = Taylor::variable(x[std::size_t(j)], j, m, r) * double(N);
    const Taylor th1 = kTwoPi * t, th2 = (2.0 * kTwoPi) * t;
    const Taylor c1 = cos(th1), s1 = sin(th1), c2 = cos(th2), s2 = sin(th2);
    StateJet out;
    out.formal = L.formal;
    const double inv = 1.0 / double(N);
    for (int i = 0; i <= n; ++i) {
      const auto ii = std::size_t(i);
      Taylor integral = h.c1[ii] * s1 * (1.0 / kTwoPi) + h.s1[ii] * (1.0 - c1) * (1.0 / kTwoPi) +
                        h.c2[ii] * s2 * (1.0 / (2.0 * kTwoPi));
      out.value.push_back(L.value[ii] + integral * inv);
      out.formal[std::size_t(i * m + j)] = L.gbar[ii] + h.c1[ii] * c1 + h.s1[ii] * s1 + h.c2[ii] * c2;
    }
    return out;
  };
  std::set<int> holonomic = state.holonomic_directions();
  holonomic.insert(j);
  return FormalSolutionState(state.section_ptr(), std::move(eval), std::move(holonomic));
}

JetPoint mixed_jet(const FormalSolutionState& state, std::span<const double> x, int extra) {
  const Dims& d = state.dims();
  const StateJet jet = state.evaluate(x, 1);
  const auto& hol = state.holonomic_directions();
  JetPoint p;
  p.x = Vec(std::vector<double>(x.begin(), x.end()));
  p.y = jet.value[0].value();
  p.w = Vec(std::size_t(d.n));
  p.Y = Vec(std::size_t(d.m));
  p.W = Mat(std::size_t(d.n), std::size_t(d.m));
  for (int c = 0; c < d.m; ++c) {
    const bool actual = hol.count(c) || c == extra;
    p.Y[std::size_t(c)] = actual ? jet.value[0].partial(c) : jet.formal[std::size_t(c)].value();
    for (int r = 0; r < d.n; ++r)
      p.W(std::size_t(r), std::size_t(c)) =
          actual ? jet.value[std::size_t(r + 1)].partial(c) : jet.formal[std::size_t((r + 1) * d.m + c)].value();
  }
  for (int r = 0; r < d.n; ++r) p.w[std::size_t(r)] = jet.value[std::size_t(r + 1)].value();
  return p;
}

MarginSweep sweep_margins(const FormalSolutionState& state, double eps, const Grid& grid) {
  std::vector<double> margin(grid.size());
  std::vector<Clause> clause(grid.size());
  parallel_for(grid.size(), [&](std::size_t idx) {
    const Vec x = grid.point(idx);
    const RhaVerdict v = rha_member(state.section(), eps, mixed_jet(state, x.span()));
    margin[idx] = v.margin;
    clause[idx] = v.worst;
  });
  const LipschitzReport rep = lipschitz_certify(grid, margin);
  MarginSweep out;
  out.worst = rep.worst;
  out.worst_x = grid.point(rep.worst_index);
  out.worst_clause = clause[rep.worst_index];
  out.certified = rep.certified;
  out.lipschitz = rep.lipschitz;
  out.spacing = Vec(std::size_t(grid.dim()));
  for (int a = 0; a < grid.dim(); ++a) out.spacing[std::size_t(a)] = grid.spacing(a);
  out.passed = rep.passed;
  return out;
}

double formal_residual(const FormalSolutionState& corrugated, int j, const Grid& grid) {
  std::vector<double> res(grid.size(), 0.0);
  const int n = corrugated.dims().n, m = corrugated.dims().m;
  parallel_for(grid.size(), [&](std::size_t idx) {
    const Vec x = grid.point(idx);
    const StateJet jet = corrugated.evaluate(x.span(), 1);
    double r = 0.0;
    for (int i = 0; i <= n; ++i)
      r = std::max(r, std::abs(jet.value[std::size_t(i)].partial(j) - jet.formal[std::size_t(i * m + j)].value()));
    res[idx] = r;
  });
  return *std::max_element(res.begin(), res.end());
}

Grid verification_grid(const JetSection& sigma, const std::vector<int>& frequencies, const SolveOptions& options,
                       const std::vector<int>& levels) {
  const int m = sigma.dims().m;
  const double margin = sigma.margin();
  double base = options.spacing;
  if (!(base > 0.0)) base = std::ldexp(1.0, -std::max(2, 9 - 3 * (m - 1)));
  const double lo = -margin, hi = 1.0 + margin;
  std::vector<std::size_t> counts(static_cast<std::size_t>(m));
  for (int a = 0; a < m; ++a) {
    double h = base;
    const int N = a < int(frequencies.size()) ? frequencies[std::size_t(a)] : 0;
    if (N > 0) h = std::min(h, 1.0 / (double(options.samples_per_period) * double(N)));
    if (a < int(levels.size())) h = std::ldexp(h, -levels[std::size_t(a)]);
    counts[std::size_t(a)] = std::size_t(std::ceil((hi - lo) / h - 1e-9)) + 1;
  }
  return Grid(Vec(std::size_t(m), lo), Vec(std::size_t(m), hi), std::move(counts));
}

namespace {

struct Trial {
  Attempt attempt;
  MarginSweep sweep;
  std::vector<std::size_t> counts;
  std::optional<FormalSolutionState> state;
};

Trial try_frequency(const FormalSolutionState& state, const LoopFamily& family, double eps,
                    std::vector<int> freqs, int N, const SolveOptions& options) {
  Trial trial;
  trial.state = corrugate(state, family, N);
  freqs[std::size_t(family.direction)] = N;
  std::vector<int> levels(freqs.size(), 0);
  for (int round = 0;; ++round) {
    const Grid grid = verification_grid(state.section(), freqs, options, levels);
    if (grid.size() > options.max_grid_points) {
      if (round == 0) {
        throw SolveError("verification grid for N = " + std::to_string(N) + " exceeds " +
                         std::to_string(options.max_grid_points) + " points");
      }
      break;
    }
    trial.sweep = sweep_margins(*trial.state, eps, grid);
    trial.counts = grid.counts();
    // Only the Lipschitz rule benefits from refinement; halve the axis that
    // contributes most to the budget.
    if (trial.sweep.passed || trial.sweep.worst <= 0.0 || round >= options.refinements) break;
    int axis = 0;
    double worst = -1.0;
    for (int a = 0; a < grid.dim(); ++a) {
      const double c = trial.sweep.lipschitz[std::size_t(a)] * grid.spacing(a);
      if (c > worst) {
        worst = c;
        axis = a;
      }
    }
    ++levels[std::size_t(axis)];
  }
  trial.attempt = {N, trial.sweep.worst, trial.sweep.certified, trial.sweep.passed};
  return trial;
}

const char* clause_name(Clause c) {
  switch (c) {
    case Clause::Height: return "|y| < eps";
    case Clause::Value: return "|w - f| < eps";
    case Clause::Derivative: return "restricted derivative norm < eps";
  }
  return "?";
}

}  // namespace

SolveResult solve(std::shared_ptr<const JetSection> sigma, double eps, const SolveOptions& options) {
  if (!(eps > 0.0)) throw InputError("eps must be positive");
  const int m = sigma->dims().m;
  if (!options.fixed_N.empty() && int(options.fixed_N.size()) != m)
    throw InputError("fixed frequencies must list one N per direction");

  FormalSolutionState state = canonical_formal_solution(sigma);
  std::vector<int> freqs(std::size_t(m), 0);
  std::vector<DirectionReport> reports;

  for (int j = 0; j < m; ++j) {
    FamilyOptions fopts;
    fopts.mode = options.mode;
    fopts.loop = options.loop;
    fopts.containment_samples = options.containment_samples;
    LoopFamily family;
    try {
      family = build_loop_family(state, eps, j, verification_grid(*sigma, freqs, options), fopts);
    } catch (const LoopError& e) {
      throw SolveError("direction " + std::to_string(j + 1) + ": " + e.what());
    }

    DirectionReport report;
    report.direction = j;
    report.shape = family.shape;
    report.bounds = family.bounds;
    report.family = family;

    std::optional<Trial> chosen;
    if (!options.fixed_N.empty()) {
      Trial t = try_frequency(state, family, eps, freqs, options.fixed_N[std::size_t(j)], options);
      report.attempts.push_back(t.attempt);
      chosen = std::move(t);
    } else {
      int start = 1;
      if (j > 0) start = std::max(1, int(std::ceil(options.frequency_ratio * double(freqs[std::size_t(j - 1)]))));
      int lo = start - 1;  // largest frequency known to fail (start - 1 = none tried)
      int N = start;
      std::optional<Trial> last;
      while (true) {
        if (N > options.N_cap) {
          std::ostringstream msg;
          msg << "direction " << j + 1 << ": no frequency up to the cap " << options.N_cap << " verifies";
          if (last) {
            msg << "; at N = " << last->attempt.N << " the worst margin is " << last->sweep.worst << " ("
                << clause_name(last->sweep.worst_clause) << ") at x = " << format_point(last->sweep.worst_x.span())
                << ", certified bound " << last->sweep.certified;
          }
          throw SolveError(msg.str());
        }
        Trial t = try_frequency(state, family, eps, freqs, N, options);
        report.attempts.push_back(t.attempt);
        if (t.attempt.passed) {
          chosen = std::move(t);
          break;
        }
        lo = N;
        last = std::move(t);
        N = N * 2;
      }
      if (options.minimize) {
        int hi = chosen->attempt.N;
        while (hi - lo > 1) {
          const int mid = lo + (hi - lo) / 2;
          Trial t = try_frequency(state, family, eps, freqs, mid, options);
          report.attempts.push_back(t.attempt);
          if (t.attempt.passed) {
            hi = mid;
            chosen = std::move(t);
          } else {
            lo = mid;
          }
        }
      }
    }

    const int N = chosen->attempt.N;
    freqs[std::size_t(j)] = N;
    report.N = N;
    report.margins = chosen->sweep;
    report.grid_counts = chosen->counts;
    report.c0_bound = 2.0 * family.amplitude / double(N);

    const Grid coarse = verification_grid(*sigma, freqs, options);
    std::vector<double> disp(coarse.size(), 0.0);
    const FormalSolutionState& next = *chosen->state;
    parallel_for(coarse.size(), [&](std::size_t idx) {
      const Vec x = coarse.point(idx);
      const StateJet a = state.evaluate(x.span(), 0), b = next.evaluate(x.span(), 0);
      double v = 0.0;
      for (std::size_t i = 0; i < a.value.size(); ++i) v = std::max(v, std::abs(a.value[i].value() - b.value[i].value()));
      disp[idx] = v;
    });
    report.displacement = *std::max_element(disp.begin(), disp.end());
    report.formal_residual = formal_residual(next, j, coarse);
    reports.push_back(std::move(report));
    state = next;
  }

  SolveResult result{state, state.as_pair(), std::move(reports), eps};
  return result;
}

}  // namespace holo
