#include "holo/verify.hpp"

#include "holo/hull.hpp"
#include "holo/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>

namespace holo {

namespace {

using nlohmann::json;

json vec_json(const Vec& v) { return json(v.values()); }

json clause_json(const ClauseReport& c) {
  return {{"worst_margin", c.worst_margin},
          {"certified_margin", c.certified},
          {"worst_point", vec_json(c.worst_point)},
          {"passed", c.passed}};
}

json grid_json(const GridSpec& g) {
  return {{"lower", vec_json(g.lower)}, {"upper", vec_json(g.upper)}, {"counts", g.counts}};
}

GridSpec spec_of(const Grid& g) { return {g.lower(), g.upper(), g.counts()}; }

std::string point_text(const Vec& x) {
  std::ostringstream out;
  out << '(';
  for (std::size_t i = 0; i < x.size(); ++i) out << (i ? ", " : "") << x[i];
  out << ')';
  return out.str();
}

ClauseReport clause_from(const Grid& grid, const std::vector<double>& margins,
                         const std::function<Vec(std::size_t)>& locate) {
  const LipschitzReport rep = lipschitz_certify(grid, margins);
  ClauseReport c;
  c.worst_margin = rep.worst;
  c.certified = rep.certified;
  c.worst_point = locate(rep.worst_index);
  c.passed = rep.passed;
  return c;
}

std::size_t axis_count(double lo, double hi, double h) {
  return std::size_t(std::ceil((hi - lo) / h - 1e-9)) + 1;
}

struct TubeCheck {
  ClauseReport value, derivative, combined;
  GridSpec grid;
  Vec lipschitz;  ///< per axis, of the combined margin
  Vec spacing;
  std::size_t points = 0;
};

ClauseReport to_clause(const LipschitzReport& rep, Vec point) {
  ClauseReport c;
  c.worst_margin = rep.worst;
  c.certified = rep.certified;
  c.worst_point = std::move(point);
  c.passed = rep.passed;
  return c;
}

// Fiber data on the x lattice {k s_a}, extended by E_a points beyond [0,1]
// on each side.
struct TubeLattice {
  std::vector<std::size_t> counts;  // points on [0,1] per axis
  std::vector<std::size_t> extra;   // E_a
  static constexpr int kMaxSteps = 32;
  int t_steps = 4;
  int z_steps = 1;
  std::unique_ptr<Grid> grid;
  std::vector<FiberData> fibers;

  double step(int a) const { return 1.0 / double(counts[std::size_t(a)] - 1); }

  void rebuild(const Extension& ext, double radius) {
    const int m = int(counts.size());
    std::vector<double> lo, hi;
    std::vector<std::size_t> n;
    extra.assign(std::size_t(m), 0);
    for (int a = 0; a < m; ++a) {
      const double s = step(a);
      extra[std::size_t(a)] = std::size_t(std::ceil(radius / s - 1e-9));
      lo.push_back(-double(extra[std::size_t(a)]) * s);
      hi.push_back(1.0 + double(extra[std::size_t(a)]) * s);
      n.push_back(counts[std::size_t(a)] + 2 * extra[std::size_t(a)]);
    }
    grid = std::make_unique<Grid>(Vec(lo), Vec(hi), n);
    fibers.assign(grid->size(), FiberData{});
    parallel_for(grid->size(), [&](std::size_t i) {
      Vec x = grid->point(i);
      // Snap to the lattice so that x = k s exactly up to one rounding.
      for (int a = 0; a < m; ++a) {
        const double k = double(grid->axis_index(i, a)) - double(extra[std::size_t(a)]);
        x[std::size_t(a)] = k * step(a);
      }
      fibers[i] = ext.fiber(x.span());
    });
  }

  // Halves the axis that dominates the Lipschitz budget; false when nothing
  // can be refined within the caps. Refinement is monotone, so later radii
  // reuse it.
  bool refine(const Extension& ext, const Vec& lipschitz, const Vec& spacing, double radius, std::size_t max_fibers,
              std::size_t max_points, std::size_t points) {
    const int m = int(counts.size());
    const auto refinable = [&](int a) {
      if (a == m) return t_steps < kMaxSteps && points / std::size_t(2 * t_steps + 1) * std::size_t(4 * t_steps + 1) <= max_points;
      if (a > m) return z_steps < kMaxSteps && points / std::size_t(2 * z_steps + 1) * std::size_t(4 * z_steps + 1) <= max_points;
      return 2 * points <= max_points && grid->size() / grid->counts()[std::size_t(a)] * (2 * grid->counts()[std::size_t(a)]) <= max_fibers;
    };
    int axis = -1;
    double worst = 0.0;
    for (std::size_t a = 0; a < lipschitz.size(); ++a) {
      const double c = lipschitz[a] * spacing[a];
      if (c > worst && refinable(int(a))) {
        worst = c;
        axis = int(a);
      }
    }
    if (axis < 0) return false;
    if (axis >= m) {
      if (axis == m) t_steps *= 2;
      else z_steps *= 2;
      return true;
    }
    counts[std::size_t(axis)] = 2 * (counts[std::size_t(axis)] - 1) + 1;
    rebuild(ext, radius);
    return true;
  }

  TubeCheck check(const Extension& ext, double eps, double r) const {
    const JetSection& sigma = ext.section();
    const Dims d = sigma.dims();
    const int m = d.m;
    std::vector<double> lo, hi;
    std::vector<std::size_t> n, e(static_cast<std::size_t>(m));
    for (int a = 0; a < m; ++a) {
      const double s = step(a);
      e[std::size_t(a)] = r > 0.0 ? std::size_t(std::ceil(r / s - 1e-9)) : 0;
      lo.push_back(-double(e[std::size_t(a)]) * s);
      hi.push_back(1.0 + double(e[std::size_t(a)]) * s);
      n.push_back(counts[std::size_t(a)] + 2 * e[std::size_t(a)]);
    }
    lo.push_back(-r);
    hi.push_back(r);
    n.push_back(r > 0.0 ? std::size_t(2 * t_steps + 1) : 1);
    for (int c = 0; c < d.k; ++c) {
      lo.push_back(-r);
      hi.push_back(r);
      n.push_back(r > 0.0 ? std::size_t(2 * z_steps + 1) : 1);
    }
    const Grid g(Vec(lo), Vec(hi), n);
    const auto fiber_of = [&](std::size_t i) -> const FiberData& {
      std::size_t idx = 0;
      for (int a = 0; a < m; ++a)
        idx += (g.axis_index(i, a) + extra[std::size_t(a)] - e[std::size_t(a)]) * grid->stride(a);
      return fibers[idx];
    };
    const auto locate = [&](std::size_t i) {
      const FiberData& f = fiber_of(i);
      Vec p = g.point(i);
      for (int a = 0; a < m; ++a) p[std::size_t(a)] = f.x[std::size_t(a)];
      p[std::size_t(m)] += f.delta;
      return p;
    };
    std::vector<double> mv(g.size()), md(g.size()), mc(g.size());
    parallel_for(g.size(), [&](std::size_t i) {
      const Vec p = locate(i);
      const JetDistance dist = jet_distance_on_fiber(sigma, ext.jet(fiber_of(i), p.span()), p.span());
      mv[i] = eps - dist.value;
      md[i] = eps - dist.derivative;
      mc[i] = std::min(mv[i], md[i]);
    });
    TubeCheck t;
    const LipschitzReport rv = lipschitz_certify(g, mv), rd = lipschitz_certify(g, md), rc = lipschitz_certify(g, mc);
    t.value = to_clause(rv, locate(rv.worst_index));
    t.derivative = to_clause(rd, locate(rd.worst_index));
    t.combined = to_clause(rc, locate(rc.worst_index));
    t.grid = spec_of(g);
    t.points = g.size();
    t.lipschitz = rc.lipschitz;
    t.spacing = Vec(g.size() ? std::size_t(g.dim()) : 0);
    for (int a = 0; a < g.dim(); ++a) t.spacing[std::size_t(a)] = g.spacing(a);
    return t;
  }
};

}  // namespace

json Certificate::to_json() const {
  json j;
  j["schema"] = kCertificateSchema;
  j["eps"] = eps;
  j["dims"] = {{"m", dims.m}, {"k", dims.k}, {"n", dims.n}};
  j["frequencies"] = frequencies;
  j["clauses"] = {{"delta", clause_json(delta)},
                  {"on_deformed_cube", clause_json(on_cube)},
                  {"value", clause_json(value)},
                  {"derivative", clause_json(derivative)}};
  j["grids"] = {{"core", grid_json(core_grid)}, {"tube", grid_json(tube_grid)}};
  j["tube_radius"] = {{"requested", requested_radius}, {"verified", tube_radius}};
  j["oracle"] = {{"points", oracle.points},
                 {"fd_max_deviation", oracle.fd_max_deviation},
                 {"norm_max_deviation", oracle.norm_max_deviation},
                 {"tolerance", oracle.tolerance},
                 {"passed", oracle.passed}};
  j["verdict"] = passed ? "PASS" : "FAIL";
  j["failure"] = failure;
  return j;
}

Certificate certify_solution(std::shared_ptr<const JetSection> sigma, double eps, const HolonomicPair& pair,
                             const CertifyOptions& options) {
  if (!(eps > 0.0)) throw InputError("eps must be positive");
  const Dims d = sigma->dims();
  const int m = d.m, src = d.source();
  Certificate cert;
  cert.eps = eps;
  cert.dims = d;
  cert.frequencies = options.frequencies;

  std::vector<double> h(static_cast<std::size_t>(m));
  double base = options.spacing;
  if (!(base > 0.0)) base = std::ldexp(1.0, -std::max(3, 10 - 3 * (m - 1)));
  for (int a = 0; a < m; ++a) {
    h[std::size_t(a)] = base;
    if (a < int(options.frequencies.size()) && options.frequencies[std::size_t(a)] > 0)
      h[std::size_t(a)] = std::min(base, 1.0 / (double(options.samples_per_period) * options.frequencies[std::size_t(a)]));
  }

  // |delta| < eps on the cube.
  {
    std::vector<std::size_t> counts;
    for (int a = 0; a < m; ++a) counts.push_back(axis_count(0.0, 1.0, h[std::size_t(a)]));
    const Grid core(Vec(std::size_t(m), 0.0), Vec(std::size_t(m), 1.0), counts);
    std::vector<double> margins(core.size());
    parallel_for(core.size(), [&](std::size_t i) {
      const Vec x = core.point(i);
      margins[i] = eps - std::abs(pair.delta(x.span()));
    });
    cert.delta = clause_from(core, margins, [&](std::size_t i) { return core.point(i); });
    cert.core_grid = spec_of(core);
  }

  const Extension ext = extend(sigma, pair);
  cert.requested_radius = options.tube_radius > 0.0 ? options.tube_radius : sigma->margin();

  // Tube of radius r around A_delta in coordinates (x, t, z), y = delta(x) + t.
  // The x axes live on a lattice anchored at 0 with spacing 1/(n - 1), so all
  // radii share the fiber data; r = 0 is A_delta itself over [0,1]^m.
  TubeLattice lat;
  for (int a = 0; a < m; ++a) lat.counts.push_back(axis_count(0.0, 1.0, h[std::size_t(a)]));
  lat.t_steps = options.fiber_steps;
  lat.z_steps = options.z_steps;
  lat.rebuild(ext, cert.requested_radius);

  const auto check_tube = [&](double r) {
    TubeCheck best;
    for (int round = 0;; ++round) {
      TubeCheck t = lat.check(ext, eps, r);
      const bool ok = t.value.passed && t.derivative.passed;
      const bool refinable = t.combined.worst_margin > 0.0 && round < options.refinements;
      best = std::move(t);
      if (ok || !refinable) break;
      if (!lat.refine(ext, best.lipschitz, best.spacing, cert.requested_radius, options.max_fibers, options.max_tube_points,
                      best.points))
        break;
    }
    return best;
  };

  const TubeCheck cube = check_tube(0.0);
  cert.on_cube = cube.combined;
  cert.value = cube.value;
  cert.derivative = cube.derivative;
  cert.tube_grid = cube.grid;

  std::optional<TubeCheck> tube_failure;
  if (cert.on_cube.passed) {
    TubeCheck best;
    bool found = false;
    TubeCheck full = check_tube(cert.requested_radius);
    if (full.value.passed && full.derivative.passed) {
      cert.tube_radius = cert.requested_radius;
      best = full;
      found = true;
    } else {
      // Halve until a radius passes, then bisect between the last failure
      // and the first success.
      double lo = 0.0, hi = cert.requested_radius;
      for (int s = 0; s < options.max_halvings && !found; ++s) {
        const double r = 0.5 * hi;
        TubeCheck t = check_tube(r);
        if (t.value.passed && t.derivative.passed) {
          lo = r;
          best = std::move(t);
          found = true;
        } else {
          hi = r;
        }
      }
      for (int s = 0; found && s < options.bisection_steps; ++s) {
        const double mid = 0.5 * (lo + hi);
        TubeCheck t = check_tube(mid);
        if (t.value.passed && t.derivative.passed) {
          lo = mid;
          best = std::move(t);
          found = true;
        } else {
          hi = mid;
        }
      }
      cert.tube_radius = lo;
    }
    if (!found) tube_failure = full;
    if (found) {
      cert.value = best.value;
      cert.derivative = best.derivative;
      cert.tube_grid = best.grid;
    }
  }

  // Oracle cross-check of the analytic 1-jet inside the verified tube.
  {
    Rng rng(options.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double r = cert.tube_radius;
    int maxN = 1;
    for (int N : options.frequencies) maxN = std::max(maxN, N);
    const double step = 1e-3 / double(maxN);
    OracleStats& o = cert.oracle;
    for (int i = 0; i < options.oracle_points; ++i) {
      Vec p(static_cast<std::size_t>(src));
      for (int a = 0; a < m; ++a) p[std::size_t(a)] = -r + (1.0 + 2.0 * r) * unit(rng);
      p[std::size_t(m)] = pair.delta(std::span<const double>(p.data(), std::size_t(m))) + r * (2.0 * unit(rng) - 1.0);
      for (int c = 0; c < d.k; ++c) p[std::size_t(m + 1 + c)] = r * (2.0 * unit(rng) - 1.0);
      const ExtensionJet jet = ext.jet(p.span());
      for (int row = 0; row < d.n; ++row) {
        const Vec fd = richardson_gradient(
            [&](std::span<const double> q) { return ext.value(q)[std::size_t(row)]; }, p.span(), step);
        for (int c = 0; c < src; ++c) {
          const double an = jet.differential(std::size_t(row), std::size_t(c));
          o.fd_max_deviation = std::max(o.fd_max_deviation, std::abs(an - fd[std::size_t(c)]) / std::max(1.0, std::abs(an)));
        }
      }
      const Mat phi = sigma->phi_value(p.span());
      const JetDistance dist = jet_distance_on_fiber(*sigma, jet, p.span());
      double sampled = 0.0;
      for (int row = 0; row < d.n; ++row) {
        Vec e(static_cast<std::size_t>(src));
        for (int c = 0; c < src; ++c)
          e[std::size_t(c)] = jet.differential(std::size_t(row), std::size_t(c)) - phi(std::size_t(row), std::size_t(c));
        sampled = std::max(sampled, sampled_restricted_norm(e, Vec(static_cast<std::size_t>(src)), 2000, rng));
      }
      o.norm_max_deviation =
          std::max(o.norm_max_deviation, std::abs(sampled - dist.derivative) / std::max(1.0, dist.derivative));
      ++o.points;
    }
    o.passed = o.fd_max_deviation <= o.tolerance && o.norm_max_deviation <= o.tolerance;
  }

  cert.passed = cert.delta.passed && cert.on_cube.passed && cert.tube_radius > 0.0 && cert.oracle.passed;
  std::ostringstream why;
  if (!cert.delta.passed) {
    why << "|delta| < eps fails: margin " << cert.delta.worst_margin << " (certified " << cert.delta.certified
        << ") at x = " << point_text(cert.delta.worst_point);
  } else if (!cert.on_cube.passed) {
    const bool value_worse = cert.value.worst_margin < cert.derivative.worst_margin;
    const ClauseReport& c = value_worse ? cert.value : cert.derivative;
    why << (value_worse ? "|f1 - f| < eps" : "|df1 - phi| < eps") << " fails on A_delta: margin " << c.worst_margin
        << " (certified " << c.certified << ") at " << point_text(c.worst_point);
  } else if (!(cert.tube_radius > 0.0)) {
    why << "no positive tubular radius verified";
    if (tube_failure) {
      const bool value_worse = tube_failure->value.worst_margin < tube_failure->derivative.worst_margin;
      const ClauseReport& c = value_worse ? tube_failure->value : tube_failure->derivative;
      why << "; at radius " << cert.requested_radius << (value_worse ? " |f1 - f| < eps" : " |df1 - phi| < eps")
          << " has margin " << c.worst_margin << " (certified " << c.certified << ") at " << point_text(c.worst_point);
    }
  } else if (!cert.oracle.passed) {
    why << "oracle disagreement: finite differences " << cert.oracle.fd_max_deviation << ", sampled norm "
        << cert.oracle.norm_max_deviation;
  }
  cert.failure = why.str();
  return cert;
}

// ---------------------------------------------------------------------------
// Oracles

namespace {

// Maximizes f over the unit sphere of R^dim: random samples, then compass
// search from the best few.
double sphere_max(int dim, const std::function<double(const std::vector<double>&)>& f, std::size_t samples,
                  Rng& rng) {
  if (dim == 0) return f({});
  std::normal_distribution<double> normal;
  const std::size_t keep = 4;
  std::vector<std::pair<double, std::vector<double>>> best;
  std::vector<double> u(static_cast<std::size_t>(dim));
  for (std::size_t s = 0; s < samples; ++s) {
    double nn = 0.0;
    for (double& v : u) {
      v = normal(rng);
      nn += v * v;
    }
    if (nn == 0.0) continue;
    const double inv = 1.0 / std::sqrt(nn);
    for (double& v : u) v *= inv;
    const double val = f(u);
    if (best.size() < keep || val > best.back().first) {
      best.emplace_back(val, u);
      std::sort(best.begin(), best.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
      if (best.size() > keep) best.pop_back();
    }
  }
  double top = best.empty() ? 0.0 : best.front().first;
  for (auto& [val, start] : best) {
    std::vector<double> x = start;
    double fx = val;
    for (double step = 0.05; step > 1e-12;) {
      bool improved = false;
      for (int i = 0; i < dim; ++i) {
        for (int sgn = -1; sgn <= 1; sgn += 2) {
          std::vector<double> y = x;
          y[std::size_t(i)] += sgn * step;
          double nn = 0.0;
          for (double v : y) nn += v * v;
          for (double& v : y) v /= std::sqrt(nn);
          const double fy = f(y);
          if (fy > fx) {
            fx = fy;
            x = std::move(y);
            improved = true;
          }
        }
      }
      if (!improved) step *= 0.5;
    }
    top = std::max(top, fx);
  }
  return top;
}

}  // namespace

double sampled_restricted_norm(const Vec& r, const Vec& Y, std::size_t samples, Rng& rng) {
  if (r.size() != Y.size()) throw DimensionError("sampled_restricted_norm: dimension mismatch");
  const int dim = int(r.size());
  const double sq = sphere_max(dim, [&](const std::vector<double>& u) {
    double ru = 0.0, yu = 0.0;
    for (int i = 0; i < dim; ++i) {
      ru += r[std::size_t(i)] * u[std::size_t(i)];
      yu += Y[std::size_t(i)] * u[std::size_t(i)];
    }
    return ru * ru / (1.0 + yu * yu);
  }, samples, rng);
  return std::sqrt(sq);
}

double sampled_slice_ratio(const SliceSpec& spec, double a, const Vec& b, std::size_t samples, Rng& rng) {
  const int k = int(spec.lambda.size());
  const int dim = k + 1;  // (u, u')
  double worst = 0.0;
  for (std::size_t j = 0; j < spec.psi.rows(); ++j) {
    const double sq = sphere_max(dim, [&](const std::vector<double>& v) {
      double num = v[std::size_t(k)] * b[j], lu = a * v[std::size_t(k)];
      for (int i = 0; i < k; ++i) {
        num += spec.psi(j, std::size_t(i)) * v[std::size_t(i)];
        lu += spec.lambda[std::size_t(i)] * v[std::size_t(i)];
      }
      return num * num / (1.0 + lu * lu);
    }, samples, rng);
    worst = std::max(worst, std::sqrt(sq));
  }
  return worst;
}

Vec richardson_gradient(const std::function<double(std::span<const double>)>& f, std::span<const double> x, double h) {
  Vec g(x.size());
  std::vector<double> p(x.begin(), x.end());
  const auto central = [&](std::size_t i, double s) {
    p[i] = x[i] + s;
    const double fp = f(p);
    p[i] = x[i] - s;
    const double fm = f(p);
    p[i] = x[i];
    return (fp - fm) / (2.0 * s);
  };
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d1 = central(i, h), d2 = central(i, 0.5 * h);
    g[i] = (4.0 * d2 - d1) / 3.0;
  }
  return g;
}

namespace {

std::string random_expression(Rng& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, 7);
  std::uniform_real_distribution<double> coef(-2.0, 2.0);
  const auto leaf = [&] {
    const int c = pick(rng) % 3;
    if (c == 0) return std::string("x1");
    if (c == 1) return std::string("x2");
    std::ostringstream s;
    s << coef(rng);
    return "(" + s.str() + ")";
  };
  if (depth == 0) return leaf();
  const std::string a = random_expression(rng, depth - 1);
  const std::string b = random_expression(rng, depth - 1);
  switch (pick(rng)) {
    case 0: return "(" + a + " + " + b + ")";
    case 1: return "(" + a + " - " + b + ")";
    case 2: return "(" + a + " * " + b + ")";
    case 3: return "sin(" + a + ")";
    case 4: return "cos(" + a + ")";
    case 5: return "exp(0.3 * sin(" + a + "))";
    case 6: return "(" + a + ") / (2 + sin(" + b + "))";
    default: return "sqrt(1 + (" + a + ")^2)";
  }
}

}  // namespace

json OracleReport::to_json() const {
  return {{"seed", seed},
          {"trials", trials},
          {"restricted_norm_max_rel_dev", restricted_norm_max_rel},
          {"slice_checked", slice_checked},
          {"slice_disagreements", slice_disagreements},
          {"slice_in_boundary_band", slice_in_band},
          {"K_max_dev", K_max_dev},
          {"dual_fd_max_rel_dev", dual_fd_max_rel},
          {"hull_checked", hull_checked},
          {"hull_failures", hull_failures},
          {"passed", passed()}};
}

bool OracleReport::passed() const {
  return restricted_norm_max_rel < 1e-6 && slice_disagreements == 0 && K_max_dev < 1e-10 && dual_fd_max_rel < 1e-6 &&
         hull_failures == 0;
}

OracleReport oracle_suite(std::uint64_t seed, int trials, std::size_t samples) {
  if (trials < 1) throw InputError("oracle: trials must be >= 1");
  OracleReport rep;
  rep.seed = seed;
  rep.trials = trials;
  Rng rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> dim(1, 4), ndim(1, 3);

  for (int t = 0; t < trials; ++t) {
    // Restricted norm.
    {
      const int m = dim(rng);
      Vec r(static_cast<std::size_t>(m)), Y(static_cast<std::size_t>(m));
      for (int i = 0; i < m; ++i) {
        r[std::size_t(i)] = normal(rng);
        Y[std::size_t(i)] = 2.0 * normal(rng);
      }
      const double closed = std::sqrt(rank_one_inverse_quadratic(r, Y));
      const double sampled = sampled_restricted_norm(r, Y, samples, rng);
      rep.restricted_norm_max_rel = std::max(rep.restricted_norm_max_rel, std::abs(closed - sampled) / std::max(closed, 1e-12));
    }
    // Slice membership.
    {
      const int m = dim(rng), n = ndim(rng);
      SliceSpec spec;
      spec.eps = 0.3 + 1.7 * unit(rng);
      spec.lambda = Vec(static_cast<std::size_t>(m - 1));
      spec.psi = Mat(std::size_t(n), std::size_t(m - 1));
      for (int i = 0; i < m - 1; ++i) spec.lambda[std::size_t(i)] = normal(rng);
      for (int r = 0; r < n; ++r)
        for (int i = 0; i < m - 1; ++i) spec.psi(std::size_t(r), std::size_t(i)) = 0.5 * spec.eps * normal(rng);
      const double a = 2.0 * normal(rng);
      Vec b(static_cast<std::size_t>(n));
      for (int r = 0; r < n; ++r) b[std::size_t(r)] = 2.0 * normal(rng);
      const bool closed = slice_member(spec, a, b).member;
      const double ratio = sampled_slice_ratio(spec, a, b, samples, rng);
      if (std::abs(ratio - spec.eps) <= 1e-6 * std::max(1.0, spec.eps)) {
        ++rep.slice_in_band;
      } else {
        ++rep.slice_checked;
        if ((ratio < spec.eps) != closed) ++rep.slice_disagreements;
      }
    }
    // K identity in both branches.
    {
      const int k = dim(rng);
      Vec lambda(static_cast<std::size_t>(k)), mu(static_cast<std::size_t>(k));
      for (int i = 0; i < k; ++i) lambda[std::size_t(i)] = normal(rng);
      if (t % 2 == 0) {
        for (int i = 0; i < k; ++i) mu[std::size_t(i)] = normal(rng);
      } else {
        mu = normal(rng) * lambda;
      }
      const double eps = 0.5 + unit(rng);
      HyperbolaParams hp = hyperbola_params(lambda, mu, eps);
      while (hp.empty) {
        mu *= 0.5;
        hp = hyperbola_params(lambda, mu, eps);
      }
      rep.K_max_dev = std::max(rep.K_max_dev, std::abs(hp.K - 1.0 / (1.0 + dot(lambda, lambda))));
    }
    // Dual numbers vs finite differences.
    {
      const std::string src = random_expression(rng, 3);
      const Expr e = Expr::parse(src);
      const std::map<std::string, double> pt{{"x1", 2.0 * unit(rng) - 1.0}, {"x2", 2.0 * unit(rng) - 1.0}};
      const Dual dv = e.eval_dual(pt, {"x1", "x2"});
      const double x[2] = {pt.at("x1"), pt.at("x2")};
      const Vec fd = richardson_gradient(
          [&](std::span<const double> q) { return e.eval({{"x1", q[0]}, {"x2", q[1]}}); }, x, 1e-3);
      for (std::size_t i = 0; i < 2; ++i)
        rep.dual_fd_max_rel = std::max(rep.dual_fd_max_rel, std::abs(dv.partial(i) - fd[i]) / std::max(1.0, std::abs(dv.partial(i))));
    }
    // Ampleness certificates.
    {
      const int m = dim(rng), n = ndim(rng);
      SliceSpec spec;
      spec.eps = 0.5 + unit(rng);
      spec.lambda = Vec(static_cast<std::size_t>(m - 1));
      spec.psi = Mat(std::size_t(n), std::size_t(m - 1));
      for (int i = 0; i < m - 1; ++i) spec.lambda[std::size_t(i)] = normal(rng);
      for (int r = 0; r < n; ++r)
        for (int i = 0; i < m - 1; ++i) spec.psi(std::size_t(r), std::size_t(i)) = 0.3 * spec.eps * normal(rng);
      if (slice_geometry(spec).empty) continue;
      Vec target(static_cast<std::size_t>(n + 1));
      for (double& v : target) v = 3.0 * normal(rng);
      const AmplenessCertificate cert = ampleness_certificate(spec, target, 0.5 + unit(rng));
      ++rep.hull_checked;
      if (!cert.hull_verified || !cert.points_in_inner || !cert.points_in_slice) ++rep.hull_failures;
    }
  }
  return rep;
}

}  // namespace holo
