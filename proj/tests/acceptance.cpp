// Acceptance suite: one PASS/FAIL line per criterion. Every tolerance and
// time budget is pinned below; the process exits non-zero if any line fails.

#include "holo/cli.hpp"
#include "holo/corrugation.hpp"
#include "holo/extension.hpp"
#include "holo/relation.hpp"
#include "holo/verify.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace holo;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;
const std::string kData = HOLO_TEST_DATA;

// Pinned tolerances.
constexpr double kClosedFormTol = 1e-12;
constexpr double kKTol = 1e-10;
constexpr double kBand = 1e-6;
constexpr double kSlopeTol = 0.2;
constexpr double kGoodMargin = 0.05;

// Pinned time budgets in seconds.
constexpr double kBudgetC1 = 1.0;
constexpr double kBudgetC2 = 5.0;
constexpr double kBudgetC3 = 30.0;
constexpr double kBudgetC4 = 5.0;

struct Outcome {
  bool pass = false;
  std::string detail;
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

std::shared_ptr<const JetSection> mountain_section() {
  return std::make_shared<JetSection>(Dims{1, 0, 1}, std::vector<std::string>{"x1"},
                                      std::vector<std::vector<std::string>>{{"0", "0"}});
}

double mountain_delta(double eps, int N, double x) {
  return 2 * (1 - std::cos(2 * kPi * N * x)) / (eps * kPi * N);
}
double mountain_h(int N, double x) { return x - std::sin(4 * kPi * N * x) / (4 * kPi * N); }
double mountain_f1(double eps, int N, double x, double y) {
  const double s = std::sin(2 * kPi * N * x);
  const double g = 4 * eps * (1 - std::cos(4 * kPi * N * x)) * s / (eps * eps + 16 * s * s);
  return mountain_h(N, x) + (y - mountain_delta(eps, N, x)) * g;
}

SolveResult solve_mountain(double eps, int fixed_N) {
  SolveOptions o;
  o.mode = LoopMode::Mountain;
  if (fixed_N > 0) o.fixed_N = {fixed_N};
  return solve(mountain_section(), eps, o);
}

// 1. Closed forms of the corrugated mountain.
Outcome mountain_closed_forms() {
  Stopwatch clock;
  double worst = 0.0;
  std::string ns;
  for (double eps : {1.0, 0.5}) {
    const SolveResult r = solve_mountain(eps, 0);
    const int N = r.directions[0].N;
    ns += fmt("%sN(eps=%g)=%d", ns.empty() ? "" : ", ", eps, N);
    for (int i = 0; i <= 1024; ++i) {
      const double x = i / 1024.0;
      worst = std::max(worst, std::abs(r.pair.delta(std::span<const double>(&x, 1)) - mountain_delta(eps, N, x)));
      worst = std::max(worst, std::abs(r.pair.h(std::span<const double>(&x, 1))[0] - mountain_h(N, x)));
    }
  }
  const double t = clock.seconds();
  return {worst < kClosedFormTol && t < kBudgetC1,
          fmt("sup error %.2e on a 2^-10 grid (%s), %.2f s", worst, ns.c_str(), t)};
}

// 2. Extension formula on a 512 x 64 tube.
Outcome explicit_extension() {
  Stopwatch clock;
  double worst = 0.0;
  for (double eps : {1.0, 0.5}) {
    const int N = 6;
    const SolveResult r = solve_mountain(eps, N);
    const Extension ext = extend(mountain_section(), r.pair);
    for (int i = 0; i < 512; ++i) {
      const double x = i / 511.0;
      const double d = mountain_delta(eps, N, x);
      for (int l = 0; l < 64; ++l) {
        const double p[2] = {x, d - 0.1 + 0.2 * l / 63.0};
        worst = std::max(worst, std::abs(ext.value(p)[0] - mountain_f1(eps, N, p[0], p[1])));
      }
    }
  }
  const double t = clock.seconds();
  return {worst < kClosedFormTol && t < kBudgetC2, fmt("sup error %.2e on 512x64 tube points, %.2f s", worst, t)};
}

// 3. Sufficient frequency for the mountain.
Outcome frequency_bound() {
  Stopwatch clock;
  bool ok = true;
  std::string detail;
  for (double eps : {0.9, 0.5, 0.25}) {
    const int bound = int(std::ceil(4.0 / (kPi * eps * eps)));
    CertifyOptions co;
    co.frequencies = {bound};
    const Certificate at_bound = certify_solution(mountain_section(), eps, solve_mountain(eps, bound).pair, co);
    const int searched = solve_mountain(eps, 0).directions[0].N;
    co.frequencies = {searched};
    const Certificate at_min = searched == bound
                                   ? at_bound
                                   : certify_solution(mountain_section(), eps, solve_mountain(eps, searched).pair, co);
    ok = ok && at_bound.passed && at_min.passed && searched <= bound;
    detail += fmt("eps %g: bound %d %s, searched %d %s; ", eps, bound, at_bound.passed ? "PASS" : "FAIL",
                  searched, at_min.passed ? "PASS" : "FAIL");
  }
  const double t = clock.seconds();
  return {ok && t < kBudgetC3, detail + fmt("%.2f s", t)};
}

// 4. K = 1/(1 + |lambda|^2) on both branches.
Outcome k_identity() {
  Stopwatch clock;
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  int generic = 0, collinear = 0;
  double worst = 0.0;
  while (generic + collinear < 1000) {
    const std::size_t d = std::size_t(1 + rng() % 4);
    const double eps = 0.1 + 3 * (U(rng) + 1);
    Vec lambda(d), mu(d);
    for (double& v : lambda) v = 3 * U(rng);
    const bool col = (generic + collinear) % 2 == 1;
    if (col) {
      mu = (eps * U(rng)) * lambda;
    } else {
      for (double& v : mu) v = eps * U(rng);
    }
    const HyperbolaParams h = hyperbola_params(lambda, mu, eps);
    if (h.empty) continue;
    if (col != (h.branch == SliceBranch::Collinear)) continue;
    (col ? collinear : generic)++;
    worst = std::max(worst, std::abs(h.K - 1.0 / (1.0 + dot(lambda, lambda))));
  }
  const double t = clock.seconds();
  return {worst < kKTol && t < kBudgetC4,
          fmt("max deviation %.2e over %d generic + %d collinear, %.2f s", worst, generic, collinear, t)};
}

SliceSpec random_spec(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  SliceSpec s;
  const std::size_t d = std::size_t(rng() % 3), n = std::size_t(1 + rng() % 3);
  s.eps = std::pow(10.0, 0.5 * U(rng));
  s.lambda = Vec(d);
  if (rng() % 4) for (double& v : s.lambda) v = 2 * U(rng);
  s.psi = Mat(n, d);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < d; ++c) s.psi(r, c) = 0.9 * s.eps * U(rng) / std::sqrt(double(d));
  if (d == 2 && rng() % 3 == 0)  // collinear psi rows
    for (std::size_t r = 0; r < n; ++r) {
      const double k = 0.4 * U(rng);
      for (std::size_t c = 0; c < d; ++c) s.psi(r, c) = k * s.eps * s.lambda[c];
    }
  return s;
}

// 5. Closed-form slice membership against the sampled quantifier.
Outcome slice_oracle() {
  Stopwatch clock;
  std::mt19937_64 rng(5);
  Rng oracle_rng(55);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  int disagreements = 0, in_band = 0, members = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const SliceSpec s = random_spec(rng);
    const SliceGeometry g = slice_geometry(s);
    const double a = 4 * U(rng);
    Vec b(s.psi.rows());
    for (double& v : b) v = 3 * s.eps * U(rng);
    if (trial % 2 == 0) {
      // Put half of the points near the boundary: rescale b along the ray
      // until the closed form is within a few percent of it.
      for (int it = 0; it < 60; ++it) {
        const SliceVerdict v = slice_member(g, a, b);
        const double scale = v.member ? 1.05 : 0.95;
        if (std::abs(v.excess) < 0.05 * s.eps * s.eps) break;
        b = scale * b;
      }
    }
    const bool closed = slice_member(g, a, b).member;
    const double ratio = sampled_slice_ratio(s, a, b, 100000, oracle_rng);
    if (std::abs(ratio - s.eps) < kBand * std::max(1.0, s.eps)) {
      ++in_band;
      continue;
    }
    members += closed;
    if (closed != (ratio < s.eps)) ++disagreements;
  }
  return {disagreements == 0,
          fmt("%d disagreements, %d members, %d in band, %.2f s", disagreements, members, in_band, clock.seconds())};
}

// 6. Star shape and origin membership.
Outcome star_shape() {
  Stopwatch clock;
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  int tested = 0, failures = 0, slices = 0, origin_failures = 0;
  while (tested < 10000) {
    const SliceSpec s = random_spec(rng);
    const SliceGeometry g = slice_geometry(s);
    if (g.empty) continue;
    ++slices;
    if (!slice_member(g, 0.0, Vec(s.psi.rows())).member) ++origin_failures;
    const double a = 5 * U(rng);
    Vec b(s.psi.rows());
    for (double& v : b) v = 3 * s.eps * U(rng);
    if (!slice_member(g, a, b).member) continue;
    const double t = 0.5 * (1.0 - U(rng));  // (0, 1]
    if (!slice_member(g, t * a, t * b).member) ++failures;
    ++tested;
  }
  return {failures == 0 && origin_failures == 0,
          fmt("%d star failures in %d pairs, origin outside %d of %d slices, %.2f s", failures, tested,
              origin_failures, slices, clock.seconds())};
}

// Worst R_ha margin of the pair's holonomic jet on [0,1], split by clause.
struct PairMargins {
  double height, value, derivative;
};
PairMargins pair_margins(const JetSection& sigma, double eps, const HolonomicPair& pair, int samples) {
  PairMargins m{1e300, 1e300, 1e300};
  for (int i = 0; i <= samples; ++i) {
    const double x = double(i) / samples;
    const std::span<const double> xs(&x, 1);
    JetPoint p{Vec{x}, pair.delta(xs), pair.h(xs), pair.grad_delta(xs), pair.dh(xs)};
    const RhaVerdict v = rha_member(sigma, eps, p);
    m.height = std::min(m.height, eps - v.height);
    m.value = std::min(m.value, eps - v.value);
    m.derivative = std::min(m.derivative, eps - v.derivative);
  }
  return m;
}

// 7. Extension succeeds exactly for pairs in the relation.
Outcome main_theorem() {
  Stopwatch clock;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const auto sigma = mountain_section();
  int good = 0, bad = 0, good_ok = 0, bad_ok = 0, tries = 0;
  double min_radius = 1e300;
  while ((good < 50 || bad < 50) && tries < 100000) {
    ++tries;
    // Mountain-class pairs: a corrugation of random frequency, amplitude and
    // phase plus a smooth perturbation of both components.
    const double eps = 0.4 + 0.8 * U(rng);
    const int p = 1 + int(rng() % 6);
    const double A = (0.2 + 1.8 * U(rng)) * 4 / eps, B = 2 * U(rng), c = U(rng), e = 0.1 * U(rng);
    std::ostringstream d, h;
    d.precision(17);
    h.precision(17);
    d << A << "*(1 - cos(2*pi*" << p << "*x1 + " << c << "))/(2*pi*" << p << ")";
    h << "x1 - " << B << "*sin(2*(2*pi*" << p << "*x1 + " << c << "))/(4*pi*" << p << ") + " << e << "*sin(3*x1)";
    const HolonomicPair pair = expression_pair(1, d.str(), {h.str()});
    const PairMargins m = pair_margins(*sigma, eps, pair, 64 * p);
    const double worst = std::min({m.height, m.value, m.derivative});
    const Extension ext = extend(sigma, pair);
    if (worst > kGoodMargin && good < 50) {
      ++good;
      CertifyOptions co;
      co.frequencies = {2 * p};
      const Certificate cert = certify_solution(sigma, eps, pair, co);
      // Independent on-cube sweep of the extended jet.
      double on_cube = 0.0;
      for (int i = 0; i <= 2048; ++i) {
        const double x = i / 2048.0;
        const double q[2] = {x, pair.delta(std::span<const double>(&x, 1))};
        on_cube = std::max(on_cube, jet_distance_on_fiber(ext, q).total());
      }
      if (cert.passed && cert.tube_radius > 0.0 && on_cube < eps) ++good_ok;
      min_radius = std::min(min_radius, cert.tube_radius);
    } else if (m.height > 0.0 && std::min(m.value, m.derivative) < -kGoodMargin && bad < 50) {
      // The height clause does not involve f1, so violations are drawn from
      // the value and derivative clauses.
      ++bad;
      double on_cube = 0.0;
      for (int i = 0; i <= 64 * p; ++i) {
        const double x = double(i) / (64 * p);
        const double q[2] = {x, pair.delta(std::span<const double>(&x, 1))};
        on_cube = std::max(on_cube, jet_distance_on_fiber(ext, q).total());
      }
      if (on_cube >= eps) ++bad_ok;
    }
  }
  return {good == 50 && bad == 50 && good_ok == 50 && bad_ok == 50,
          fmt("%d/%d good pairs extend (min tube radius %.3g), %d/%d bad pairs violate on A_delta, %.2f s", good_ok,
              good, min_radius, bad_ok, bad, clock.seconds())};
}

// 8. Mesh export at N = 6, eps = 1.
Outcome mesh_formula() {
  Stopwatch clock;
  const fs::path obj = fs::temp_directory_path() / "holo_acceptance_mesh.obj";
  const std::string config = (fs::path(kData) / "mountain.ini").string();
  const std::string out = obj.string();
  const char* argv[] = {"holo", "mesh", config.c_str(), "--N", "6", "--eps", "1", "-o", out.c_str()};
  std::ostringstream sink_out, sink_err;
  const int code = run_cli(9, argv, sink_out, sink_err);
  std::ifstream in(obj);
  std::string line, object;
  double worst = 0.0;
  int vertices = 0;
  while (std::getline(in, line)) {
    if (line.rfind("o ", 0) == 0) object = line.substr(2);
    if (line.rfind("v ", 0) != 0) continue;
    double x, y, z;
    std::istringstream(line.substr(2)) >> x >> y >> z;
    worst = std::max(worst, std::abs(z - (object == "f1" ? mountain_f1(1.0, 6, x, y) : x)));
    ++vertices;
  }
  return {code == kExitPass && vertices > 0 && worst < kClosedFormTol,
          fmt("exit %d, %d vertices, sup error %.2e, %.2f s", code, vertices, worst, clock.seconds())};
}

// 9. Two-direction solve at eps = 0.5 and the 1/N residual.
Outcome multi_direction() {
  Stopwatch clock;
  const Config config = load_config((fs::path(kData) / "smoke2.ini").string());
  const auto sigma = config.section();
  const double eps = 0.5;
  const SolveResult r = solve(sigma, eps, config.solver);
  CertifyOptions co = config.certify;
  for (const DirectionReport& d : r.directions) co.frequencies.push_back(d.N);
  const Certificate cert = certify_solution(sigma, eps, r.pair, co);

  bool slopes_ok = r.directions.size() == 2;
  std::string slopes;
  std::set<int> done;
  for (const DirectionReport& d : r.directions) {
    const FormalSolutionState before(sigma, d.family.source, done);
    const int j = d.direction;
    // Least-squares slope of log residual against log N over N, 2N, 4N, 8N.
    std::vector<double> lx, ly;
    for (int f = 1; f <= 8; f *= 2) {
      const int N = std::max(1, d.N) * f;
      std::vector<std::size_t> counts(2, 33);
      counts[std::size_t(j)] = std::size_t(96 * N + 1);
      const Grid grid(Vec{0.0, 0.0}, Vec{1.0, 1.0}, counts);
      lx.push_back(std::log(double(N)));
      ly.push_back(std::log(formal_residual(corrugate(before, d.family, N), j, grid)));
    }
    const double n = double(lx.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      sx += lx[i];
      sy += ly[i];
      sxx += lx[i] * lx[i];
      sxy += lx[i] * ly[i];
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    slopes_ok = slopes_ok && std::abs(slope + 1.0) <= kSlopeTol;
    slopes += fmt("%sdirection %d: N=%d slope %.3f", slopes.empty() ? "" : ", ", j + 1, d.N, slope);
    done.insert(j);
  }
  return {cert.passed && slopes_ok,
          fmt("certificate %s (delta margin %.3g, value margin %.3g, derivative margin %.3g, tube radius %.3g); %s; "
              "%.2f s",
              cert.passed ? "PASS" : "FAIL", cert.delta.worst_margin, cert.value.worst_margin,
              cert.derivative.worst_margin, cert.tube_radius, slopes.c_str(), clock.seconds())};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"mountain closed forms", mountain_closed_forms},
      {"explicit extension", explicit_extension},
      {"frequency bound", frequency_bound},
      {"K identity", k_identity},
      {"slice oracle equivalence", slice_oracle},
      {"star shape", star_shape},
      {"extension iff relation", main_theorem},
      {"mesh formula", mesh_formula},
      {"multi-direction smoke", multi_direction},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
