#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "holo/extension.hpp"
#include "support.hpp"

#include <numbers>

using namespace holo;
using holo::test::Gen;

namespace {

constexpr double kPi = std::numbers::pi;

std::shared_ptr<const JetSection> mountain() {
  return std::make_shared<JetSection>(Dims{1, 0, 1}, std::vector<std::string>{"x1"},
                                      std::vector<std::vector<std::string>>{{"0", "0"}});
}

HolonomicPair mountain_pair(double eps, int N) {
  std::ostringstream d, h;
  d.precision(17);
  h.precision(17);
  d << "2*(1 - cos(2*pi*" << N << "*x1))/(" << eps << "*pi*" << N << ")";
  h << "x1 - sin(4*pi*" << N << "*x1)/(4*pi*" << N << ")";
  return expression_pair(1, d.str(), {h.str()});
}

double mountain_g(double eps, int N, double x) {
  const double s = std::sin(2 * kPi * N * x);
  return 4 * eps * (1 - std::cos(4 * kPi * N * x)) * s / (eps * eps + 16 * s * s);
}

// Rows of df1 - phi applied to v, at a point.
Vec defect(const JetSection& sigma, const ExtensionJet& jet, std::span<const double> point, const Vec& v) {
  const Mat phi = sigma.phi_value(point);
  Vec out(jet.differential.rows());
  for (std::size_t r = 0; r < out.size(); ++r)
    for (std::size_t c = 0; c < v.size(); ++c) out[r] += (jet.differential(r, c) - phi(r, c)) * v[c];
  return out;
}

}  // namespace

TEST_CASE("mountain extension field") {
  for (double eps : {1.0, 0.5}) {
    for (int N : {1, 6}) {
      const auto sigma = mountain();
      const HolonomicPair pair = mountain_pair(eps, N);
      for (int i = 0; i <= 256; ++i) {
        const double x[1] = {i / 256.0};
        CHECK(std::abs(extension_field(*sigma, pair, x)[0] - mountain_g(eps, N, x[0])) < 1e-12);
      }
    }
  }
}

TEST_CASE("mountain f1 closed form") {
  const double eps = 1.0;
  const int N = 6;
  const Extension ext = extend(mountain(), mountain_pair(eps, N));
  Gen gen(103);
  for (int trial = 0; trial < 500; ++trial) {
    const double x = gen.uniform(0, 1), y = gen.uniform(-0.5, 0.5);
    const double delta = 2 * (1 - std::cos(2 * kPi * N * x)) / (eps * kPi * N);
    const double h = x - std::sin(4 * kPi * N * x) / (4 * kPi * N);
    const double p[2] = {x, y};
    CHECK(std::abs(ext.value(p)[0] - (h + (y - delta) * mountain_g(eps, N, x))) < 1e-12);
  }
}

TEST_CASE("flat pair with phi = 0 gives g = 0") {
  auto sigma = std::make_shared<JetSection>(Dims{2, 1, 2}, std::vector<std::string>{"x1", "x2"},
                                            std::vector<std::vector<std::string>>(2, std::vector<std::string>(4, "0")));
  const HolonomicPair pair = expression_pair(2, "0", {"x1*x2", "sin(x1)"});
  const double x[2] = {0.3, 0.8};
  CHECK(extension_field(*sigma, pair, x) == Vec{0.0, 0.0});
}

TEST_CASE("flat pair with general phi gives g = phi_y") {
  auto sigma = std::make_shared<JetSection>(
      Dims{2, 1, 2}, std::vector<std::string>{"x1", "x2"},
      std::vector<std::vector<std::string>>{{"1", "x2", "cos(x1) + y", "z1"}, {"0", "2", "x1*x2 - 3", "1"}});
  const HolonomicPair pair = expression_pair(2, "0", {"x1*x2", "sin(x1)"});
  const Extension ext = extend(sigma, pair);
  Gen gen(107);
  for (int trial = 0; trial < 200; ++trial) {
    const Vec x = gen.vec(2, 0, 1);
    const Vec g = extension_field(*sigma, pair, x.span());
    CHECK(std::abs(g[0] - std::cos(x[0])) < 1e-14);
    CHECK(std::abs(g[1] - (x[0] * x[1] - 3)) < 1e-14);
    // d_y f1 on the cube by central differences.
    const double hstep = 1e-6;
    const double up[4] = {x[0], x[1], hstep, 0.0}, dn[4] = {x[0], x[1], -hstep, 0.0};
    const Vec fd = (1.0 / (2 * hstep)) * (ext.value(up) - ext.value(dn));
    CHECK(sup_norm(fd - g) < 1e-8);
  }
}

TEST_CASE("restriction identity and normal directions") {
  auto sigma = std::make_shared<JetSection>(
      Dims{2, 2, 2}, std::vector<std::string>{"x1 + y", "x2*z1"},
      std::vector<std::vector<std::string>>{{"1", "x2", "cos(x1) + y", "z1", "0.5"},
                                            {"0", "2", "x1*x2 - 3", "1", "sin(x2)"}});
  const HolonomicPair pair = expression_pair(2, "0.1*sin(3*x1)*cos(x2)", {"x1 + 0.1*x2^2", "exp(x1*x2)"});
  const Extension ext = extend(sigma, pair);
  Gen gen(109);
  for (int trial = 0; trial < 1000; ++trial) {
    const Vec x = gen.vec(2, 0, 1);
    const double delta = pair.delta(x.span());
    const Vec grad = pair.grad_delta(x.span());
    const double p[5] = {x[0], x[1], delta, 0.0, 0.0};
    CHECK(sup_norm(ext.value(p) - pair.h(x.span())) < 1e-14);
    const ExtensionJet jet = ext.jet(p);
    // Normal to A_delta in (x, y), and the z axes.
    CHECK(sup_norm(defect(*sigma, jet, p, Vec{-grad[0], -grad[1], 1.0, 0.0, 0.0})) < 1e-12);
    CHECK(sup_norm(defect(*sigma, jet, p, Vec{0, 0, 0, 1.0, 0})) < 1e-12);
    CHECK(sup_norm(defect(*sigma, jet, p, Vec{0, 0, 0, 0, 1.0})) < 1e-12);
    // d_z f1 by finite differences equals the z block of phi.
    const double hstep = 1e-6;
    const double zp[5] = {x[0], x[1], delta, hstep, 0.0}, zm[5] = {x[0], x[1], delta, -hstep, 0.0};
    const Vec fd = (1.0 / (2 * hstep)) * (ext.value(zp) - ext.value(zm));
    const Mat phi = sigma->phi_value(p);
    CHECK(std::abs(fd[0] - phi(0, 3)) < 1e-8);
    CHECK(std::abs(fd[1] - phi(1, 3)) < 1e-8);
  }
}

TEST_CASE("analytic jet matches finite differences off the cube") {
  auto sigma = std::make_shared<JetSection>(
      Dims{2, 1, 1}, std::vector<std::string>{"x1 + y"},
      std::vector<std::vector<std::string>>{{"x2", "cos(x1) + y", "z1^2", "0.5*x1"}});
  const HolonomicPair pair = expression_pair(2, "0.2*sin(3*x1)*cos(x2)", {"x1 + 0.1*x2^2"});
  const Extension ext = extend(sigma, pair);
  Gen gen(113);
  for (int trial = 0; trial < 300; ++trial) {
    Vec p = gen.vec(4, -0.2, 1.2);
    const ExtensionJet jet = ext.jet(p.span());
    for (std::size_t c = 0; c < 4; ++c) {
      const double hstep = 1e-5;
      Vec up = p, dn = p;
      up[c] += hstep;
      dn[c] -= hstep;
      const double fd = (ext.value(up.span())[0] - ext.value(dn.span())[0]) / (2 * hstep);
      CHECK(jet.differential(0, c) == doctest::Approx(fd).epsilon(1e-7).scale(1.0));
    }
  }
}

TEST_CASE("fiber data reproduces the pointwise jet") {
  auto sigma = std::make_shared<JetSection>(
      Dims{2, 1, 2}, std::vector<std::string>{"x1 + y", "x2*z1"},
      std::vector<std::vector<std::string>>{{"1", "x2", "cos(x1) + y", "z1"}, {"0", "2", "x1*x2 - 3", "1"}});
  const HolonomicPair pair = expression_pair(2, "0.1*sin(3*x1)*cos(x2)", {"x1 + 0.1*x2^2", "exp(x1*x2)"});
  const Extension ext = extend(sigma, pair);
  Gen gen(127);
  for (int trial = 0; trial < 100; ++trial) {
    const Vec x = gen.vec(2, 0, 1);
    const FiberData f = ext.fiber(x.span());
    for (int s = 0; s < 5; ++s) {
      const double p[4] = {x[0], x[1], f.delta + gen.uniform(-0.1, 0.1), gen.uniform(-0.1, 0.1)};
      const ExtensionJet a = ext.jet(f, p), b = ext.jet(p);
      CHECK(sup_norm(a.value - b.value) < 1e-13);
      for (std::size_t r = 0; r < 2; ++r)
        for (std::size_t c = 0; c < 4; ++c) CHECK(std::abs(a.differential(r, c) - b.differential(r, c)) < 1e-12);
    }
  }
}

TEST_CASE("jet distance on the mountain") {
  const double eps = 1.0;
  const int N = 6;
  const Extension ext = extend(mountain(), mountain_pair(eps, N));
  double on_cube = 0.0;
  std::vector<double> fiber_sup(3, 0.0);
  const double radii[3] = {0.02, 0.01, 0.005};
  for (int i = 0; i <= 512; ++i) {
    const double x = i / 512.0;
    const double delta = ext.pair().delta(std::span<const double>(&x, 1));
    const double p[2] = {x, delta};
    const JetDistance d = jet_distance_on_fiber(ext, p);
    CHECK(d.total() < eps);
    on_cube = std::max(on_cube, d.total());
    for (int r = 0; r < 3; ++r)
      for (int s = -8; s <= 8; ++s) {
        const double q[2] = {x, delta + radii[r] * s / 8.0};
        fiber_sup[std::size_t(r)] = std::max(fiber_sup[std::size_t(r)], jet_distance_on_fiber(ext, q).total());
      }
  }
  // The fiber supremum decreases to the on-cube value as the radius shrinks.
  CHECK(fiber_sup[0] >= fiber_sup[1]);
  CHECK(fiber_sup[1] >= fiber_sup[2]);
  CHECK(fiber_sup[2] - on_cube <= (fiber_sup[1] - on_cube) * 0.6);
  CHECK(fiber_sup[2] >= on_cube);
}

TEST_CASE("jet distance of an exact solution is zero") {
  auto sigma = std::make_shared<JetSection>(
      Dims{1, 1, 1}, std::vector<std::string>{"sin(x1) + 0.5*y"},
      std::vector<std::vector<std::string>>{{"cos(x1)", "0.5", "0"}});
  const Extension ext = extend(sigma, expression_pair(1, "0", {"sin(x1)"}));
  Gen gen(131);
  for (int trial = 0; trial < 200; ++trial) {
    const Vec p = gen.vec(3, -0.1, 1.1);
    const JetDistance d = jet_distance_on_fiber(ext, p.span());
    CHECK(d.value < 1e-14);
    CHECK(d.derivative < 1e-14);
  }
}

TEST_CASE("expression pair validates its input") {
  CHECK_THROWS_AS(expression_pair(1, "y", {"x1"}), InputError);
  CHECK_THROWS_AS(expression_pair(1, "x1 +", {"x1"}), InputError);
  const HolonomicPair p = expression_pair(2, "x1*x2", {"x1^2"});
  const double x[2] = {0.5, 2.0};
  CHECK(p.delta(x) == 1.0);
  CHECK(p.grad_delta(x) == Vec{2.0, 0.5});
  CHECK(p.dh(x) == Mat::from_rows({{1.0, 0.0}}));
}
