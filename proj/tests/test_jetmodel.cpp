#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "holo/jetmodel.hpp"
#include "holo/relation.hpp"
#include "support.hpp"

#include <numbers>

using namespace holo;
using holo::test::Gen;

namespace {

std::shared_ptr<const JetSection> mountain() {
  return std::make_shared<JetSection>(Dims{1, 0, 1}, std::vector<std::string>{"x1"},
                                       std::vector<std::vector<std::string>>{{"0", "0"}});
}

JetPoint state_point(const FormalSolutionState& s, const Vec& x) {
  const Dims d = s.dims();
  const StateJet j = s.evaluate(x.span(), 0);
  JetPoint p;
  p.x = x;
  p.y = j.value[0].value();
  p.w = Vec(std::size_t(d.n));
  for (int r = 0; r < d.n; ++r) p.w[std::size_t(r)] = j.value[std::size_t(r + 1)].value();
  p.Y = Vec(std::size_t(d.m));
  p.W = Mat(std::size_t(d.n), std::size_t(d.m));
  for (int c = 0; c < d.m; ++c) {
    p.Y[std::size_t(c)] = j.formal_at(0, c, d.m).value();
    for (int r = 0; r < d.n; ++r) p.W(std::size_t(r), std::size_t(c)) = j.formal_at(r + 1, c, d.m).value();
  }
  return p;
}

}  // namespace

TEST_CASE("dims validation") {
  CHECK_NOTHROW(Dims(1, 0, 1).validate());
  CHECK_THROWS_AS(Dims(0, 0, 1).validate(), InputError);
  CHECK_THROWS_AS(Dims(1, -1, 1).validate(), InputError);
  CHECK_THROWS_AS(Dims(1, 0, 0).validate(), InputError);
  CHECK(Dims(2, 1, 3).source() == 4);
}

TEST_CASE("section rejects malformed input") {
  using Rows = std::vector<std::vector<std::string>>;
  const auto make = [](std::vector<std::string> f, Rows phi) { JetSection(Dims{1, 0, 1}, f, phi); };
  CHECK_THROWS_AS(make({"x1", "x1"}, {{"0", "0"}}), InputError);
  CHECK_THROWS_AS(make({"x1"}, {{"0"}}), InputError);
  CHECK_THROWS_AS(make({"x2"}, {{"0", "0"}}), InputError);
  CHECK_THROWS_AS(make({"x1 +"}, {{"0", "0"}}), InputError);
}

TEST_CASE("canonical formal solution of the mountain") {
  const FormalSolutionState s = canonical_formal_solution(mountain());
  for (double x : {0.0, 0.25, 0.6, 1.0}) {
    const JetPoint p = state_point(s, Vec{x});
    CHECK(p.y == 0.0);
    CHECK(p.w[0] == x);
    CHECK(p.Y[0] == 0.0);
    CHECK(p.W(0, 0) == 0.0);
  }
  CHECK(s.holonomic_directions().empty());
}

TEST_CASE("canonical formal solution picks the x block of phi") {
  auto sigma = std::make_shared<JetSection>(
      Dims{2, 1, 2}, std::vector<std::string>{"sin(x1)+y", "x2*z1"},
      std::vector<std::vector<std::string>>{{"1", "0", "7", "8"}, {"0", "1", "9", "x1"}});
  const FormalSolutionState s = canonical_formal_solution(sigma);
  const JetPoint p = state_point(s, Vec{0.0, 0.0});
  CHECK(p.y == 0.0);
  CHECK(p.w == Vec{0.0, 0.0});
  CHECK(p.Y == Vec{0.0, 0.0});
  CHECK(p.W == Mat::identity(2));
  const JetPoint q = state_point(s, Vec{0.3, 0.7});
  CHECK(q.w[0] == doctest::Approx(std::sin(0.3)));
  CHECK(q.w[1] == 0.0);
}

TEST_CASE("canonical formal solution is a member for every eps") {
  Gen gen(41);
  auto sigma = std::make_shared<JetSection>(
      Dims{2, 1, 1}, std::vector<std::string>{"x1*x2 + y"},
      std::vector<std::vector<std::string>>{{"cos(x1)", "x2^2", "3 + x1", "z1 - 2"}});
  const FormalSolutionState s = canonical_formal_solution(sigma);
  for (int trial = 0; trial < 200; ++trial) {
    const Vec x = gen.vec(2, 0, 1);
    const double eps = std::pow(10.0, gen.uniform(-6, 1));
    const RhaVerdict v = rha_member(*sigma, eps, state_point(s, x));
    CHECK(v.member);
    CHECK(v.height == 0.0);
    CHECK(v.value == 0.0);
    // The state goes through Taylor arithmetic and sigma through the
    // bytecode evaluator; they may round differently in the last bit.
    CHECK(v.derivative < 1e-15);
  }
}

TEST_CASE("tangent space of deformed cubes") {
  {
    const DeformedCube flat(HolonomicPair(2, 1, [](std::span<const double> x, int order) {
                              std::vector<Taylor> out;
                              out.push_back(Taylor::constant(0.0, 2, order));
                              out.push_back(Taylor::variable(x[0], 0, 2, order));
                              return out;
                            }),
                            1);
    const double x[2] = {0.3, 0.4};
    const std::vector<Vec> basis = tangent_space(flat, x);
    REQUIRE(basis.size() == 2);
    CHECK(basis[0] == Vec{1, 0, 0, 0});
    CHECK(basis[1] == Vec{0, 1, 0, 0});
  }
  {
    const DeformedCube slope(HolonomicPair(1, 1, [](std::span<const double> x, int order) {
                               std::vector<Taylor> out;
                               out.push_back(Taylor::variable(x[0], 0, 1, order));
                               out.push_back(Taylor::constant(0.0, 1, order));
                               return out;
                             }),
                             0);
    const double x[1] = {0.7};
    CHECK(tangent_space(slope, x)[0] == Vec{1, 1});
    CHECK(slope.point(x) == Vec{0.7, 0.7});
  }
  {
    const double eps = 0.8;
    const int N = 6;
    const DeformedCube mountain_cube(
        HolonomicPair(1, 1, [&](std::span<const double> x, int order) {
          const Taylor t = Taylor::variable(x[0], 0, 1, order);
          const double w = 2 * std::numbers::pi * N;
          std::vector<Taylor> out;
          out.push_back((1.0 - cos(w * t)) * (2.0 / (eps * std::numbers::pi * N)));
          out.push_back(t);
          return out;
        }),
        0);
    for (double x : {0.01, 0.2, 0.55}) {
      const double pt[1] = {x};
      const Vec v = tangent_space(mountain_cube, pt)[0];
      CHECK(v[0] == 1.0);
      CHECK(v[1] == doctest::Approx(4 * std::sin(2 * std::numbers::pi * N * x) / eps).epsilon(1e-13));
    }
  }
}

TEST_CASE("grid layout") {
  const Grid g(Vec{0, -1}, Vec{1, 1}, {3, 5});
  CHECK(g.size() == 15);
  CHECK(g.spacing(0) == 0.5);
  CHECK(g.spacing(1) == 0.5);
  CHECK(g.point(0) == Vec{0, -1});
  CHECK(g.point(1) == Vec{0.5, -1});
  CHECK(g.point(14) == Vec{1, 1});
  CHECK(g.axis_index(7, 0) == 1);
  CHECK(g.axis_index(7, 1) == 2);
  const Grid u = Grid::uniform(2, 0.0, 1.0, 0.3);
  CHECK(u.max_spacing() <= 0.3);
  CHECK(u.counts() == std::vector<std::size_t>{5, 5});
}

TEST_CASE("lipschitz certification") {
  SUBCASE("positive linear function passes") {
    const Grid g(Vec{0}, Vec{1}, {11});
    std::vector<double> v;
    for (std::size_t i = 0; i < g.size(); ++i) v.push_back(1.0 + g.point(i)[0]);
    const LipschitzReport r = lipschitz_certify(g, v);
    CHECK(r.passed);
    CHECK(r.worst == 1.0);
    CHECK(r.lipschitz[0] == doctest::Approx(1.0));
    CHECK(r.certified == doctest::Approx(1.0 - 0.1));
  }
  SUBCASE("a sampled sign change fails") {
    const Grid g(Vec{0}, Vec{1}, {11});
    std::vector<double> v;
    for (std::size_t i = 0; i < g.size(); ++i) v.push_back(std::cos(3 * g.point(i)[0]));
    CHECK_FALSE(lipschitz_certify(g, v).passed);
  }
  SUBCASE("a dip between samples is caught by the inflation") {
    // Positive at every sample, but the slope is too large for the spacing.
    const Grid g(Vec{0}, Vec{1}, {5});
    std::vector<double> v{0.05, 1.0, 0.05, 1.0, 0.05};
    CHECK_FALSE(lipschitz_certify(g, v).passed);
  }
  SUBCASE("the certified bound holds on a dense reference") {
    Gen gen(43);
    for (int trial = 0; trial < 30; ++trial) {
      const double a = gen.uniform(0.5, 3), b = gen.uniform(0.5, 4), c = gen.uniform(0.2, 2);
      const auto f = [&](double x, double y) { return c + std::sin(a * x) * std::cos(b * y); };
      const Grid g(Vec{0, 0}, Vec{1, 1}, {33, 33});
      std::vector<double> v;
      for (std::size_t i = 0; i < g.size(); ++i) {
        const Vec p = g.point(i);
        v.push_back(f(p[0], p[1]));
      }
      const LipschitzReport r = lipschitz_certify(g, v);
      double dense = 1e300;
      for (int i = 0; i <= 400; ++i)
        for (int j = 0; j <= 400; ++j) dense = std::min(dense, f(i / 400.0, j / 400.0));
      CHECK(r.certified <= dense + 1e-12);
      CHECK(r.passed == (r.certified > 0));
    }
  }
}
