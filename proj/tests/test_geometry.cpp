#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "greenlab/geometry.hpp"
#include "greenlab/rng.hpp"

using namespace greenlab;

namespace {
const ModelSpace P1 = ModelSpace::make(SpaceKind::P1);
const ModelSpace P2 = ModelSpace::make(SpaceKind::P2);
const ModelSpace PP = ModelSpace::make(SpaceKind::P1xP1);
}  // namespace

TEST_CASE("fs potential pinned values") {
  CHECK(fs_potential(P1, 0, {Complex(0), 0}) == doctest::Approx(0.0));
  CHECK(fs_potential(P1, 0, {Complex(1), 0}) == doctest::Approx(0.5 * std::log(2.0)));
  CHECK(fs_potential(P2, 0, {Complex(0), Complex(0)}) == doctest::Approx(0.0));
  CHECK(fs_potential(P2, 0, {Complex(1), Complex(1)}) == doctest::Approx(0.5 * std::log(3.0)));
  CHECK(fs_potential(PP, 0, {Complex(0), Complex(0)}) == doctest::Approx(0.0));
  CHECK(fs_potential(PP, 0, {Complex(1), Complex(1)}) ==
        doctest::Approx(std::sqrt(0.5) * std::log(2.0)));
}

TEST_CASE("reference class is volume-normalized with unit degree") {
  for (auto s : {P1, P2, PP}) {
    auto c = reference_class(s);
    CHECK(class_volume(s, c) == doctest::Approx(1.0));
    CHECK(class_degree(s, c) == doctest::Approx(1.0));
  }
  // scaling laws
  CHECK(class_volume(P2, {3.0}) == doctest::Approx(9.0));
  CHECK(class_volume(PP, {1.0, 2.0}) == doctest::Approx(4.0));
  CHECK(class_degree(PP, {2.0, 1.0}) == doctest::Approx(3.0 / std::sqrt(2.0)));
}

TEST_CASE("chart transitions are involutive") {
  Rng r(7);
  for (int t = 0; t < 50; ++t) {
    for (auto s : {P1, P2, PP}) {
      Point p = random_point(s, r);
      int c = owner_chart(p);
      ChartCoords z = chart_coords(p, c);
      Point q = point_from_chart(s, c, z);
      CHECK(p.dist(q) < 1e-12);
      // chart coords bounded on the owner chart
      for (int i = 0; i < s.dim; ++i) CHECK(std::abs(z[i]) <= 1.0 + 1e-12);
    }
  }
}

TEST_CASE("owner chart rule on P1") {
  Point inside{SpaceKind::P1, {Complex(1.0), Complex(0.5), 0, 0}};
  CHECK(owner_chart(inside) == 0);
  Point outside{SpaceKind::P1, {Complex(1.0), Complex(2.0), 0, 0}};
  outside.normalize();
  CHECK(owner_chart(outside) == 1);
  Point tie{SpaceKind::P1, {Complex(1.0), Complex(0.0, 1.0), 0, 0}};
  CHECK(owner_chart(tie) == 0);  // ties go to the lowest chart id
}

TEST_CASE("off-chart coordinates throw") {
  Point inf{SpaceKind::P1, {Complex(0.0), Complex(1.0), 0, 0}};
  CHECK_THROWS_AS(chart_coords(inf, 0), DomainError);
  CHECK(chart_contains(inf, 1));
  CHECK_FALSE(chart_contains(inf, 0));
}

TEST_CASE("embedding distances") {
  Point a{SpaceKind::P1, {Complex(1.0), Complex(0.0), 0, 0}};
  Point b{SpaceKind::P1, {Complex(0.0), Complex(1.0), 0, 0}};
  CHECK(a.dist(b) == doctest::Approx(2.0));  // antipodes on the unit sphere
  CHECK(a.dist(a) == doctest::Approx(0.0));
  // scale invariance
  Point c{SpaceKind::P1, {Complex(2.0), Complex(0.0), 0, 0}};
  c.normalize();
  CHECK(a.dist(c) == doctest::Approx(0.0));
  // P2 embedding: distinct coordinate points are equidistant
  Point e0{SpaceKind::P2, {Complex(1), 0, 0, 0}};
  Point e1{SpaceKind::P2, {0, Complex(1), 0, 0}};
  Point e2{SpaceKind::P2, {0, 0, Complex(1), 0}};
  CHECK(e0.dist(e1) == doctest::Approx(e1.dist(e2)));
  CHECK(e0.dist(e1) == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("quadrature mass is 1 on all models") {
  const Grid& g1 = get_grid(P1);
  CHECK(std::abs(g1.total_mass - 1.0) < 1e-3);
  const Grid& g2 = get_grid(P2);
  CHECK(std::abs(g2.total_mass - 1.0) < 1e-3);
  const Grid& gp = get_grid(PP);
  CHECK(std::abs(gp.total_mass - 1.0) < 1e-3);
}

TEST_CASE("quadrature mass converges with resolution on P1") {
  double e_lo = std::abs(build_grid(P1, 64).total_mass - 1.0);
  double e_hi = std::abs(build_grid(P1, 256).total_mass - 1.0);
  CHECK(e_hi < e_lo);
  CHECK(e_hi < 1e-3);
}

TEST_CASE("integrate: unit disk has half the mass of P1") {
  const Grid& g = get_grid(P1);
  double m = integrate(P1, g, [](const Point& p) {
    // chart-0 unit disk <=> |x1| <= |x0|
    return std::abs(p.h[1]) <= std::abs(p.h[0]) ? 1.0 : 0.0;
  });
  CHECK(std::abs(m - 0.5) < 2e-3);
}

TEST_CASE("integrate clamps non-finite field values") {
  const Grid& g = get_grid(P1, 64);
  double m = integrate(
      P1, g,
      [](const Point& p) {
        ChartCoords z = chart_coords(p, owner_chart(p));
        return std::log(std::abs(z[0]));  // -inf at chart origins
      },
      1e6);
  CHECK(std::isfinite(m));
}

TEST_CASE("monte carlo volume agrees with quadrature on the unit disk") {
  auto ve = volume_of_set(
      P1, [](const Point& p) { return std::abs(p.h[1]) <= std::abs(p.h[0]); }, 200000, 42);
  CHECK(std::abs(ve.value - 0.5) < 4 * ve.std_error + 1e-3);
  // determinism
  auto ve2 = volume_of_set(
      P1, [](const Point& p) { return std::abs(p.h[1]) <= std::abs(p.h[0]); }, 200000, 42);
  CHECK(ve.value == ve2.value);
}

TEST_CASE("random points are FS-uniform on P1") {
  // P(|z| <= 1) = 1/2 and P(|z| <= sqrt(1/3)) = 1/4 under omega.
  std::size_t n = 100000;
  int in_half = 0, in_quarter = 0;
  for (std::size_t i = 0; i < n; ++i) {
    Rng r = Rng::stream(5, i);
    Point p = random_point(P1, r);
    double t = std::abs(p.h[1]) / std::abs(p.h[0] == Complex(0) ? Complex(1e-300) : p.h[0]);
    if (std::abs(p.h[1]) <= std::abs(p.h[0])) in_half++;
    double r2 = std::norm(p.h[1]) / std::norm(p.h[0]);
    if (r2 <= 1.0 / 3.0) in_quarter++;
    (void)t;
  }
  CHECK(std::abs(in_half / double(n) - 0.5) < 0.01);
  CHECK(std::abs(in_quarter / double(n) - 0.25) < 0.01);
}

TEST_CASE("volume density integrates chart masses consistently") {
  // d^c convention check: mass of omega on {|z|<1} in chart 0 equals 1/2
  // by direct radial integral of the density.
  double mass = 0;
  int N = 2000;
  for (int i = 0; i < N; ++i) {
    double r = (i + 0.5) / N;
    mass += volume_density(P1, {Complex(r), 0}) * 2 * M_PI * r / N;
  }
  CHECK(std::abs(mass - 0.5) < 1e-4);
}
