#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "greenlab/maps.hpp"
#include "greenlab/rng.hpp"

using namespace greenlab;

namespace {

const ModelSpace P1 = ModelSpace::make(SpaceKind::P1);
const ModelSpace P2 = ModelSpace::make(SpaceKind::P2);
const ModelSpace PP = ModelSpace::make(SpaceKind::P1xP1);

Poly V(int n, int v) { return Poly::variable(n, v); }

RationalMap squaring() {  // z -> z^2
  return make_map(P1, {V(2, 0) * V(2, 0), V(2, 1) * V(2, 1)});
}

RationalMap basilica() {  // z -> z^2 - 1
  Poly x0 = V(2, 0), x1 = V(2, 1);
  return make_map(P1, {x0 * x0, x1 * x1 - x0 * x0});
}

RationalMap cremona() {  // (x:y:z) -> (yz:xz:xy)
  Poly x = V(3, 0), y = V(3, 1), z = V(3, 2);
  return make_map(P2, {y * z, x * z, x * y});
}

RationalMap p2squaring() {
  Poly x = V(3, 0), y = V(3, 1), z = V(3, 2);
  return make_map(P2, {x * x, y * y, z * z});
}

RationalMap monomial21() {  // (z,w) -> (z^2 w, w)
  Poly x0 = V(4, 0), x1 = V(4, 1), y0 = V(4, 2), y1 = V(4, 3);
  return make_map(PP, {x0 * x0 * y0, x1 * x1 * y1, y0, y1});
}

Point p1pt(Complex z) {
  Point p{SpaceKind::P1, {Complex(1.0), z, 0, 0}};
  p.normalize();
  return p;
}

}  // namespace

TEST_CASE("make_map validates and reduces") {
  Poly x0 = V(2, 0), x1 = V(2, 1);
  // common factor x0*x1 cancels down to the identity
  RationalMap f = make_map(P1, {x0 * x0 * x1, x0 * x1 * x1});
  CHECK(f.is_identity());
  CHECK(f.scalar_degree() == 1);

  CHECK_THROWS_AS(make_map(P1, {x0 * x0, x1}), UsageError);      // unequal degrees
  CHECK_THROWS_AS(make_map(P1, {x0 + x0 * x0, x1 * x1}), UsageError);  // inhomogeneous
  CHECK_THROWS_AS(make_map(P1, {x0, x1, x0}), UsageError);       // wrong count
  CHECK_THROWS_AS(make_map(P2, {V(3, 0), V(3, 0), V(3, 0)}), UsageError);  // not dominant
}

TEST_CASE("bidegree data") {
  CHECK(squaring().deg == std::vector<std::vector<std::int64_t>>{{2}});
  CHECK(cremona().deg == std::vector<std::vector<std::int64_t>>{{2}});
  CHECK(monomial21().deg == std::vector<std::vector<std::int64_t>>{{2, 1}, {0, 1}});
  CHECK(monomial21().scalar_degree() == 2);
}

TEST_CASE("evaluate") {
  RationalMap f = squaring();
  Point q = evaluate(f, p1pt(Complex(2.0)));
  CHECK(q.dist(p1pt(Complex(4.0))) < 1e-12);
  // infinity is fixed
  Point inf{SpaceKind::P1, {Complex(0.0), Complex(1.0), 0, 0}};
  CHECK(evaluate(f, inf).dist(inf) < 1e-12);

  RationalMap c = cremona();
  Point e0{SpaceKind::P2, {Complex(1), 0, 0, 0}};
  CHECK_THROWS_AS(evaluate(c, e0), IndeterminacyError);
  Point gen{SpaceKind::P2, {Complex(1), Complex(2), Complex(3), 0}};
  gen.normalize();
  Point img = evaluate(c, gen);
  Point expect{SpaceKind::P2, {Complex(6), Complex(3), Complex(2), 0}};
  expect.normalize();
  CHECK(img.dist(expect) < 1e-12);
}

TEST_CASE("composition and iteration") {
  RationalMap f = squaring();
  RationalMap f2 = compose(f, f);
  CHECK(f2.scalar_degree() == 4);
  CHECK(iterate_map(f, 3).scalar_degree() == 8);

  // Cremona is an involution once the common factor xyz cancels.
  RationalMap c = cremona();
  RationalMap c2 = compose(c, c);
  CHECK(c2.is_identity());
  CHECK(c2.scalar_degree() == 1);

  // monomial maps iterate within any cap (term count stays 1)...
  CHECK(iterate_map(f, 30, /*monomial_cap=*/10).scalar_degree() == (1LL << 30));
  // ...but maps with growing term counts trip the resource guard
  CHECK_THROWS_AS(iterate_map(basilica(), 30, /*monomial_cap=*/10), ResourceError);
}

TEST_CASE("bidegree matrices multiply under composition") {
  RationalMap m = monomial21();
  RationalMap m2 = compose(m, m);
  // A(f o g) = A(f) A(g) for monomial maps: [[2,1],[0,1]]^2 = [[4,3],[0,1]]
  CHECK(m2.deg == std::vector<std::vector<std::int64_t>>{{4, 3}, {0, 1}});
}

TEST_CASE("indeterminacy sets") {
  CHECK(indeterminacy_points(squaring()).points.empty());
  CHECK(indeterminacy_points(p2squaring()).points.empty());

  auto ind = indeterminacy_points(cremona());
  REQUIRE(ind.points.size() == 3);
  std::vector<Point> expect;
  for (int i = 0; i < 3; ++i) {
    Point e{SpaceKind::P2, {0, 0, 0, 0}};
    e.h[i] = 1.0;
    expect.push_back(e);
  }
  for (auto& e : expect) {
    double best = 1e9;
    for (auto& p : ind.points) best = std::min(best, p.dist(e));
    CHECK(best < 1e-9);
  }
  for (auto& p : ind.points) CHECK(component_residual(cremona(), p) < 1e-10);
}

TEST_CASE("common_roots_2d certified solutions") {
  Poly x = V(2, 0), y = V(2, 1);
  Poly one = Poly::constant(2, GaussRational(1));
  // x^2 + y^2 = 2, x = y  ->  (1,1), (-1,-1)
  Poly p = x * x + y * y - one * GaussRational(2);
  Poly q = x - y;
  auto roots = common_roots_2d(p, q, 0, 1);
  REQUIRE(roots.size() == 2);
  for (auto& r : roots) {
    CHECK(std::abs(r[0] - r[1]) < 1e-10);
    CHECK(std::abs(std::norm(r[0]) - 1.0) < 1e-9);
  }
  // no common roots: x*y = 1 and x = 0
  CHECK(common_roots_2d(x * y - one, x, 0, 1).empty());
}

TEST_CASE("preimages on P1") {
  RationalMap f = squaring();
  auto pre = preimages(f, p1pt(Complex(4.0)));
  REQUIRE(pre.size() == 2);
  double best1 = 1e9, best2 = 1e9;
  for (auto& p : pre) {
    best1 = std::min(best1, p.dist(p1pt(Complex(2.0))));
    best2 = std::min(best2, p.dist(p1pt(Complex(-2.0))));
  }
  CHECK(best1 < 1e-9);
  CHECK(best2 < 1e-9);

  // infinity has the single preimage infinity (multiplicity 2)
  Point inf{SpaceKind::P1, {Complex(0.0), Complex(1.0), 0, 0}};
  auto pi = preimages(f, inf);
  REQUIRE(pi.size() == 2);
  for (auto& p : pi) CHECK(p.dist(inf) < 1e-9);
}

TEST_CASE("topological degrees") {
  CHECK(topological_degree(squaring(), 7, 11) == 2);
  CHECK(topological_degree(basilica(), 7, 11) == 2);
  CHECK(topological_degree(cremona(), 5, 11) == 1);
  CHECK(topological_degree(p2squaring(), 5, 11) == 4);
  CHECK(topological_degree(monomial21(), 5, 11) == 2);
}

TEST_CASE("jacobian closed form for the squaring map") {
  RationalMap f = squaring();
  // |2z|^2 * ((1+|z|^2)/(1+|z|^4))^2
  for (double z : {0.5, 1.0, 1.7}) {
    double expect = 4 * z * z * std::pow((1 + z * z) / (1 + z * z * z * z), 2.0);
    CHECK(jacobian_norm_sq(f, p1pt(Complex(z))) == doctest::Approx(expect).epsilon(1e-10));
  }
  CHECK(jacobian_norm_sq(f, p1pt(Complex(1.0))) == doctest::Approx(4.0));
}

TEST_CASE("jacobian is 1 for isometries") {
  // z -> 1/z is an FS isometry of P1; (x:y:z) permutation is one of P2.
  RationalMap inv = make_map(P1, {V(2, 1), V(2, 0)});
  RationalMap perm = make_map(P2, {V(3, 1), V(3, 2), V(3, 0)});
  Rng r(3);
  for (int t = 0; t < 20; ++t) {
    CHECK(jacobian_norm_sq(inv, random_point(P1, r)) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(jacobian_norm_sq(perm, random_point(P2, r)) == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("jacobian chain rule") {
  for (RationalMap f : {basilica(), cremona(), monomial21()}) {
    RationalMap f2 = compose(f, f);
    const ModelSpace& s = f.space;
    int checked = 0;
    for (int t = 0; t < 120 && checked < 100; ++t) {
      Rng r = Rng::stream(99, t);
      Point p = random_point(s, r);
      try {
        double lhs = std::log(jacobian_norm_sq(f2, p));
        double rhs = std::log(jacobian_norm_sq(f, p)) +
                     std::log(jacobian_norm_sq(f, evaluate(f, p)));
        if (!std::isfinite(lhs) || !std::isfinite(rhs)) continue;
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-8));
        ++checked;
      } catch (const IndeterminacyError&) {
      }
    }
    CHECK(checked >= 100);
  }
}

TEST_CASE("jacobian agrees with a finite-difference volume ratio") {
  // Shrinking-disk volume ratio around z = 1 for z -> z^2.
  RationalMap f = squaring();
  Point p = p1pt(Complex(1.0));
  double h = 1e-4;
  // Pushforward area of a tiny chart disk, measured through evaluate().
  double sum = 0;
  int n = 0;
  for (int i = -2; i <= 2; ++i)
    for (int j = -2; j <= 2; ++j) {
      Complex dz(h * i / 2.0, h * j / 2.0);
      Point q = evaluate(f, p1pt(Complex(1.0) + dz));
      ChartCoords zq = chart_coords(q, 0);
      Complex w = zq[0] - Complex(1.0);
      // d(w)/d(z) ~ 2 near z=1
      if (i != 0 || j != 0) {
        sum += std::abs(w / dz);
        ++n;
      }
    }
  double deriv = sum / n;  // |f'(1)| = 2
  double rho_ratio = volume_density(P1, {Complex(1.0), 0}) / volume_density(P1, {Complex(1.0), 0});
  CHECK(deriv * deriv * rho_ratio == doctest::Approx(jacobian_norm_sq(f, p)).epsilon(1e-3));
}

TEST_CASE("component residual near indeterminacy") {
  RationalMap c = cremona();
  Point near_e0{SpaceKind::P2, {Complex(1.0), Complex(1e-7), Complex(1e-7), 0}};
  near_e0.normalize();
  CHECK(component_residual(c, near_e0) < 1e-6);
  Point generic{SpaceKind::P2, {Complex(1.0), Complex(0.5), Complex(0.25), 0}};
  CHECK(component_residual(c, generic) > 1e-2);
}
