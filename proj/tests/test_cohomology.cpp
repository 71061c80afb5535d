#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "greenlab/cohomology.hpp"

using namespace greenlab;

namespace {

const ModelSpace P1 = ModelSpace::make(SpaceKind::P1);
const ModelSpace P2 = ModelSpace::make(SpaceKind::P2);
const ModelSpace PP = ModelSpace::make(SpaceKind::P1xP1);

Poly V(int n, int v) { return Poly::variable(n, v); }

RationalMap squaring() { return make_map(P1, {V(2, 0) * V(2, 0), V(2, 1) * V(2, 1)}); }

RationalMap cremona() {
  Poly x = V(3, 0), y = V(3, 1), z = V(3, 2);
  return make_map(P2, {y * z, x * z, x * y});
}

// (z,w) -> (z^2 w, z w): bidegree rows [[2,1],[1,1]]
RationalMap golden_monomial() {
  Poly x0 = V(4, 0), x1 = V(4, 1), y0 = V(4, 2), y1 = V(4, 3);
  return make_map(PP, {x0 * x0 * y0, x1 * x1 * y1, x0 * y0, x1 * y1});
}

// (z,w) -> (z^2 w, w): bidegree rows [[2,1],[0,1]]
RationalMap monomial21() {
  Poly x0 = V(4, 0), x1 = V(4, 1), y0 = V(4, 2), y1 = V(4, 3);
  return make_map(PP, {x0 * x0 * y0, x1 * x1 * y1, y0, y1});
}

}  // namespace

TEST_CASE("pullback matrix on P^k") {
  auto d = pullback_matrix(squaring());
  CHECK(d.matrix == DegMatrix{{2}});
  CHECK(d.lambda1 == 2.0);
  CHECK(d.simple);
  REQUIRE(d.perron_class.size() == 1);
  CHECK(d.perron_class[0] == doctest::Approx(1.0));
  CHECK(class_degree(P1, d.perron_class) == doctest::Approx(1.0));

  auto c = pullback_matrix(cremona());
  CHECK(c.matrix == DegMatrix{{2}});
  CHECK(c.lambda1 == 2.0);
}

TEST_CASE("golden-mean lambda1 on P1xP1") {
  auto d = pullback_matrix(golden_monomial());
  CHECK(d.matrix == DegMatrix{{2, 1}, {1, 1}});
  double golden = (3.0 + std::sqrt(5.0)) / 2.0;
  CHECK(std::abs(d.lambda1 - golden) < 1e-12);
  CHECK(d.simple);
  CHECK(class_degree(PP, d.perron_class) == doctest::Approx(1.0));
  CHECK(d.perron_class[0] >= 0);
  CHECK(d.perron_class[1] >= 0);
  // eigenvector property: M alpha = lambda1 alpha
  double m0 = 2 * d.perron_class[0] + 1 * d.perron_class[1];
  double m1 = 1 * d.perron_class[0] + 1 * d.perron_class[1];
  CHECK(m0 == doctest::Approx(d.lambda1 * d.perron_class[0]));
  CHECK(m1 == doctest::Approx(d.lambda1 * d.perron_class[1]));
}

TEST_CASE("no spectral gap cases are flagged") {
  // factor swap (z,w) -> (w,z): matrix [[0,1],[1,0]], eigenvalues +-1
  Poly x0 = V(4, 0), x1 = V(4, 1), y0 = V(4, 2), y1 = V(4, 3);
  RationalMap swap = make_map(PP, {y0, y1, x0, x1});
  auto d = pullback_matrix(swap);
  CHECK(d.matrix == DegMatrix{{0, 1}, {1, 0}});
  CHECK(d.lambda1 == doctest::Approx(1.0));
  CHECK_FALSE(d.simple);
}

TEST_CASE("cremona is not 1-regular, detected at n = 2") {
  auto rep = is_1_regular(cremona(), 4);
  CHECK_FALSE(rep.regular);
  CHECK(rep.first_failure == 2);
  // exact iterate degrees: deg(sigma) = 2, deg(sigma^2) = deg(id) = 1
  CHECK(rep.degrees[0] == DegMatrix{{2}});
  CHECK(rep.degrees[1] == DegMatrix{{1}});
}

TEST_CASE("monomial maps are 1-regular through n = 5") {
  for (auto f : {golden_monomial(), monomial21()}) {
    auto rep = is_1_regular(f, 5);
    CHECK(rep.regular);
    CHECK(rep.first_failure == 0);
  }
  auto rep = is_1_regular(squaring(), 6);
  CHECK(rep.regular);
  CHECK(rep.degrees[5] == DegMatrix{{64}});
}

TEST_CASE("dynamical degree estimates converge to lambda1") {
  auto est = dynamical_degree_estimate(golden_monomial(), 8);
  double golden = (3.0 + std::sqrt(5.0)) / 2.0;
  REQUIRE(est.size() == 8);
  CHECK(std::abs(est[7] - golden) < 0.05);
  // monotone approach from below for this nonnegative matrix family
  CHECK(est[7] > est[1]);
  auto es = dynamical_degree_estimate(squaring(), 5);
  for (double v : es) CHECK(v == doctest::Approx(2.0));
}

TEST_CASE("matrix helpers") {
  DegMatrix a{{2, 1}, {1, 1}};
  CHECK(matrix_power(a, 1) == a);
  CHECK(matrix_power(a, 2) == matrix_multiply(a, a));
  CHECK(matrix_power(a, 5) == matrix_multiply(a, matrix_power(a, 4)));
  CHECK(matrix_power(a, 0) == DegMatrix{{1, 0}, {0, 1}});
}
