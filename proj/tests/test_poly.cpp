#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "greenlab/poly.hpp"
#include "greenlab/poly_roots.hpp"

using namespace greenlab;

namespace {
Poly X(int n, int v) { return Poly::variable(n, v); }
GaussRational Q(long n, long d = 1) { return GaussRational(Rational(n) / d); }
}  // namespace

TEST_CASE("gauss rational field ops") {
  GaussRational i(Rational(0), Rational(1));
  CHECK((i * i == GaussRational(-1)));
  GaussRational a(Rational(3, 4), Rational(-2, 5));
  CHECK((a / a == GaussRational(1)));
  CHECK((a * a.conj() == GaussRational(a.norm())));
  CHECK(((a + a.conj()).is_real()));
}

TEST_CASE("arithmetic and degrees") {
  Poly x = X(2, 0), y = X(2, 1);
  Poly p = x * x + y * Q(2) + Poly::constant(2, Q(1));
  CHECK(p.total_degree() == 2);
  CHECK(p.degree_in(0) == 2);
  CHECK(p.degree_in(1) == 1);
  CHECK((p - p).is_zero());
  CHECK(((x + y) * (x - y) == x * x - y * y));
  CHECK((x + y).pow(2) == x * x + x * y * Q(2) + y * y);
  Poly z = Poly(2);
  CHECK(z.total_degree() == -1);
}

TEST_CASE("substitution composes") {
  Poly x = X(2, 0), y = X(2, 1);
  Poly p = x * x - y;
  // x -> x+y, y -> x*y
  Poly s = p.substitute({x + y, x * y});
  CHECK((s == x * x + x * y * Q(2) + y * y - x * y));
}

TEST_CASE("derivative and eval") {
  Poly x = X(1, 0);
  Poly p = x.pow(3) * Q(2) - x + Poly::constant(1, Q(5));
  Poly dp = p.derivative(0);
  std::array<std::complex<double>, 4> z{std::complex<double>(2.0), 0, 0, 0};
  CHECK(p.eval(z).real() == doctest::Approx(2 * 8 - 2 + 5));
  CHECK(dp.eval(z).real() == doctest::Approx(6 * 4 - 1));
}

TEST_CASE("log-domain evaluation matches plain eval and survives huge exponents") {
  Poly x = X(2, 0), y = X(2, 1);
  Poly p = x * x * y * Q(3) - y * y + Poly::constant(2, Q(1, 7));
  std::array<std::complex<double>, 4> z{std::complex<double>(0.3, -1.1),
                                        std::complex<double>(-0.8, 0.2), 0, 0};
  std::array<LogComplex, 4> lz{LogComplex::from(z[0]), LogComplex::from(z[1]),
                               LogComplex::zero(), LogComplex::zero()};
  auto a = p.eval(z);
  auto b = p.eval_log(lz).to_complex();
  CHECK(std::abs(a - b) < 1e-12 * std::abs(a));

  // z^(2^40) at |z| = 0.5: log-magnitude is exactly -2^40 log 2.
  Poly q = Poly::monomial(1, Expo{1099511627776LL, 0, 0, 0}, Q(1));
  std::array<LogComplex, 4> w{LogComplex::from(std::complex<double>(0.5)), LogComplex::zero(),
                              LogComplex::zero(), LogComplex::zero()};
  double lm = q.eval_log(w).logmag;
  CHECK(lm == doctest::Approx(-1099511627776.0 * std::log(2.0)));
}

TEST_CASE("exact division and gcd") {
  Poly x = X(2, 0), y = X(2, 1);
  Poly a = (x + y) * (x - y * Q(2));
  Poly b = (x + y) * (x * x + y);
  Poly g = Poly::gcd(a, b);
  // gcd is normalized; compare up to the leading coefficient
  CHECK(g.total_degree() == 1);
  CHECK(a.div_exact(g) * g == a);
  CHECK(b.div_exact(g) * g == b);
  CHECK(Poly::gcd(x * x, y * y).total_degree() == 0);
}

TEST_CASE("gcd with gaussian-integer content") {
  Poly x = X(1, 0);
  GaussRational i(Rational(0), Rational(1));
  Poly a = (x - Poly::constant(1, i)) * (x + Poly::constant(1, Q(2)));
  Poly b = (x - Poly::constant(1, i)) * (x - Poly::constant(1, Q(3)));
  Poly g = Poly::gcd(a, b);
  CHECK(g.total_degree() == 1);
  CHECK(a.div_exact(g) * g == a);
}

TEST_CASE("univariate resultant") {
  // res(x^2-1, x^2-4) over common convention = 9 (roots +-1 vs +-2).
  std::vector<GaussRational> p{Q(-1), Q(0), Q(1)};
  std::vector<GaussRational> q{Q(-4), Q(0), Q(1)};
  CHECK((resultant_univariate(p, q) == Q(9)));
  // Shared root -> resultant 0.
  std::vector<GaussRational> r{Q(-1), Q(1)};           // x - 1
  std::vector<GaussRational> s{Q(-1), Q(0), Q(1)};     // x^2 - 1
  CHECK(resultant_univariate(r, s).is_zero());
}

TEST_CASE("lagrange interpolation reproduces a cubic") {
  // y = 2x^3 - x + 1/3 at nodes 0..3
  auto f = [](const Rational& x) {
    return GaussRational(Rational(2) * x * x * x - x + Rational(1, 3));
  };
  std::vector<Rational> xs{0, 1, 2, 3};
  std::vector<GaussRational> ys;
  for (auto& x : xs) ys.push_back(f(x));
  auto c = lagrange_interpolate(xs, ys);
  REQUIRE(c.size() == 4);
  CHECK((c[0] == Q(1, 3)));
  CHECK((c[1] == Q(-1)));
  CHECK((c[2] == Q(0)));
  CHECK((c[3] == Q(2)));
}

TEST_CASE("polynomial roots: closed forms and companion matrix") {
  using C = std::complex<double>;
  // p(z) = z*(z-1)*(z-2)*(z-3)*(z+5i)
  std::vector<C> p{C(1)};
  for (C r : {C(0), C(1), C(2), C(3), C(0, -5)}) {
    std::vector<C> np(p.size() + 1, C(0));
    for (std::size_t j = 0; j < p.size(); ++j) {
      np[j + 1] += p[j];
      np[j] -= r * p[j];
    }
    p = np;
  }
  auto roots = poly_roots(p);
  REQUIRE(roots.size() == 5);
  for (C r : {C(0), C(1), C(2), C(3), C(0, -5)}) {
    double best = 1e9;
    for (C z : roots) best = std::min(best, std::abs(z - r));
    CHECK(best < 1e-9);
  }
}

TEST_CASE("roots at infinity are counted when the leading coefficient vanishes") {
  using C = std::complex<double>;
  std::vector<C> p{C(-1), C(1), C(0), C(0)};  // z - 1 padded with zero leaders
  int at_inf = 0;
  auto roots = poly_roots(p, &at_inf);
  CHECK(at_inf == 2);
  REQUIRE(roots.size() == 1);
  CHECK(std::abs(roots[0] - C(1)) < 1e-12);
}

TEST_CASE("high-degree companion roots stay on the unit circle") {
  using C = std::complex<double>;
  // z^64 - 1
  std::vector<C> p(65, C(0));
  p[0] = C(-1);
  p[64] = C(1);
  auto roots = poly_roots(p);
  REQUIRE(roots.size() == 64);
  for (C z : roots) CHECK(std::abs(std::abs(z) - 1.0) < 1e-10);
}
