#include "greenlab/maps.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "greenlab/parallel.hpp"
#include "greenlab/poly_roots.hpp"
#include "greenlab/rng.hpp"

namespace greenlab {

namespace {

struct Group {
  std::vector<int> comps;  // component indices of this output factor
};

std::vector<Group> output_groups(const ModelSpace& s) {
  if (s.kind == SpaceKind::P1) return {Group{{0, 1}}};
  if (s.kind == SpaceKind::P2) return {Group{{0, 1, 2}}};
  return {Group{{0, 1}}, Group{{2, 3}}};
}

std::vector<std::vector<int>> input_factor_vars(const ModelSpace& s) {
  if (s.kind == SpaceKind::P1) return {{0, 1}};
  if (s.kind == SpaceKind::P2) return {{0, 1, 2}};
  return {{0, 1}, {2, 3}};
}

// Homogeneous degree of p w.r.t. the variable set; -2 if not homogeneous,
// -1 if p == 0.
std::int64_t homog_degree(const Poly& p, const std::vector<int>& vars) {
  std::int64_t d = -1;
  for (auto& [e, c] : p.terms()) {
    std::int64_t t = 0;
    for (int v : vars) t += e[v];
    if (d == -1) d = t;
    else if (t != d) return -2;
  }
  return d;
}

double poly_one_norm(const Poly& p) { return p.coeff_one_norm(); }

std::complex<double> eval_comp(const Poly& p, const std::array<Complex, 4>& z) {
  return p.eval(z);
}

// Dense complex coefficients of p in variable `var` after fixing the other
// variables to the given complex values.
std::vector<Complex> complex_coeffs_in(const Poly& p, int var, const std::array<Complex, 4>& base) {
  auto cs = p.coeffs_in(var);
  std::vector<Complex> out(cs.size());
  for (std::size_t j = 0; j < cs.size(); ++j) out[j] = cs[j].eval(base);
  return out;
}

// Determinant of the Sylvester matrix for coefficient vectors with *fixed*
// nominal degrees m, n (vectors sized m+1, n+1, leading entries may be zero).
GaussRational sylvester_det_fixed(const std::vector<GaussRational>& p, std::size_t m,
                                  const std::vector<GaussRational>& q, std::size_t n) {
  if (m == 0 && n == 0) return GaussRational(1);
  std::size_t N = m + n;
  std::vector<std::vector<GaussRational>> S(N, std::vector<GaussRational>(N, GaussRational(0)));
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t j = 0; j <= m; ++j) S[r][r + (m - j)] = p[j];
  for (std::size_t r = 0; r < m; ++r)
    for (std::size_t j = 0; j <= n; ++j) S[n + r][r + (n - j)] = q[j];
  GaussRational det(1);
  for (std::size_t col = 0; col < N; ++col) {
    std::size_t piv = col;
    while (piv < N && S[piv][col].is_zero()) ++piv;
    if (piv == N) return GaussRational(0);
    if (piv != col) {
      std::swap(S[piv], S[col]);
      det = -det;
    }
    det *= S[col][col];
    GaussRational inv = GaussRational(1) / S[col][col];
    for (std::size_t r = col + 1; r < N; ++r) {
      if (S[r][col].is_zero()) continue;
      GaussRational f = S[r][col] * inv;
      for (std::size_t c = col; c < N; ++c) S[r][c] -= f * S[col][c];
    }
  }
  return det;
}

// Exact evaluation of the coefficients-in-y of p at rational x = value.
std::vector<GaussRational> coeffs_at_rational(const std::vector<Poly>& ycoeffs, int v0,
                                              const Rational& value, std::size_t nominal) {
  std::vector<GaussRational> out(nominal + 1, GaussRational(0));
  for (std::size_t j = 0; j < ycoeffs.size(); ++j) {
    // ycoeffs[j] is a polynomial in v0 only.
    GaussRational acc(0);
    for (auto& [e, c] : ycoeffs[j].terms()) {
      Rational pw(1);
      for (std::int64_t k = 0; k < e[v0]; ++k) pw *= value;
      acc += c * GaussRational(pw);
    }
    out[j] = acc;
  }
  return out;
}

struct Newton2D {
  const Poly *p, *q, *px, *py, *qx, *qy;
  int v0, v1;

  bool polish(Complex& x, Complex& y) const {
    std::array<Complex, 4> z{1.0, 1.0, 1.0, 1.0};
    for (int it = 0; it < 40; ++it) {
      z[v0] = x;
      z[v1] = y;
      Complex f1 = p->eval(z), f2 = q->eval(z);
      Complex a = px->eval(z), b = py->eval(z);
      Complex c = qx->eval(z), d = qy->eval(z);
      Complex det = a * d - b * c;
      if (std::abs(det) < 1e-300) return false;
      Complex dx = (f1 * d - f2 * b) / det;
      Complex dy = (a * f2 - c * f1) / det;
      x -= dx;
      y -= dy;
      if (std::abs(dx) + std::abs(dy) < 1e-14 * (1.0 + std::abs(x) + std::abs(y))) return true;
    }
    return true;  // let the residual filter decide
  }
};

double rel_residual(const Poly& p, int v0, int v1, Complex x, Complex y) {
  std::array<Complex, 4> z{1.0, 1.0, 1.0, 1.0};
  z[v0] = x;
  z[v1] = y;
  double scale = poly_one_norm(p);
  double m = std::max({1.0, std::abs(x), std::abs(y)});
  scale *= std::pow(m, static_cast<double>(std::max<std::int64_t>(p.total_degree(), 0)));
  if (scale == 0) return 0;
  return std::abs(p.eval(z)) / scale;
}

}  // namespace

std::vector<std::array<Complex, 2>> common_roots_2d(const Poly& p, const Poly& q, int v0, int v1) {
  if (p.is_zero() || q.is_zero())
    throw std::runtime_error("common_roots_2d: zero polynomial (gcd-reduced invariant violated)");
  std::int64_t dyp = p.degree_in(v1), dyq = q.degree_in(v1);
  std::vector<std::array<Complex, 2>> out;

  auto push_candidate = [&](Complex x, Complex y) {
    Poly px = p.derivative(v0), py = p.derivative(v1);
    Poly qx = q.derivative(v0), qy = q.derivative(v1);
    Newton2D nw{&p, &q, &px, &py, &qx, &qy, v0, v1};
    nw.polish(x, y);
    if (rel_residual(p, v0, v1, x, y) > 1e-10) return;
    if (rel_residual(q, v0, v1, x, y) > 1e-10) return;
    for (auto& r : out)
      if (std::abs(r[0] - x) + std::abs(r[1] - y) < 1e-7) return;
    out.push_back({x, y});
  };

  auto roots_of_univariate = [&](const Poly& u, int var) {
    std::array<Complex, 4> base{1.0, 1.0, 1.0, 1.0};
    return poly_roots(complex_coeffs_in(u, var, base));
  };

  if (dyp <= 0 && dyq <= 0) {
    // Both free of v1: any common zero extends to a vertical line, so there
    // are no isolated solutions (cannot happen for gcd-reduced maps).
    return out;
  }
  if (dyp <= 0 || dyq <= 0) {
    const Poly& uni = (dyp <= 0) ? p : q;   // depends on v0 only
    const Poly& other = (dyp <= 0) ? q : p;
    if (uni.degree_in(v0) <= 0) return out;  // nonzero constant: no zeros
    for (Complex x : roots_of_univariate(uni, v0)) {
      std::array<Complex, 4> base{1.0, 1.0, 1.0, 1.0};
      base[v0] = x;
      for (Complex y : poly_roots(complex_coeffs_in(other, v1, base))) push_candidate(x, y);
    }
    return out;
  }

  // General case: eliminate v1 by interpolated Sylvester resultants.
  auto pc = p.coeffs_in(v1);
  auto qc = q.coeffs_in(v1);
  std::int64_t dxp = p.degree_in(v0), dxq = q.degree_in(v0);
  std::int64_t bound = dxp * dyq + dxq * dyp;
  std::vector<Rational> xs;
  std::vector<GaussRational> ys;
  for (std::int64_t j = 0; j <= bound; ++j) {
    Rational xv(j);
    auto pv = coeffs_at_rational(pc, v0, xv, static_cast<std::size_t>(dyp));
    auto qv = coeffs_at_rational(qc, v0, xv, static_cast<std::size_t>(dyq));
    xs.push_back(xv);
    ys.push_back(sylvester_det_fixed(pv, static_cast<std::size_t>(dyp), qv,
                                     static_cast<std::size_t>(dyq)));
  }
  auto rc = lagrange_interpolate(xs, ys);
  bool all_zero = true;
  for (auto& c : rc)
    if (!c.is_zero()) all_zero = false;
  if (all_zero)
    throw std::runtime_error("common_roots_2d: resultant identically zero");

  std::vector<Complex> rcd(rc.size());
  double scale = 0;
  for (std::size_t j = 0; j < rc.size(); ++j) {
    rcd[j] = rc[j].to_complex();
    scale = std::max(scale, std::abs(rcd[j]));
  }
  if (scale > 0)
    for (auto& c : rcd) c /= scale;
  std::vector<Complex> xroots = poly_roots(rcd);
  // Cluster nearby resultant roots.
  std::vector<Complex> xc;
  for (Complex x : xroots) {
    bool dup = false;
    for (Complex y : xc)
      if (std::abs(x - y) < 1e-8) dup = true;
    if (!dup) xc.push_back(x);
  }
  for (Complex x : xc) {
    std::array<Complex, 4> base{1.0, 1.0, 1.0, 1.0};
    base[v0] = x;
    auto pcv = complex_coeffs_in(p, v1, base);
    auto qcv = complex_coeffs_in(q, v1, base);
    // A factor line {v0 = x} of p or q makes it vanish identically there; the
    // candidates then come from the other polynomial alone.
    auto vanishes = [&](const std::vector<Complex>& cv, const Poly& pol) {
      double mx = 0;
      for (Complex c : cv) mx = std::max(mx, std::abs(c));
      double scale = poly_one_norm(pol) *
                     std::pow(std::max(1.0, std::abs(x)),
                              static_cast<double>(std::max<std::int64_t>(pol.total_degree(), 0)));
      return mx < 1e-9 * scale;
    };
    bool pz = vanishes(pcv, p), qz = vanishes(qcv, q);
    if (pz && qz) continue;  // excluded by the gcd-reduced invariant
    if (pz) {
      for (Complex y : poly_roots(qcv)) push_candidate(x, y);
    } else if (qz) {
      for (Complex y : poly_roots(pcv)) push_candidate(x, y);
    } else {
      auto py_roots = poly_roots(pcv);
      auto qy_roots = poly_roots(qcv);
      for (Complex y : py_roots) {
        double best = 1e300;
        for (Complex y2 : qy_roots) best = std::min(best, std::abs(y - y2));
        if (best < 1e-3 * (1.0 + std::abs(y))) push_candidate(x, y);
      }
    }
  }
  return out;
}

// --- RationalMap -------------------------------------------------------------

std::size_t RationalMap::monomial_count() const {
  std::size_t n = 0;
  for (auto& c : comps) n += c.term_count();
  return n;
}

std::int64_t RationalMap::scalar_degree() const {
  std::int64_t d = 0;
  for (auto& row : deg)
    for (auto e : row) d = std::max(d, e);
  return d;
}

bool RationalMap::is_identity() const {
  RationalMap id = identity_map(space);
  for (auto& g : output_groups(space)) {
    // expect comps[i] == c * var_i for one shared constant c
    GaussRational c;
    bool have = false;
    for (int i : g.comps) {
      if (comps[i].term_count() != 1) return false;
      auto [e, cf] = comps[i].leading();
      auto [ie, icf] = id.comps[i].leading();
      if (e != ie) return false;
      if (!have) {
        c = cf;
        have = true;
      } else if (!(cf == c)) {
        return false;
      }
    }
  }
  return true;
}

const std::vector<Poly>& RationalMap::derivatives() const {
  if (!derivs_) {
    auto d = std::make_shared<std::vector<Poly>>();
    d->reserve(comps.size() * 4);
    for (auto& c : comps)
      for (int v = 0; v < 4; ++v) d->push_back(c.derivative(v));
    derivs_ = std::move(d);
  }
  return *derivs_;
}

RationalMap make_map(const ModelSpace& space, std::vector<Poly> comps, bool check_dominant) {
  RationalMap f;
  f.space = space;
  std::size_t expect = (space.kind == SpaceKind::P1) ? 2 : (space.kind == SpaceKind::P2 ? 3 : 4);
  if (comps.size() != expect) throw UsageError("wrong component count for space");
  auto groups = output_groups(space);
  auto infac = input_factor_vars(space);
  f.deg.assign(groups.size(), std::vector<std::int64_t>(infac.size(), 0));

  for (std::size_t g = 0; g < groups.size(); ++g) {
    bool allzero = true;
    for (int i : groups[g].comps)
      if (!comps[i].is_zero()) allzero = false;
    if (allzero) throw UsageError("component group identically zero");
    // gcd-reduce the group
    Poly gg;
    bool first = true;
    for (int i : groups[g].comps) {
      if (comps[i].is_zero()) continue;
      gg = first ? comps[i] : Poly::gcd(gg, comps[i]);
      first = false;
      if (gg.total_degree() == 0) break;
    }
    if (gg.total_degree() > 0)
      for (int i : groups[g].comps)
        if (!comps[i].is_zero()) comps[i] = comps[i].div_exact(gg);
    // homogeneity + degree matrix
    for (std::size_t fi = 0; fi < infac.size(); ++fi) {
      std::int64_t d = -1;
      for (int i : groups[g].comps) {
        if (comps[i].is_zero()) continue;
        std::int64_t di = homog_degree(comps[i], infac[fi]);
        if (di == -2) throw UsageError("component not homogeneous per factor");
        if (d == -1) d = di;
        else if (d != di) throw UsageError("components of a factor have unequal degrees");
      }
      f.deg[g][fi] = d;
    }
    std::int64_t total = 0;
    for (auto e : f.deg[g]) total += e;
    if (total < 1) throw UsageError("map has degree 0 (constant factor)");
  }
  f.comps = std::move(comps);

  if (check_dominant) {
    bool ok = false;
    for (int attempt = 0; attempt < 40 && !ok; ++attempt) {
      Rng r = Rng::stream(0xd0117u, attempt);
      Point p = random_point(space, r);
      try {
        if (jacobian_norm_sq(f, p) > 1e-14) ok = true;
      } catch (const std::exception&) {
      }
    }
    if (!ok) throw UsageError("map is not dominant (Jacobian vanishes identically)");
  }
  // warm the numeric coefficient caches before the map is shared across threads
  for (auto& c : f.comps) (void)c.coeff_one_norm();
  for (auto& d : f.derivatives()) (void)d.coeff_one_norm();
  return f;
}

RationalMap identity_map(const ModelSpace& space) {
  std::vector<Poly> comps;
  int nv = space.nhomog;
  for (int v = 0; v < nv; ++v) comps.push_back(Poly::variable(nv, v));
  return make_map(space, std::move(comps), /*check_dominant=*/false);
}

Point evaluate(const RationalMap& f, const Point& p) {
  Point q = p;
  q.normalize();
  Point out;
  out.kind = f.space.kind;
  auto groups = output_groups(f.space);
  int oi = 0;
  for (auto& g : groups) {
    double scale = 0;
    for (int i : g.comps) scale = std::max(scale, poly_one_norm(f.comps[i]));
    double mx = 0;
    std::vector<Complex> vals;
    for (int i : g.comps) {
      Complex v = eval_comp(f.comps[i], q.h);
      vals.push_back(v);
      mx = std::max(mx, std::abs(v));
    }
    if (mx < 1e-12 * std::max(scale, 1.0))
      throw IndeterminacyError("point is at (or numerically at) indeterminacy");
    for (Complex v : vals) out.h[oi++] = v;
  }
  out.normalize();
  return out;
}

RationalMap compose(const RationalMap& f, const RationalMap& g, std::size_t monomial_cap) {
  if (!(f.space == g.space)) throw UsageError("compose: different model spaces");
  std::vector<Poly> subs;
  for (auto& c : g.comps) subs.push_back(c);
  while (subs.size() < 4) subs.push_back(Poly::variable(f.space.nhomog, 0));
  std::vector<Poly> comps;
  std::size_t total = 0;
  for (auto& c : f.comps) {
    Poly s = c.substitute(subs);
    total += s.term_count();
    if (total > monomial_cap)
      throw ResourceError("compose: monomial cap exceeded");
    comps.push_back(std::move(s));
  }
  return make_map(f.space, std::move(comps), /*check_dominant=*/false);
}

RationalMap iterate_map(const RationalMap& f, int n, std::size_t monomial_cap) {
  if (n < 1) throw UsageError("iterate_map: n must be >= 1");
  RationalMap r = f;
  for (int j = 1; j < n; ++j) r = compose(f, r, monomial_cap);
  return r;
}

namespace {

// Affine restriction of comps to a chart: substitutes 1 for the chart's
// denominator variables. Returns the free variable indices through v0/v1.
std::vector<Poly> chart_affine(const RationalMap& f, int chart, int* v0, int* v1) {
  const ModelSpace& s = f.space;
  std::vector<Poly> subs;
  for (int v = 0; v < 4; ++v) subs.push_back(Poly::variable(4, v));
  std::vector<int> freev;
  if (s.kind == SpaceKind::P1 || s.kind == SpaceKind::P2) {
    subs[chart] = Poly::constant(4, GaussRational(1));
    for (int v = 0; v < s.nhomog; ++v)
      if (v != chart) freev.push_back(v);
  } else {
    int i = chart / 2, j = chart % 2;
    subs[i] = Poly::constant(4, GaussRational(1));
    subs[2 + j] = Poly::constant(4, GaussRational(1));
    freev = {1 - i, 2 + (1 - j)};
  }
  if (v0) *v0 = freev[0];
  if (v1) *v1 = freev.size() > 1 ? freev[1] : freev[0];
  std::vector<Poly> out;
  for (auto& c : f.comps) out.push_back(c.substitute(subs));
  return out;
}

Point point_from_chart_roots(const ModelSpace& s, int chart, int v0, int v1, Complex x, Complex y) {
  Point p;
  p.kind = s.kind;
  p.h = {Complex(0), Complex(0), Complex(0), Complex(0)};
  if (s.kind == SpaceKind::P1 || s.kind == SpaceKind::P2) {
    p.h[chart] = 1.0;
    p.h[v0] = x;
    if (s.kind == SpaceKind::P2) p.h[v1] = y;
  } else {
    int i = chart / 2, j = chart % 2;
    p.h[i] = 1.0;
    p.h[2 + j] = 1.0;
    p.h[v0] = x;
    p.h[v1] = y;
  }
  p.normalize();
  return p;
}

void dedupe_points(std::vector<Point>& pts, double tol = 1e-8) {
  std::vector<Point> out;
  for (auto& p : pts) {
    bool dup = false;
    for (auto& q : out)
      if (p.dist(q) < tol) dup = true;
    if (!dup) out.push_back(p);
  }
  pts = std::move(out);
}

}  // namespace

double component_residual(const RationalMap& f, const Point& p) {
  Point q = p;
  q.normalize();
  double res = 1e300;
  for (auto& g : output_groups(f.space)) {
    double scale = 0, mx = 0;
    for (int i : g.comps) {
      scale = std::max(scale, poly_one_norm(f.comps[i]));
      mx = std::max(mx, std::abs(f.comps[i].eval(q.h)));
    }
    res = std::min(res, mx / std::max(scale, 1e-300));
  }
  return res;
}

IndeterminacySet indeterminacy_points(const RationalMap& f) {
  IndeterminacySet out;
  out.method = IndeterminacySet::Method::exact_resultant;
  const ModelSpace& s = f.space;
  if (s.kind == SpaceKind::P1) return out;  // gcd-reduced: always empty

  auto groups = output_groups(s);
  for (int chart = 0; chart < s.chart_count; ++chart) {
    int v0, v1;
    auto aff = chart_affine(f, chart, &v0, &v1);
    for (auto& g : groups) {
      std::vector<Poly> polys;
      for (int i : g.comps) polys.push_back(aff[i]);
      // Random rational combinations collapse >2 equations to 2 and dodge
      // degenerate resultants; retried deterministically.
      static const long combo[][4] = {{1, 2, 3, 5}, {2, 7, 5, 3}, {3, 1, 7, 2},
                                      {5, 11, 2, 9}, {7, 3, 13, 4}};
      bool done = false;
      for (int attempt = 0; attempt < 5 && !done; ++attempt) {
        Poly q1 = polys[0], q2 = polys.size() > 1 ? polys[1] : polys[0];
        if (polys.size() == 3) {
          q1 = polys[0] + polys[1] * GaussRational(Rational(combo[attempt][0])) +
               polys[2] * GaussRational(Rational(combo[attempt][1]));
          q2 = polys[0] + polys[1] * GaussRational(Rational(combo[attempt][2])) +
               polys[2] * GaussRational(Rational(combo[attempt][3]));
        }
        if (q1.is_zero() || q2.is_zero()) break;  // no isolated zeros in chart
        if (q1.total_degree() == 0 || q2.total_degree() == 0) {
          done = true;  // some component is a nonzero constant here
          break;
        }
        try {
          for (auto& r : common_roots_2d(q1, q2, v0, v1)) {
            Point p = point_from_chart_roots(s, chart, v0, v1, r[0], r[1]);
            // Certify against the actual (not combined) components.
            double mx = 0, scale = 0;
            for (int i : g.comps) {
              scale = std::max(scale, poly_one_norm(f.comps[i]));
              mx = std::max(mx, std::abs(f.comps[i].eval(p.h)));
            }
            if (mx < 1e-10 * std::max(scale, 1.0)) out.points.push_back(p);
          }
          done = true;
        } catch (const std::runtime_error&) {
          // resultant identically zero for this combination: retry
        }
      }
      if (!done && polys.size() == 2)
        throw std::runtime_error(
            "indeterminacy_points: degenerate elimination (gcd-reduced invariant violated)");
    }
  }
  dedupe_points(out.points);
  return out;
}

namespace {

GaussRational snap_rational(Complex z) {
  const double scale = 1048576.0;  // 2^20
  auto snap = [&](double v) {
    return Rational(static_cast<long long>(std::llround(v * scale)), 1048576LL);
  };
  return GaussRational(snap(z.real()), snap(z.imag()));
}

}  // namespace

std::vector<Point> preimages(const RationalMap& f, const Point& w) {
  Point t = w;
  t.normalize();
  const ModelSpace& s = f.space;
  std::vector<Point> out;

  if (s.kind == SpaceKind::P1) {
    // w1*F0 - w0*F1 = 0, solved in chart 0 with the infinity root recovered
    // from the degree drop.
    std::array<Complex, 4> base{1.0, 1.0, 1.0, 1.0};
    auto c0 = complex_coeffs_in(f.comps[0], 1, base);  // F0(1, z)
    auto c1 = complex_coeffs_in(f.comps[1], 1, base);
    std::size_t d = static_cast<std::size_t>(f.deg[0][0]);
    std::vector<Complex> g(d + 1, Complex(0));
    for (std::size_t j = 0; j < c0.size(); ++j) g[j] += t.h[1] * c0[j];
    for (std::size_t j = 0; j < c1.size(); ++j) g[j] -= t.h[0] * c1[j];
    int at_inf = 0;
    auto roots = poly_roots(g, &at_inf, 1e-11);
    for (Complex z : roots) {
      Point p;
      p.kind = s.kind;
      p.h = {Complex(1.0), z, Complex(0), Complex(0)};
      p.normalize();
      out.push_back(p);
    }
    for (int j = 0; j < at_inf; ++j) {
      Point p;
      p.kind = s.kind;
      p.h = {Complex(0), Complex(1.0), Complex(0), Complex(0)};
      out.push_back(p);
    }
    return out;
  }

  // 2-dimensional models: snap the target to rational coordinates, then
  // compute the fiber of the *snapped* point by exact elimination (and verify
  // candidates against it, so the snap offset never enters the tolerance).
  std::array<GaussRational, 4> ws;
  Point tsnap = t;
  for (int v = 0; v < s.nhomog; ++v) {
    ws[v] = snap_rational(t.h[v]);
    tsnap.h[v] = ws[v].to_complex();
  }
  tsnap.normalize();
  std::vector<Poly> eqs;
  if (s.kind == SpaceKind::P2) {
    int m = 0;
    for (int i = 1; i < 3; ++i)
      if (std::abs(t.h[i]) > std::abs(t.h[m])) m = i;
    for (int i = 0; i < 3; ++i)
      if (i != m) eqs.push_back(f.comps[i] * ws[m] - f.comps[m] * ws[i]);
  } else {
    int m1 = std::abs(t.h[1]) > std::abs(t.h[0]) ? 1 : 0;
    int m2 = std::abs(t.h[3]) > std::abs(t.h[2]) ? 3 : 2;
    eqs.push_back(f.comps[1 - m1] * ws[m1] - f.comps[m1] * ws[1 - m1]);
    eqs.push_back(f.comps[5 - m2] * ws[m2] - f.comps[m2] * ws[5 - m2]);
  }

  for (int chart = 0; chart < s.chart_count; ++chart) {
    int v0, v1;
    std::vector<Poly> subs;
    for (int v = 0; v < 4; ++v) subs.push_back(Poly::variable(4, v));
    std::vector<int> freev;
    if (s.kind == SpaceKind::P2) {
      subs[chart] = Poly::constant(4, GaussRational(1));
      for (int v = 0; v < 3; ++v)
        if (v != chart) freev.push_back(v);
    } else {
      int i = chart / 2, j = chart % 2;
      subs[i] = Poly::constant(4, GaussRational(1));
      subs[2 + j] = Poly::constant(4, GaussRational(1));
      freev = {1 - i, 2 + (1 - j)};
    }
    v0 = freev[0];
    v1 = freev[1];
    Poly q1 = eqs[0].substitute(subs);
    Poly q2 = eqs[1].substitute(subs);
    if (q1.is_zero() || q2.is_zero()) continue;
    if (q1.total_degree() == 0 || q2.total_degree() == 0) continue;
    try {
      for (auto& r : common_roots_2d(q1, q2, v0, v1)) {
        Point p = point_from_chart_roots(s, chart, v0, v1, r[0], r[1]);
        // Verify it really maps to the snapped target.
        try {
          Point img = evaluate(f, p);
          if (img.dist(tsnap) < 1e-6) out.push_back(p);
        } catch (const IndeterminacyError&) {
        }
      }
    } catch (const std::runtime_error&) {
      // degenerate combination in this chart; other charts cover the fiber
    }
  }
  dedupe_points(out);
  return out;
}

int topological_degree(const RationalMap& f, int sample_count, std::uint64_t seed) {
  if (sample_count < 1) throw UsageError("topological_degree: sample_count must be >= 1");
  std::map<int, int> votes;
  for (int t = 0; t < sample_count; ++t) {
    Rng r = Rng::stream(seed, static_cast<std::uint64_t>(t));
    Point w = random_point(f.space, r);
    std::vector<Point> pre = preimages(f, w);
    dedupe_points(pre);
    votes[static_cast<int>(pre.size())]++;
  }
  int best = -1, bestc = 0;
  for (auto& [k, c] : votes)
    if (c > bestc) {
      best = k;
      bestc = c;
    }
  if (bestc * 3 < sample_count * 2)
    throw ConvergenceError("topological_degree: inconsistent counts across generic points");
  return best;
}

double jacobian_norm_sq(const RationalMap& f, const Point& p) {
  Point src = p;
  src.normalize();
  Point img = evaluate(f, src);  // throws IndeterminacyError when appropriate
  const ModelSpace& s = f.space;
  int cs = owner_chart(src), ct = owner_chart(img);
  ChartCoords zs = chart_coords(src, cs);
  ChartCoords zt = chart_coords(img, ct);

  // Rescale homogeneous coordinates so the source chart denominators are 1;
  // then chart partials equal partials w.r.t. the free homogeneous variables.
  std::array<Complex, 4> h = src.h;
  std::vector<int> freev, denidx;
  if (s.kind == SpaceKind::P1 || s.kind == SpaceKind::P2) {
    for (int v = 0; v < s.nhomog; ++v) (v == cs ? denidx : freev).push_back(v);
    Complex d = h[cs];
    for (int v = 0; v < s.nhomog; ++v) h[v] /= d;
  } else {
    int i = cs / 2, j = cs % 2;
    Complex d1 = h[i], d2 = h[2 + j];
    h[0] /= d1;
    h[1] /= d1;
    h[2] /= d2;
    h[3] /= d2;
    freev = {1 - i, 2 + (1 - j)};
  }

  // Image chart component indexing.
  std::vector<int> numc;
  int denc1 = 0, denc2 = -1;
  if (s.kind == SpaceKind::P1 || s.kind == SpaceKind::P2) {
    denc1 = ct;
    for (int i = 0; i < s.nhomog; ++i)
      if (i != ct) numc.push_back(i);
  } else {
    int i = ct / 2, j = ct % 2;
    denc1 = i;
    denc2 = 2 + j;
    numc = {1 - i, 2 + (1 - j)};
  }

  const auto& dv = f.derivatives();
  auto dcomp = [&](int comp, int var) { return dv[comp * 4 + var].eval(h); };
  int k = s.dim;
  Complex J[2][2] = {{0, 0}, {0, 0}};
  for (int m = 0; m < k; ++m) {
    int a = numc[m];
    int b = (s.kind == SpaceKind::P1xP1 && m == 1) ? denc2 : denc1;
    Complex Fa = f.comps[a].eval(h), Fb = f.comps[b].eval(h);
    if (std::abs(Fb) < 1e-300) throw IndeterminacyError("image leaves all charts");
    for (int j = 0; j < k; ++j) {
      int v = freev[j];
      J[m][j] = (dcomp(a, v) * Fb - Fa * dcomp(b, v)) / (Fb * Fb);
    }
  }
  Complex det = (k == 1) ? J[0][0] : (J[0][0] * J[1][1] - J[0][1] * J[1][0]);
  double rho_src = volume_density(s, zs);
  double rho_img = volume_density(s, zt);
  return std::norm(det) * rho_img / rho_src;
}

}  // namespace greenlab
