#include "greenlab/poly.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace greenlab {

std::string GaussRational::str() const {
  std::ostringstream os;
  if (im == 0) {
    os << re;
  } else {
    os << "(" << re << (im > 0 ? "+" : "") << im << "i)";
  }
  return os.str();
}

LogComplex LogComplex::zero() {
  return {-std::numeric_limits<double>::infinity(), 0.0};
}

LogComplex LogComplex::from(std::complex<double> z) {
  if (z == std::complex<double>(0.0, 0.0)) return zero();
  return {std::log(std::abs(z)), std::arg(z)};
}

std::complex<double> LogComplex::to_complex() const {
  if (std::isinf(logmag) && logmag < 0) return {0.0, 0.0};
  return std::polar(std::exp(logmag), arg);
}

Poly Poly::constant(int nvars, GaussRational c) {
  Poly p(nvars);
  p.add_term(Expo{0, 0, 0, 0}, c);
  return p;
}

Poly Poly::variable(int nvars, int var) {
  Poly p(nvars);
  Expo e{0, 0, 0, 0};
  e[var] = 1;
  p.add_term(e, GaussRational(1));
  return p;
}

Poly Poly::monomial(int nvars, Expo e, GaussRational c) {
  Poly p(nvars);
  p.add_term(e, c);
  return p;
}

void Poly::add_term(const Expo& e, const GaussRational& c) {
  evc_.reset();
  if (c.is_zero()) return;
  auto it = terms_.find(e);
  if (it == terms_.end()) {
    terms_.emplace(e, c);
  } else {
    it->second += c;
    if (it->second.is_zero()) terms_.erase(it);
  }
}

Poly Poly::operator-() const {
  Poly r(nvars_);
  for (auto& [e, c] : terms_) r.terms_.emplace(e, -c);
  return r;
}

Poly Poly::operator+(const Poly& o) const {
  Poly r = *this;
  for (auto& [e, c] : o.terms_) r.add_term(e, c);
  return r;
}

Poly Poly::operator-(const Poly& o) const {
  Poly r = *this;
  for (auto& [e, c] : o.terms_) r.add_term(e, -c);
  return r;
}

Poly Poly::operator*(const Poly& o) const {
  Poly r(std::max(nvars_, o.nvars_));
  for (auto& [e1, c1] : terms_) {
    for (auto& [e2, c2] : o.terms_) {
      Expo e{e1[0] + e2[0], e1[1] + e2[1], e1[2] + e2[2], e1[3] + e2[3]};
      r.add_term(e, c1 * c2);
    }
  }
  return r;
}

Poly Poly::operator*(const GaussRational& c) const {
  Poly r(nvars_);
  if (c.is_zero()) return r;
  for (auto& [e, q] : terms_) r.terms_.emplace(e, q * c);
  return r;
}

Poly Poly::pow(std::int64_t n) const {
  Poly r = constant(nvars_, GaussRational(1));
  Poly base = *this;
  while (n > 0) {
    if (n & 1) r = r * base;
    base = base * base;
    n >>= 1;
  }
  return r;
}

std::int64_t Poly::total_degree() const {
  std::int64_t d = -1;
  for (auto& [e, c] : terms_) d = std::max(d, e[0] + e[1] + e[2] + e[3]);
  return d;
}

std::int64_t Poly::degree_in(int var) const {
  std::int64_t d = -1;
  for (auto& [e, c] : terms_) d = std::max(d, e[var]);
  return d;
}

std::int64_t Poly::degree_in_pair(int v0, int v1) const {
  std::int64_t d = -1;
  for (auto& [e, c] : terms_) d = std::max(d, e[v0] + e[v1]);
  return d;
}

bool Poly::is_homogeneous_in(int v0, int v1, std::int64_t* deg) const {
  std::int64_t d = -2;
  for (auto& [e, c] : terms_) {
    std::int64_t t = e[v0] + e[v1];
    if (d == -2) d = t;
    else if (t != d) return false;
  }
  if (deg) *deg = (d == -2 ? -1 : d);
  return true;
}

Poly Poly::substitute(const std::vector<Poly>& subs) const {
  int nv = 0;
  for (auto& s : subs) nv = std::max(nv, s.nvars());
  Poly r(nv);
  for (auto& [e, c] : terms_) {
    Poly t = constant(nv, c);
    for (int v = 0; v < nvars_; ++v) {
      if (e[v] > 0) t = t * subs.at(v).pow(e[v]);
    }
    r = r + t;
  }
  return r;
}

Poly Poly::derivative(int var) const {
  Poly r(nvars_);
  for (auto& [e, c] : terms_) {
    if (e[var] == 0) continue;
    Expo d = e;
    d[var] -= 1;
    r.add_term(d, GaussRational(Rational(e[var])) * c);
  }
  return r;
}

const Poly::EvCache& Poly::ev() const {
  if (!evc_) {
    auto c = std::make_shared<EvCache>();
    c->terms.reserve(terms_.size());
    c->one_norm = 0;
    for (auto& [e, q] : terms_) {
      std::complex<double> v = q.to_complex();
      c->terms.emplace_back(e, v);
      c->one_norm += std::abs(v);
    }
    evc_ = std::move(c);
  }
  return *evc_;
}

double Poly::coeff_one_norm() const { return ev().one_norm; }

std::complex<double> Poly::eval(const std::array<std::complex<double>, 4>& z) const {
  std::complex<double> acc{0.0, 0.0};
  for (auto& [e, c] : ev().terms) {
    std::complex<double> t = c;
    for (int v = 0; v < 4; ++v) {
      if (e[v] == 0) continue;
      if (e[v] <= 8) {
        for (std::int64_t j = 0; j < e[v]; ++j) t *= z[v];
      } else {
        t *= std::pow(z[v], static_cast<double>(e[v]));
      }
    }
    acc += t;
  }
  return acc;
}

LogComplex Poly::eval_log(const std::array<LogComplex, 4>& z) const {
  // One (logmag, phase) per term; combine relative to the dominant term.
  std::vector<LogComplex> ts;
  ts.reserve(terms_.size());
  double maxmag = -std::numeric_limits<double>::infinity();
  for (auto& [e, cc] : ev().terms) {
    double lm = std::log(std::abs(cc));
    double ph = std::arg(cc);
    bool dead = false;
    for (int v = 0; v < 4; ++v) {
      if (e[v] == 0) continue;
      if (std::isinf(z[v].logmag) && z[v].logmag < 0) { dead = true; break; }
      lm += static_cast<double>(e[v]) * z[v].logmag;
      ph += static_cast<double>(e[v]) * z[v].arg;
    }
    if (dead) continue;
    ts.push_back({lm, ph});
    maxmag = std::max(maxmag, lm);
  }
  if (ts.empty() || std::isinf(maxmag)) return LogComplex::zero();
  std::complex<double> acc{0.0, 0.0};
  for (auto& t : ts) acc += std::polar(std::exp(t.logmag - maxmag), t.arg);
  if (acc == std::complex<double>(0.0, 0.0)) return LogComplex::zero();
  return {maxmag + std::log(std::abs(acc)), std::arg(acc)};
}

std::pair<Expo, GaussRational> Poly::leading() const {
  if (terms_.empty()) throw std::runtime_error("leading(): zero polynomial");
  auto it = terms_.rbegin();
  return {it->first, it->second};
}

static bool expo_divides(const Expo& d, const Expo& e) {
  for (int v = 0; v < 4; ++v)
    if (d[v] > e[v]) return false;
  return true;
}

Poly Poly::div_exact(const Poly& d) const {
  if (d.is_zero()) throw std::runtime_error("div_exact: division by zero");
  Poly rem = *this;
  Poly q(std::max(nvars_, d.nvars_));
  auto [de, dc] = d.leading();
  while (!rem.is_zero()) {
    auto [re, rc] = rem.leading();
    if (!expo_divides(de, re)) throw std::runtime_error("div_exact: not divisible");
    Expo qe{re[0] - de[0], re[1] - de[1], re[2] - de[2], re[3] - de[3]};
    GaussRational qc = rc / dc;
    Poly t = monomial(q.nvars(), qe, qc);
    q = q + t;
    rem = rem - t * d;
  }
  return q;
}

std::vector<Poly> Poly::coeffs_in(int var) const {
  std::int64_t d = degree_in(var);
  std::vector<Poly> cs(static_cast<std::size_t>(std::max<std::int64_t>(d, 0)) + 1, Poly(nvars_));
  for (auto& [e, c] : terms_) {
    Expo r = e;
    std::int64_t k = r[var];
    r[var] = 0;
    cs[static_cast<std::size_t>(k)].add_term(r, c);
  }
  while (cs.size() > 1 && cs.back().is_zero()) cs.pop_back();
  return cs;
}

Poly Poly::from_coeffs_in(int var, int nvars, const std::vector<Poly>& cs) {
  Poly r(nvars);
  for (std::size_t k = 0; k < cs.size(); ++k) {
    for (auto& [e, c] : cs[k].terms()) {
      Expo t = e;
      t[var] += static_cast<std::int64_t>(k);
      r.add_term(t, c);
    }
  }
  return r;
}

namespace {

// gcd over Q(i)[x_v .. x_3] restricted to variables >= `fromvar`.
// Variables below `fromvar` must not occur.
Poly gcd_rec(const Poly& a, const Poly& b, int fromvar);

int lowest_used_var(const Poly& p, int fromvar) {
  for (int v = fromvar; v < 4; ++v)
    if (p.degree_in(v) > 0) return v;
  return -1;
}

// gcd of the list of Poly coefficients (recursing into fewer variables).
Poly content_of(const std::vector<Poly>& cs, int fromvar) {
  Poly g;
  bool first = true;
  for (auto& c : cs) {
    if (c.is_zero()) continue;
    if (first) {
      g = c;
      first = false;
    } else {
      g = gcd_rec(g, c, fromvar);
    }
    if (g.total_degree() == 0) break;
  }
  return g;
}

// Pseudo-remainder of u by v as univariate-in-main-var lists.
std::vector<Poly> pseudo_rem(std::vector<Poly> u, const std::vector<Poly>& v) {
  const Poly& lv = v.back();
  std::int64_t dv = static_cast<std::int64_t>(v.size()) - 1;
  while (static_cast<std::int64_t>(u.size()) - 1 >= dv) {
    Poly lu = u.back();
    std::int64_t du = static_cast<std::int64_t>(u.size()) - 1;
    // u <- lv*u - lu * x^(du-dv) * v
    for (auto& c : u) c = c * lv;
    for (std::int64_t j = 0; j <= dv; ++j) {
      std::size_t idx = static_cast<std::size_t>(du - dv + j);
      u[idx] = u[idx] - lu * v[static_cast<std::size_t>(j)];
    }
    while (!u.empty() && u.back().is_zero()) u.pop_back();
    if (u.empty()) break;
  }
  return u;
}

Poly gcd_rec(const Poly& a, const Poly& b, int fromvar) {
  int nv = std::max(a.nvars(), b.nvars());
  if (a.is_zero() && b.is_zero()) return Poly(nv);
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  int va = lowest_used_var(a, fromvar);
  int vb = lowest_used_var(b, fromvar);
  if (va < 0 && vb < 0) return Poly::constant(nv, GaussRational(1));
  if (va < 0 || vb < 0) {
    // One side is constant in all remaining variables: gcd of a constant and
    // anything over a field is 1 (up to content, which is trivial here).
    return Poly::constant(nv, GaussRational(1));
  }
  int var = std::min(va, vb);
  auto ua = a.coeffs_in(var);
  auto ub = b.coeffs_in(var);
  Poly ca = content_of(ua, var + 1);
  Poly cb = content_of(ub, var + 1);
  if (a.degree_in(var) == 0) {
    // `a` does not involve the main variable: gcd(a, content(b)).
    return gcd_rec(ca, cb, var + 1);
  }
  if (b.degree_in(var) == 0) {
    return gcd_rec(ca, cb, var + 1);
  }
  // Primitive parts.
  for (auto& c : ua) c = c.is_zero() ? c : c.div_exact(ca);
  for (auto& c : ub) c = c.is_zero() ? c : c.div_exact(cb);
  std::vector<Poly> u = ua, v = ub;
  if (u.size() < v.size()) std::swap(u, v);
  while (!v.empty()) {
    std::vector<Poly> r = pseudo_rem(u, v);
    u = std::move(v);
    if (r.empty()) {
      v.clear();
    } else {
      Poly cr = content_of(r, var + 1);
      for (auto& c : r) c = c.is_zero() ? c : c.div_exact(cr);
      v = std::move(r);
    }
  }
  Poly pp = Poly::from_coeffs_in(var, nv, u);
  Poly cont = gcd_rec(ca, cb, var + 1);
  return pp * cont;
}

}  // namespace

Poly Poly::gcd(const Poly& a, const Poly& b) {
  if (!a.is_zero() && !b.is_zero() && (a.term_count() == 1 || b.term_count() == 1)) {
    // Monomial fast path (dense coefficient lists would blow up for the huge
    // exponents of iterated monomial maps): per-variable min exponent.
    Expo e{};
    for (int v = 0; v < 4; ++v) {
      std::int64_t m = std::numeric_limits<std::int64_t>::max();
      for (auto& [ea, ca] : a.terms()) m = std::min(m, ea[v]);
      for (auto& [eb, cb] : b.terms()) m = std::min(m, eb[v]);
      e[v] = m;
    }
    return Poly::monomial(std::max(a.nvars(), b.nvars()), e, GaussRational(1));
  }
  Poly g = gcd_rec(a, b, 0);
  if (g.is_zero()) return g;
  auto [e, c] = g.leading();
  return g * (GaussRational(1) / c);
}

GaussRational resultant_univariate(std::vector<GaussRational> p, std::vector<GaussRational> q) {
  while (!p.empty() && p.back().is_zero()) p.pop_back();
  while (!q.empty() && q.back().is_zero()) q.pop_back();
  if (p.empty() || q.empty()) return GaussRational(0);
  std::size_t m = p.size() - 1, n = q.size() - 1;
  if (m == 0 && n == 0) return GaussRational(1);
  if (m == 0) {
    GaussRational r(1);
    for (std::size_t j = 0; j < n; ++j) r *= p[0];
    return r;
  }
  if (n == 0) {
    GaussRational r(1);
    for (std::size_t j = 0; j < m; ++j) r *= q[0];
    return r;
  }
  std::size_t N = m + n;
  std::vector<std::vector<GaussRational>> S(N, std::vector<GaussRational>(N, GaussRational(0)));
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t j = 0; j <= m; ++j) S[r][r + (m - j)] = p[j];
  for (std::size_t r = 0; r < m; ++r)
    for (std::size_t j = 0; j <= n; ++j) S[n + r][r + (n - j)] = q[j];
  // Exact Gaussian elimination over the field Q(i).
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
      GaussRational factor = S[r][col] * inv;
      for (std::size_t c = col; c < N; ++c) S[r][c] -= factor * S[col][c];
    }
  }
  return det;
}

std::vector<GaussRational> dense_univariate(const Poly& p, int var) {
  std::vector<GaussRational> cs(static_cast<std::size_t>(std::max<std::int64_t>(p.degree_in(var), 0)) + 1,
                                GaussRational(0));
  for (auto& [e, c] : p.terms()) {
    for (int v = 0; v < 4; ++v)
      if (v != var && e[v] != 0) throw std::runtime_error("dense_univariate: not univariate");
    cs[static_cast<std::size_t>(e[var])] = c;
  }
  return cs;
}

std::vector<GaussRational> lagrange_interpolate(const std::vector<Rational>& xs,
                                                const std::vector<GaussRational>& ys) {
  std::size_t n = xs.size();
  std::vector<GaussRational> acc(n, GaussRational(0));
  for (std::size_t i = 0; i < n; ++i) {
    // Basis polynomial prod_{j!=i} (x - x_j) / (x_i - x_j)
    std::vector<GaussRational> basis{GaussRational(1)};
    Rational denom(1);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      std::vector<GaussRational> next(basis.size() + 1, GaussRational(0));
      for (std::size_t k = 0; k < basis.size(); ++k) {
        next[k + 1] += basis[k];
        next[k] -= basis[k] * GaussRational(Rational(xs[j]));
      }
      basis = std::move(next);
      denom *= (xs[i] - xs[j]);
    }
    GaussRational scale = ys[i] / GaussRational(denom);
    for (std::size_t k = 0; k < basis.size(); ++k) acc[k] += basis[k] * scale;
  }
  while (acc.size() > 1 && acc.back().is_zero()) acc.pop_back();
  return acc;
}

std::string Poly::str(const std::vector<std::string>& names) const {
  static const std::vector<std::string> def{"x0", "x1", "x2", "x3"};
  const auto& nm = names.empty() ? def : names;
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
    if (!first) os << " + ";
    first = false;
    os << it->second.str();
    for (int v = 0; v < 4; ++v) {
      if (it->first[v] == 0) continue;
      os << "*" << nm[v];
      if (it->first[v] > 1) os << "^" << it->first[v];
    }
  }
  return os.str();
}

}  // namespace greenlab
