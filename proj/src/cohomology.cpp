#include "greenlab/cohomology.hpp"

#include <cmath>

namespace greenlab {

DegMatrix matrix_multiply(const DegMatrix& a, const DegMatrix& b) {
  std::size_t n = a.size(), m = b[0].size(), k = b.size();
  DegMatrix r(n, std::vector<std::int64_t>(m, 0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t l = 0; l < k; ++l)
      for (std::size_t j = 0; j < m; ++j) r[i][j] += a[i][l] * b[l][j];
  return r;
}

DegMatrix matrix_power(const DegMatrix& a, int n) {
  std::size_t d = a.size();
  DegMatrix r(d, std::vector<std::int64_t>(d, 0));
  for (std::size_t i = 0; i < d; ++i) r[i][i] = 1;
  DegMatrix base = a;
  while (n > 0) {
    if (n & 1) r = matrix_multiply(r, base);
    base = matrix_multiply(base, base);
    n >>= 1;
  }
  return r;
}

PullbackData pullback_matrix(const RationalMap& f) {
  PullbackData out;
  const ModelSpace& s = f.space;
  if (s.kind == SpaceKind::P1xP1) out.basis = {"fiber_1", "fiber_2"};
  else out.basis = {"omega_fs"};

  // f* = transpose of the bidegree matrix (rows of deg = output factors).
  std::size_t r = f.deg.size(), c = f.deg[0].size();
  out.matrix.assign(c, std::vector<std::int64_t>(r, 0));
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out.matrix[j][i] = f.deg[i][j];

  if (out.matrix.size() == 1) {
    out.lambda1 = static_cast<double>(out.matrix[0][0]);
    out.simple = true;
    out.perron_class = {1.0};
  } else {
    std::int64_t a = out.matrix[0][0], b = out.matrix[0][1];
    std::int64_t cc = out.matrix[1][0], d = out.matrix[1][1];
    std::int64_t tr = a + d, det = a * d - b * cc;
    std::int64_t disc = tr * tr - 4 * det;
    if (disc > 0) {
      double sq = std::sqrt(static_cast<double>(disc));
      double l1 = (tr + sq) / 2.0, l2 = (tr - sq) / 2.0;
      out.lambda1 = std::max(std::abs(l1), std::abs(l2));
      out.simple = (tr != 0);  // tr == 0 gives +-lambda, no modulus gap
      double lam = std::abs(l1) >= std::abs(l2) ? l1 : l2;
      // eigenvector of [[a,b],[c,d]] for lam
      double v0, v1;
      if (b != 0) {
        v0 = static_cast<double>(b);
        v1 = lam - a;
      } else if (cc != 0) {
        v0 = lam - d;
        v1 = static_cast<double>(cc);
      } else {
        v0 = (a >= d) ? 1 : 0;
        v1 = (a >= d) ? 0 : 1;
      }
      if (v0 < 0 || v1 < 0) {
        v0 = -v0;
        v1 = -v1;
      }
      out.perron_class = {v0, v1};
    } else {
      // repeated (disc == 0) or complex pair (disc < 0): no spectral gap
      out.lambda1 = disc == 0 ? tr / 2.0 : std::sqrt(static_cast<double>(det));
      out.simple = false;
      out.perron_class = {1.0, 1.0};
    }
  }
  double nrm = class_degree(s, out.perron_class);
  for (auto& v : out.perron_class) v /= nrm;
  return out;
}

std::vector<DegMatrix> degree_sequence(const RationalMap& f, int n_max,
                                       std::size_t monomial_cap) {
  std::vector<DegMatrix> out;
  RationalMap g = f;
  for (int n = 1; n <= n_max; ++n) {
    if (n > 1) g = compose(f, g, monomial_cap);
    out.push_back(g.deg);
  }
  return out;
}

RegularityReport is_1_regular(const RationalMap& f, int n_max, std::size_t monomial_cap) {
  RegularityReport rep;
  rep.degrees = degree_sequence(f, n_max, monomial_cap);
  for (int n = 1; n <= n_max; ++n) {
    // compare A(f^n) with A(f)^n; both as [out][in] matrices
    DegMatrix m = f.deg;
    for (int j = 1; j < n; ++j) m = matrix_multiply(f.deg, m);
    if (rep.degrees[static_cast<std::size_t>(n - 1)] != m) {
      rep.regular = false;
      rep.first_failure = n;
      break;
    }
  }
  return rep;
}

std::vector<double> dynamical_degree_estimate(const RationalMap& f, int n_max,
                                              std::size_t monomial_cap) {
  auto degs = degree_sequence(f, n_max, monomial_cap);
  const ModelSpace& s = f.space;
  auto ref = reference_class(s);
  std::vector<double> out;
  for (int n = 1; n <= static_cast<int>(degs.size()); ++n) {
    // coefficients of (f^n)* omega in the generator basis
    const DegMatrix& A = degs[static_cast<std::size_t>(n - 1)];
    std::vector<double> c(ref.size(), 0.0);
    for (std::size_t j = 0; j < c.size(); ++j)
      for (std::size_t i = 0; i < A.size(); ++i) c[j] += static_cast<double>(A[i][j]) * ref[i];
    out.push_back(std::pow(class_degree(s, c), 1.0 / n));
  }
  return out;
}

}  // namespace greenlab
