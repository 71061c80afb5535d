#include "greenlab/poly_roots.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>

namespace greenlab {

std::vector<std::complex<double>> poly_roots(std::vector<std::complex<double>> c,
                                             int* roots_at_infinity, double lead_tol) {
  using C = std::complex<double>;
  if (roots_at_infinity) *roots_at_infinity = 0;
  double maxc = 0;
  for (auto& x : c) maxc = std::max(maxc, std::abs(x));
  if (maxc == 0) return {};
  while (c.size() > 1 && std::abs(c.back()) <= lead_tol * maxc) {
    c.pop_back();
    if (roots_at_infinity) ++*roots_at_infinity;
  }
  std::size_t deg = c.size() - 1;
  if (deg == 0) return {};
  if (deg == 1) return {-c[0] / c[1]};
  if (deg == 2) {
    // Numerically stable quadratic: pick the root that avoids cancellation.
    C a = c[2], b = c[1], cc = c[0];
    C sq = std::sqrt(b * b - 4.0 * a * cc);
    if ((std::conj(b) * sq).real() >= 0) sq = -sq;
    C q = 0.5 * (-b + sq);
    std::vector<C> r;
    r.push_back(q / a);
    if (std::abs(q) > 0)
      r.push_back(cc / q);
    else
      r.push_back(C(0.0));
    return r;
  }
  Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(static_cast<int>(deg), static_cast<int>(deg));
  for (std::size_t j = 0; j + 1 < deg; ++j) M(static_cast<int>(j) + 1, static_cast<int>(j)) = 1.0;
  for (std::size_t j = 0; j < deg; ++j)
    M(static_cast<int>(j), static_cast<int>(deg) - 1) = -c[j] / c[deg];
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(M, /*computeEigenvectors=*/false);
  std::vector<C> r(deg);
  for (std::size_t j = 0; j < deg; ++j) r[j] = es.eigenvalues()(static_cast<int>(j));
  return r;
}

}  // namespace greenlab
