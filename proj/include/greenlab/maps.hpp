#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "greenlab/geometry.hpp"
#include "greenlab/poly.hpp"

namespace greenlab {

struct IndeterminacySet {
  enum class Method { exact_resultant, numeric };
  std::vector<Point> points;
  Method method = Method::exact_resultant;
};

/// Dominant rational self-map of a model space, as gcd-reduced homogeneous
/// components with exact Gaussian-rational coefficients.
///
/// Component layout: P1 -> (F0:F1) in vars (x0,x1); P2 -> (F0:F1:F2) in
/// (x0,x1,x2); P1xP1 -> ((X0:X1),(Y0:Y1)) in (x0,x1,y0,y1), bihomogeneous
/// per pair. Affine coordinate conventions: z = x1/x0 in chart 0.
class RationalMap {
 public:
  ModelSpace space{ModelSpace::make(SpaceKind::P1)};
  std::vector<Poly> comps;
  /// deg[out_factor][in_factor]; 1x1 [d] on P^k, the bidegree matrix on P1xP1.
  std::vector<std::vector<std::int64_t>> deg;

  std::size_t monomial_count() const;
  std::int64_t scalar_degree() const;  // max entry of deg
  bool is_identity() const;

  const std::vector<Poly>& derivatives() const;  // d comps / d var, row-major

 private:
  mutable std::shared_ptr<std::vector<Poly>> derivs_;
};

inline constexpr std::size_t kDefaultMonomialCap = 10000;

/// Validates homogeneity/dominance and gcd-reduces component groups.
RationalMap make_map(const ModelSpace& space, std::vector<Poly> comps,
                     bool check_dominant = true);
RationalMap identity_map(const ModelSpace& space);

Point evaluate(const RationalMap& f, const Point& p);

/// Exact symbolic composition f o g with gcd cancellation; the returned degree
/// data is the true degree of the composition.
RationalMap compose(const RationalMap& f, const RationalMap& g,
                    std::size_t monomial_cap = kDefaultMonomialCap);
RationalMap iterate_map(const RationalMap& f, int n,
                        std::size_t monomial_cap = kDefaultMonomialCap);

IndeterminacySet indeterminacy_points(const RationalMap& f);

/// Preimages of a target point. For P1 this is direct numeric root-finding;
/// on the 2-dimensional models the target is snapped to nearby rational
/// coordinates and the fiber computed by exact resultant elimination.
std::vector<Point> preimages(const RationalMap& f, const Point& w);

int topological_degree(const RationalMap& f, int sample_count, std::uint64_t seed);

/// |Jac_omega(f)|^2: squared chart Jacobian determinant times the ratio of
/// volume densities at image and source.
double jacobian_norm_sq(const RationalMap& f, const Point& p);

/// Residual used to certify that a point is (near) a common zero of a
/// component group: max group component magnitude, scale-normalized.
double component_residual(const RationalMap& f, const Point& p);

// Internal helper exposed for tests: common zeros of two affine polynomials
// in vars (v0, v1) over Q(i), by exact resultant elimination plus certified
// numeric root extraction.
std::vector<std::array<Complex, 2>> common_roots_2d(const Poly& p, const Poly& q, int v0, int v1);

}  // namespace greenlab
