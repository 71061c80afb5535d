#pragma once

#include <cstdint>
#include <vector>

#include "greenlab/grid_potential.hpp"
#include "greenlab/maps.hpp"

namespace greenlab {

/// Weighted point mass approximation of a positive measure.
struct EmpiricalMeasure {
  SpaceKind kind = SpaceKind::P1;
  std::vector<Point> points;
  std::vector<double> weights;

  double total() const;
  void normalize();  // rescale to total mass 1 (UsageError when empty/zero)
};

/// iid sample from the probability volume form.
EmpiricalMeasure volume_sample(const ModelSpace& space, int n, std::uint64_t seed);

/// d_t^{-n} (f^n)^* delta_w by breadth-first preimage iteration, preimages
/// taken with multiplicity (curves only). Throws ResourceError past point_cap.
EmpiricalMeasure preimage_measure(const RationalMap& f, const Point& w, int n,
                                  std::size_t point_cap = 1 << 17);

/// Node measure of theta + dd^c phi (curves only): positive part of the
/// discrete masses at owned unmasked nodes.
EmpiricalMeasure measure_from_potential(const GridPotential& gp);

/// Monte-Carlo dual-Lipschitz distance: max_j |mu(h_j) - nu(h_j)| over
/// n_features random unit-gradient features h_j = cos(<w_j, E(p)> + b_j) in
/// the Euclidean embedding. Deterministic in the seed; a lower bound for the
/// true dual-Lipschitz norm that separates distinct measures in practice.
double dual_lipschitz(const EmpiricalMeasure& a, const EmpiricalMeasure& b,
                      int n_features = 200, std::uint64_t seed = 0x11f5);

}  // namespace greenlab
