#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "greenlab/geometry.hpp"

namespace greenlab {

enum class Normalization { raw, sup_zero, mean_zero };

/// Chart-sampled global function phi relative to a class theta (coefficients
/// in the generator basis): the current it represents is theta + dd^c phi,
/// whose local potential in a chart is theta_chart_potential + phi. phi is a
/// genuine function on the space, so chart overlaps agree by construction.
struct GridPotential {
  ModelSpace space{ModelSpace::make(SpaceKind::P1)};
  int per_axis = 0;
  std::vector<double> theta_coeffs;
  std::vector<std::vector<double>> values;       // per chart, grid layout
  std::vector<std::vector<std::uint8_t>> mask;   // 1 = pole / undefined node
  Normalization norm = Normalization::raw;

  const Grid& grid() const { return get_grid(space, per_axis); }
};

/// Local potential of the reference part: sum_i theta_i * generator potential.
double theta_chart_potential(const ModelSpace& space, const std::vector<double>& theta, int chart,
                             const ChartCoords& z);

GridPotential make_zero_potential(const ModelSpace& space, const std::vector<double>& theta,
                                  int per_axis = 0);
GridPotential sample_potential(const ModelSpace& space, const std::vector<double>& theta,
                               const std::function<double(const Point&)>& func, int per_axis = 0);

/// Multilinear interpolation on the owner chart; masked corners fall back to
/// the unmasked minimum (potentials dip toward poles). Throws DomainError when
/// every corner is masked.
double value_at(const GridPotential& gp, const Point& p);

void normalize_sup_zero(GridPotential& gp);
void normalize_mean_zero(GridPotential& gp);

double l1_distance(const GridPotential& a, const GridPotential& b, double clamp = 1e6);
/// Sup distance over owned unmasked nodes.
double sup_distance(const GridPotential& a, const GridPotential& b);

/// Discrete dd^c mass of theta + dd^c phi per owned node (k = 1 only):
/// (1/2pi) * five-point Laplacian of the local potential. Halo ring and
/// masked-neighbor nodes get zero.
std::vector<std::vector<double>> ddc_masses(const GridPotential& gp);

/// Refresh non-owned (halo) nodes by interpolating from owner charts, keeping
/// the global-function property during chart-local updates.
void sync_halo(GridPotential& gp);

}  // namespace greenlab
