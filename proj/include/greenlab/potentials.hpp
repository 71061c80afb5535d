#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "greenlab/cohomology.hpp"
#include "greenlab/grid_potential.hpp"
#include "greenlab/maps.hpp"

namespace greenlab {

/// Potential discrepancy of the pull-back: gamma_f(theta) is the global
/// function with f*(theta-current) = (f*theta-class rep) + dd^c gamma.
/// For a degree-A map it is sum_i c_i * (1/2) log(|F_i(x)|^2 / prod_j |x_j|^{2A_ij})
/// in homogeneous coordinates (scale-invariant; -inf exactly on I_f).
double gamma_f(const RationalMap& f, const std::vector<double>& theta, const Point& p);

/// Pull-back of a current representative: class <- f* class,
/// phi <- phi o f + gamma_f(theta); nodes hitting I_f or masked regions of phi
/// are pole-masked.
GridPotential pullback(const GridPotential& phi, const RationalMap& f);

/// Lelong number at p: least-squares slope of circle/sphere means of u
/// against log r over dyadic radii in [rmin, rmax].
double lelong_number(const std::function<double(const Point&)>& u, const Point& p,
                     double rmin = 1.0 / 4096, double rmax = 0.25);
double lelong_number(const GridPotential& gp, const Point& p);

/// Node set, one flag vector per chart in grid layout (1 = in the set).
using NodeMask = std::vector<std::vector<std::uint8_t>>;
NodeMask mask_from_predicate(const ModelSpace& space, int per_axis,
                             const std::function<bool(const Point&)>& pred);
bool mask_empty(const NodeMask& m);

struct EnvelopeConfig {
  int per_axis = 0;        // 0 = envelope default (coarser than sampling grids)
  double tol = 1e-8;       // max-update convergence threshold
  int max_sweeps = 50000;
  double omega = 0;        // projected-SOR factor; 0 = 2 - 6.3/per_axis (decays on stall)
  int* sweeps_out = nullptr;      // diagnostics: sweeps used at the finest level
  double* residual_out = nullptr; // diagnostics: last max-update
};

int envelope_default_resolution(SpaceKind k);

/// Largest discrete theta-psh phi with phi <= upper (per-node bound; +inf
/// allowed off obstacles). Used by v_theta / extremal_function / capacity.
/// `pert` perturbs the smooth representative: theta_form = theta_ref + dd^c pert.
GridPotential psh_envelope(const ModelSpace& space, const std::vector<double>& theta,
                           const std::function<double(int chart, std::size_t idx)>& upper,
                           const GridPotential& init, const EnvelopeConfig& cfg,
                           const std::function<double(const Point&)>& pert = {});

/// V_theta = sup{phi theta-psh, phi <= 0}: identically 0 for nonnegative
/// multiples of the reference generators with no perturbation (exact),
/// relaxation otherwise. With `pert`, the represented current is
/// theta_ref + dd^c(pert + values).
GridPotential v_theta(const ModelSpace& space, const std::vector<double>& theta,
                      const EnvelopeConfig& cfg = {},
                      const std::function<double(const Point&)>& pert = {});

struct ExtremalResult {
  GridPotential v;  // V_{K,theta}
  double M = 0;     // sup_X V_{K,theta}
};
ExtremalResult extremal_function(const ModelSpace& space, const NodeMask& K,
                                 const std::vector<double>& theta,
                                 const EnvelopeConfig& cfg = {});

/// Monge-Ampere capacity of B. k=1: bang-bang relative extremal (exact-grade);
/// k=2: certified lower bound vol(alpha)/max(M,1)^k. Both are clipped into
/// [0, vol(alpha)] and dominate the extremal-function bound by construction
/// (the bound holds with M replaced by max(M, 1)).
double capacity(const ModelSpace& space, const NodeMask& B, const std::vector<double>& theta,
                const EnvelopeConfig& cfg = {});

/// chi(t) = -(-t)^p on t <= 0.
struct ChiSpec {
  double p = 1.0;
};

/// k=1 energy E_chi(phi) = (1/2) sum_{j=0,1} int (-chi)(phi - V) MA_j with
/// MA_0 = theta + dd^c V, MA_1 = theta + dd^c phi (discrete masses).
double chi_energy(const GridPotential& phi, const GridPotential& v, const ChiSpec& chi);

}  // namespace greenlab
