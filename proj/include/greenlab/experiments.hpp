#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "greenlab/green.hpp"
#include "greenlab/measures.hpp"
#include "greenlab/potentials.hpp"

namespace greenlab {

enum class Verdict { consistent, inconsistent, inconclusive };
std::string to_string(Verdict v);

/// Reproducible experiment output: bit-identical JSON for a fixed
/// (config, seed) regardless of thread count. The wall-clock timestamp lives
/// in a separate "metadata" key added at write time, never in the body.
struct ExperimentReport {
  std::string id;
  std::uint64_t seed = 0;
  nlohmann::json config;  // effective parameters, defaults filled in
  Verdict verdict = Verdict::inconclusive;
  std::vector<std::pair<std::string, double>> constants;  // fitted values
  std::vector<std::string> notes;
  std::vector<std::string> columns;          // series, CSV-ready
  std::vector<std::vector<double>> rows;
};

nlohmann::json report_json(const ExperimentReport& r);  // no timestamp
std::string report_csv(const ExperimentReport& r);
/// Writes {id}-{map_hash}-{seed}.json/.csv under out_dir; the JSON gains a
/// "metadata" object (timestamp) excluded from report_json.
void write_report(const ExperimentReport& r, const std::string& out_dir,
                  const std::string& map_hash);

// ---- named test inputs ------------------------------------------------------

/// Quasi-psh test potentials on P1, as scale-invariant homogeneous
/// expressions (global functions relative to theta_out in the generator
/// basis). Names: "log_pole" (log|z| - fs), "log_pole2" (2log|z| - 2fs),
/// "log_shift2" (log|z-2| - fs), "smooth_eps" ((1/2)log(|z|^2+e^{-2a}) - fs,
/// a = param), "bounded" (smooth, |phi| <= 0.3). poles_out lists the
/// candidate singular points.
ScalarField named_potential(const std::string& name, double param,
                            std::vector<double>* theta_out = nullptr,
                            std::vector<Point>* poles_out = nullptr);

/// Smooth perturbation rho with sup|rho| <= scale; theta + dd^c rho is a
/// second smooth representative of the class of theta.
ScalarField bump_field(const ModelSpace& space, double scale);

/// Positive closed current in the Perron class, given by a global potential.
struct CurrentRep {
  ScalarField potential;
  std::vector<Point> poles;  // where the Lelong precheck samples
  double clamp = 1e6;        // pole clamp before quadrature
};
/// Named currents on P1 relative to alpha = {1}: "talpha" (zero potential),
/// "smooth_eps" (zero Lelong approximant, param = a), "point0" (the [0]
/// point mass, Lelong number 1 -- the deliberate hypothesis violation).
CurrentRep named_current(const std::string& name, double param);

// ---- experiments ------------------------------------------------------------

/// Volume contraction under iteration: Monte Carlo Vol(f^n(Omega)) for the
/// disk family Omega_r = {|z| < r} (chart 0), n <= n_max, via the exact
/// change of variables Vol(f^n(Omega)) = int_Omega |Jac(f^n)| / N dV with N
/// the preimage count in Omega. Fits the tightest (C1, C2) with
/// log Vol(f^n(Omega)) >= C2 lambda^n log(C1 Vol(Omega)) over all (n, r).
ExperimentReport volume_contraction(const RationalMap& f, const std::vector<double>& radii,
                                    int n_max, int samples, std::uint64_t seed);

/// Tail integrals int_{u_n < -alpha} (-u_n) dV of u_n = lambda^{-n} phi o f^n
/// over the alpha grid, n <= n_max; fits sup_n tail(alpha) against
/// exp(-C1 alpha)(alpha + C2). Orbits run in log-magnitude coordinates so
/// u_n stays finite when f^n collapses a node onto a pole of phi; the
/// potential is one of the named_potential names (P1 maps only).
ExperimentReport uniform_integrability(const RationalMap& f, const std::string& potential,
                                       double param, int n_max,
                                       const std::vector<double>& alpha_grid,
                                       int per_axis = 0);

/// Vol(phi < -t) over the t grid by seeded Monte Carlo; affine fit of
/// log Vol against t gives (A, B) with Vol ~ A exp(-B t). Inconclusive when
/// fewer than two volumes are positive.
ExperimentReport skoda_tail(const ModelSpace& space, const ScalarField& phi,
                            const std::vector<double>& t_grid, std::size_t samples,
                            std::uint64_t seed);

/// L^1 distances of normalized pull-back potentials to the Green potential
/// per n, for the representatives theta_alpha and theta_alpha + dd^c rho;
/// also the gap between the two pull-backs (decays like lambda^{-n}).
ExperimentReport equidistribute_smooth(const RationalMap& f, const ScalarField& rho,
                                       int n_max, int per_axis = 0);

/// As equidistribute_smooth with S in place of the smooth representative.
/// Lelong numbers of S are sampled at S.poles first; a value above 0.05
/// violates the zero-Lelong hypothesis and non-convergence is then reported
/// as the (expected) inconsistent verdict.
ExperimentReport equidistribute_current(const RationalMap& f, const CurrentRep& S,
                                        int n_max, int per_axis = 0);

/// d_top^{-n} (f^n)^* delta_start on P1 with exceptional-start detection
/// (preimage-count collapse over the first two levels -> UsageError).
EmpiricalMeasure brolin_measure(const RationalMap& f, const Point& start, int n,
                                std::size_t point_cap = 1 << 17);

/// Zeros of s o F^n for random Gaussian sections s of O(m) on P1, weighted
/// lambda^{-n}/m, against the Brolin preimage oracle and the Green-potential
/// Laplacian measure. Degenerate samples are discarded and counted.
ExperimentReport random_section_zeros(const RationalMap& f, int m, int n_max, int trials,
                                      std::uint64_t seed, const nlohmann::json& opts = {});

/// t * Cap_theta(phi - V_theta < -t) over the t grid (curves only); decay
/// verdict plus the energy bound cross-check Cap <= C / (t |chi(-t)|).
ExperimentReport capacity_decay(const ModelSpace& space, const ScalarField& phi,
                                const std::vector<double>& theta,
                                const std::vector<double>& t_grid, int per_axis = 0);

/// Small Jacobian pushes points near the indeterminacy set of the inverse:
/// samples p (uniform plus lines through pairs of indeterminacy points),
/// reports the monotone envelope eps(delta) = max{dist(f(p), I^-) :
/// |Jac|^2(p) < delta}. f_inv is checked symbolically (f o f_inv = id).
ExperimentReport jacobian_vs_indeterminacy(const RationalMap& f, const RationalMap& f_inv,
                                           const std::vector<double>& delta_grid,
                                           int samples, std::uint64_t seed);

// ---- dispatch ----------------------------------------------------------------

const std::vector<std::string>& experiment_ids();

/// Parses config (defaults filled, echoed in the report) and runs the named
/// experiment. UsageError on unknown id or bad parameters. The jacobian
/// experiment reads its inverse from config ("inverse_map" file path, or
/// "self_inverse": true).
ExperimentReport run_experiment(const std::string& id, const RationalMap& f,
                                const nlohmann::json& config, std::uint64_t seed);

}  // namespace greenlab
