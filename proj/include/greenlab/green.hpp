#pragma once

#include "greenlab/cohomology.hpp"
#include "greenlab/potentials.hpp"

namespace greenlab {

struct GreenConfig {
  int per_axis = 0;          // 0 = sampling default for the space
  int max_iters = 60;
  double tol = 1e-9;         // stop once the sup of the last increment is below
  int regularity_check = 5;  // iterates whose degree matrices are verified exactly
};

struct GreenResult {
  GridPotential potential;   // class = Perron class alpha, normalized sup_zero
  double lambda1 = 0;
  std::vector<double> alpha;
  int iters = 0;
  std::vector<double> sup_increments;  // sup |g_{n+1} - g_n| per iteration
  std::vector<double> l1_increments;   // quadrature-weighted |g_{n+1} - g_n|
  double invariance_residual = 0;      // ||(g o f + gamma)/lambda - g||_L1
  bool converged = false;
};

/// Green potential g = lim lambda1^{-n} * gamma_{f^n}(alpha) by orbit
/// summation: one-regularity makes the limit telescope into
/// g = sum_k lambda1^{-(k+1)} gamma_f(alpha)(f^k p), a geometric series.
/// Requires lambda1 > 1 with a simple leading eigenvalue and exact
/// one-regularity up to cfg.regularity_check (UsageError otherwise); throws
/// ConvergenceError when the increments grow five iterations in a row.
GreenResult green_potential(const RationalMap& f, const GreenConfig& cfg = {});

/// Point-wise orbit summation with the regularity precheck done once at
/// construction; cheap enough to call inside sampling loops.
class GreenOperator {
 public:
  GreenOperator(const RationalMap& f, const GreenConfig& cfg = {});

  /// Orbit sum at p. Throws IndeterminacyError when the orbit hits I_f.
  double value(const Point& p) const;

  /// Potential of lambda1^{-n} (f^n)^*(theta_alpha + dd^c rho) relative to
  /// alpha: the orbit sum truncated at n plus lambda1^{-n} rho(f^n p). Used to
  /// compare pull-back limits across smooth representatives of the class.
  double pullback_value(const Point& p, int n,
                        const std::function<double(const Point&)>& rho = {}) const;

  double lambda1() const { return lambda1_; }
  const std::vector<double>& alpha() const { return alpha_; }

 private:
  RationalMap f_;
  GreenConfig cfg_;
  double lambda1_;
  std::vector<double> alpha_;
};

/// Convenience wrapper around GreenOperator::value.
double green_value(const RationalMap& f, const Point& p, const GreenConfig& cfg = {});

}  // namespace greenlab
