#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "greenlab/maps.hpp"

namespace greenlab {

using DegMatrix = std::vector<std::vector<std::int64_t>>;

/// Action of f* on H^{1,1} in the generator basis, with its Perron data.
struct PullbackData {
  std::vector<std::string> basis;      // generator class names
  DegMatrix matrix;                    // f* in that basis (transpose of map.deg)
  double lambda1 = 0;                  // spectral radius
  bool simple = false;                 // strict spectral gap, decided exactly
  std::vector<double> perron_class;    // nonneg alpha with <alpha, omega^{k-1}> = 1
};

PullbackData pullback_matrix(const RationalMap& f);

DegMatrix matrix_multiply(const DegMatrix& a, const DegMatrix& b);
DegMatrix matrix_power(const DegMatrix& a, int n);

/// Exact degree matrices of f, f^2, ..., f^n via symbolic composition.
std::vector<DegMatrix> degree_sequence(const RationalMap& f, int n_max,
                                       std::size_t monomial_cap = kDefaultMonomialCap);

struct RegularityReport {
  bool regular = true;
  int first_failure = 0;  // smallest n with A(f^n) != A(f)^n, 0 if none
  std::vector<DegMatrix> degrees;
};

/// Checks A(f^n) == A(f)^n exactly for n <= n_max.
RegularityReport is_1_regular(const RationalMap& f, int n_max,
                              std::size_t monomial_cap = kDefaultMonomialCap);

/// n-th-root estimates lambda1 ~ <(f^n)* omega, omega^{k-1}>^{1/n}.
std::vector<double> dynamical_degree_estimate(const RationalMap& f, int n_max,
                                              std::size_t monomial_cap = kDefaultMonomialCap);

}  // namespace greenlab
