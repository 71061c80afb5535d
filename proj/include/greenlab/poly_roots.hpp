#pragma once

#include <complex>
#include <vector>

namespace greenlab {

/// All finite roots of sum_j c[j] z^j. Leading near-zero coefficients are
/// stripped (relative tolerance `lead_tol`); the number of stripped degrees is
/// reported through `roots_at_infinity` when non-null. Degrees 1 and 2 use
/// closed forms, higher degrees a balanced companion matrix.
std::vector<std::complex<double>> poly_roots(std::vector<std::complex<double>> c,
                                             int* roots_at_infinity = nullptr,
                                             double lead_tol = 1e-12);

}  // namespace greenlab
