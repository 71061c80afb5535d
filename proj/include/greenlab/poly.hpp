#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "greenlab/rational.hpp"

namespace greenlab {

// Exponent tuple; unused variables stay 0. Exponents can get large
// (iterated monomial maps), hence 64-bit.
using Expo = std::array<std::int64_t, 4>;

/// A value in log-magnitude/phase form: value = exp(logmag) * exp(i*arg).
/// logmag == -inf encodes zero.
struct LogComplex {
  double logmag;
  double arg;
  static LogComplex zero();
  static LogComplex from(std::complex<double> z);
  std::complex<double> to_complex() const;
};

/// Sparse polynomial over Q(i) in up to four variables.
class Poly {
 public:
  Poly() : nvars_(0) {}
  explicit Poly(int nvars) : nvars_(nvars) {}

  static Poly constant(int nvars, GaussRational c);
  static Poly variable(int nvars, int var);
  static Poly monomial(int nvars, Expo e, GaussRational c);

  int nvars() const { return nvars_; }
  bool is_zero() const { return terms_.empty(); }
  std::size_t term_count() const { return terms_.size(); }
  const std::map<Expo, GaussRational>& terms() const { return terms_; }

  void add_term(const Expo& e, const GaussRational& c);

  Poly operator-() const;
  Poly operator+(const Poly& o) const;
  Poly operator-(const Poly& o) const;
  Poly operator*(const Poly& o) const;
  Poly operator*(const GaussRational& c) const;
  bool operator==(const Poly& o) const { return nvars_ == o.nvars_ && terms_ == o.terms_; }

  Poly pow(std::int64_t n) const;

  std::int64_t total_degree() const;       // -1 for zero polynomial
  std::int64_t degree_in(int var) const;   // -1 for zero polynomial
  std::int64_t degree_in_pair(int v0, int v1) const;
  bool is_homogeneous_in(int v0, int v1, std::int64_t* deg = nullptr) const;

  /// Substitute subs[v] for variable v (all variables at once).
  Poly substitute(const std::vector<Poly>& subs) const;

  Poly derivative(int var) const;

  /// Plain evaluation; fine for modest exponents and term counts.
  std::complex<double> eval(const std::array<std::complex<double>, 4>& z) const;

  /// Sum of |coeff| over all terms (double precision).
  double coeff_one_norm() const;

  /// Evaluation with per-variable log-magnitude/phase inputs; immune to
  /// overflow/underflow for huge exponents.
  LogComplex eval_log(const std::array<LogComplex, 4>& z) const;

  /// Leading term in lex order (throws on zero polynomial).
  std::pair<Expo, GaussRational> leading() const;

  /// Exact division (caller guarantees divisibility); throws otherwise.
  Poly div_exact(const Poly& d) const;

  /// Multivariate gcd, monic-normalized w.r.t. its lex leading coefficient.
  static Poly gcd(const Poly& a, const Poly& b);

  /// View as univariate in `var` with Poly coefficients (index = power).
  std::vector<Poly> coeffs_in(int var) const;
  static Poly from_coeffs_in(int var, int nvars, const std::vector<Poly>& cs);

  std::string str(const std::vector<std::string>& names = {}) const;

 private:
  int nvars_;
  std::map<Expo, GaussRational> terms_;
  // dense double-precision image of terms_, built on first numeric use and
  // shared across copies; add_term drops it. Exact state lives in terms_ only.
  struct EvCache {
    std::vector<std::pair<Expo, std::complex<double>>> terms;
    double one_norm;
  };
  const EvCache& ev() const;
  mutable std::shared_ptr<const EvCache> evc_;
};

/// Resultant of two univariate polynomials over Q(i), given dense coefficient
/// vectors (index = power). Zero-degree edge cases follow the Sylvester
/// convention.
GaussRational resultant_univariate(std::vector<GaussRational> p, std::vector<GaussRational> q);

/// Dense coefficients of a Poly that must be univariate in `var`
/// (all other variables absent).
std::vector<GaussRational> dense_univariate(const Poly& p, int var);

/// Lagrange interpolation through (x_i, y_i) with rational nodes; returns
/// dense coefficients of the unique interpolating polynomial over Q(i).
std::vector<GaussRational> lagrange_interpolate(const std::vector<Rational>& xs,
                                                const std::vector<GaussRational>& ys);

}  // namespace greenlab
