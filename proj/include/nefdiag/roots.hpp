#pragma once

#include "nefdiag/rational.hpp"

#include <array>
#include <complex>
#include <optional>
#include <string_view>
#include <vector>

namespace nefdiag {

inline constexpr double kDefaultTol = 1e-8;

/// Coefficients of the diagonal of the variance function
///   V11(m) = A m1^2 + a m1 + b m2 + e,
///   V22(m) = A m2^2 + c m1 + d m2 + f,
/// with A < 0 and b != 0. Stored exactly so that rational inputs survive
/// into the exact-arithmetic checks.
struct DiagonalVFParams {
  Rational A, a, b, c, d, e, f;

  /// Throws Error(InvalidParams) unless A < 0 and b != 0.
  static DiagonalVFParams make(Rational A, Rational a, Rational b, Rational c,
                               Rational d, Rational e, Rational f);
  static DiagonalVFParams from_doubles(double A, double a, double b, double c,
                                       double d, double e, double f);

  void validate() const;

  /// The exponent r = -1/A of the candidate Laplace transform.
  Rational exponent() const { return Rational(-1) / A; }

  friend bool operator==(const DiagonalVFParams&, const DiagonalVFParams&) = default;
};

/// Monic quartic c0 + c1 x + c2 x^2 + c3 x^3 + x^4, coefficients ascending.
struct Quartic {
  std::array<double, 5> coeffs{0, 0, 0, 0, 1};
  std::optional<std::array<Rational, 5>> exact;

  static Quartic from_coefficients(const std::array<double, 5>& ascending);
  static Quartic from_exact(const std::array<Rational, 5>& ascending);

  std::complex<double> eval(std::complex<double> z) const;
  double eval(double x) const;
  /// q^(j)(z) / j!
  std::complex<double> taylor(std::complex<double> z, int j) const;
  /// Sum of |c_k| over all coefficients, the leading one included.
  double coefficient_norm() const;
  /// 1 + max |c_i| over the non-leading coefficients.
  double scale() const;
};

Quartic build_characteristic_quartic(const DiagonalVFParams& p);
Quartic build_dual_quartic(const DiagonalVFParams& p);

struct RootEntry {
  std::complex<double> value;
  int multiplicity = 1;
  /// Set when the root is rational and verified exactly against exact
  /// quartic coefficients.
  std::optional<Rational> exact;

  bool is_real() const { return value.imag() == 0.0; }
};

struct RootSet {
  /// Real entries ascending, then complex entries ordered by (re, im).
  std::vector<RootEntry> entries;
  int n_r = 0;

  std::vector<double> distinct_real() const;
  std::vector<RootEntry> real_entries() const;
};

/// All four roots of a monic quartic with multiplicities. Roots come from the
/// companion-matrix eigenvalues; clusters are merged when the centroid passes
/// a backward-error multiplicity test at `tol`, then polished by Newton on the
/// (m-1)-th derivative.
RootSet solve_quartic(const Quartic& q, double tol = kDefaultTol);

enum class RootPattern {
  FourSingleReal,
  DoublePlusTwoSingleReal,
  SinglePlusTripleReal,
  QuadrupleReal,
  TwoDoubleReal,
  TwoRealTwoComplex,
  FourComplex,
  TwoDoubleComplex,
  DoubleRealPlusComplexPair,
};

std::string_view to_string(RootPattern p);
std::optional<RootPattern> root_pattern_from_string(std::string_view s);

RootPattern classify_root_pattern(const RootSet& r);

struct DualOrdinate {
  double nu;
  double residual;
};

/// nu = (lambda^2 - a lambda + e A) / b, with the residual of the second
/// coordinate relation nu^2 - c lambda - d nu + f A. Throws Error(NonRoot)
/// when lambda is not a root of the characteristic quartic within `tol`.
DualOrdinate dual_ordinate(double lambda, const DiagonalVFParams& p, double tol = kDefaultTol);

/// Exact version for a rational root; the residual is returned exactly.
std::pair<Rational, Rational> dual_ordinate_exact(const Rational& lambda, const DiagonalVFParams& p);

}  // namespace nefdiag
