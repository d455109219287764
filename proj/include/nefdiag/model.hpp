#pragma once

#include "nefdiag/rational.hpp"
#include "nefdiag/roots.hpp"

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace nefdiag {

/// A support point (lambda, nu) of the base mixture. The exact coordinates
/// are present when the root was recognized as rational.
struct Atom {
  double lambda = 0;
  double nu = 0;
  std::optional<Rational> exact_lambda;
  std::optional<Rational> exact_nu;

  bool is_exact() const { return exact_lambda && exact_nu; }
};

/// The candidate transform L(theta) = (sum_i w_i exp(lambda_i t1 + nu_i t2))^r.
struct CandidateModel {
  std::vector<Atom> atoms;
  std::vector<Rational> weights;
  Rational exponent;  // r = -1/A

  double r() const { return to_double(exponent); }
  std::vector<double> weights_double() const;
  std::size_t size() const { return atoms.size(); }
};

CandidateModel candidate_model(const DiagonalVFParams& p, const std::vector<Rational>& weights,
                               double tol = kDefaultTol);
/// Same, reusing an already computed root set of the characteristic quartic.
CandidateModel candidate_model(const DiagonalVFParams& p, const RootSet& roots,
                               const std::vector<Rational>& weights, double tol = kDefaultTol);

/// Moves the first atom to the origin and maps atom i to
/// (lambda_i - lambda_1, lambda_i^2 - lambda_1^2).
CandidateModel normalize_model(const CandidateModel& m);

/// Drops atoms carrying an exactly zero weight.
CandidateModel drop_zero_weights(const CandidateModel& m);

/// 3x3 exact matrix whose rows are exponent vectors.
struct LatticeMatrix {
  std::array<std::array<Rational, 3>, 3> rows;
  /// False when the entries are binary images of irrational coordinates
  /// (roots that were not recognized as rational). Integer relations are then
  /// searched numerically instead of over the exact kernel.
  bool exact = true;

  static LatticeMatrix from_doubles(const std::array<std::array<double, 3>, 3>& m);
  friend bool operator==(const LatticeMatrix&, const LatticeMatrix&) = default;
};

/// Rows are the exponent offsets of atoms 2..n relative to atom 1, padded with
/// a zero third coordinate and, for three atoms, a zero third row. Applied to
/// a normalized model this is (lambda_i - lambda_1, lambda_i^2 - lambda_1^2, 0).
/// Throws Error(UnsupportedArity) unless the model has 3 or 4 atoms.
LatticeMatrix build_lambda_matrix(const CandidateModel& m);

enum class StarMethod { ExactKernel, BoundedSearch, NumericSearch };
std::string_view to_string(StarMethod m);

struct StarReport {
  bool holds = true;
  std::optional<std::array<BigInt, 3>> witness;
  StarMethod method = StarMethod::ExactKernel;
  int kernel_dimension = 0;
  int bound = 0;  // enumeration bound, recorded for bounded searches

  friend bool operator==(const StarReport&, const StarReport&) = default;
};

/// Decides whether a^T L = 0 has an integer solution with two coordinates of
/// strictly opposite sign. The left kernel is computed exactly; a trivial
/// kernel holds, a one-dimensional kernel is decided by the sign pattern of
/// its primitive integer generator, and larger kernels are searched over
/// integer combinations of a kernel basis with coefficients bounded by `bound`.
/// For an inexact matrix every integer vector with |a_i| <= bound is tested
/// against |a^T L| <= 1e-9 |a|_1 max|L_ij|.
StarReport star_condition(const LatticeMatrix& lattice, int bound = 50);

/// Primitive integer basis of the exact left kernel { a : a^T L = 0 }.
std::vector<std::array<BigInt, 3>> left_kernel_basis(const LatticeMatrix& lattice);

enum class VerdictCase { CaseA, CaseB, Rejected };

enum class RejectReason {
  None,
  NoContributingAtoms,
  PointMass,
  MixedSigns,
  NotNormalized,
  ExponentNotInteger,
  ExponentNotEvenInteger,
};

std::string_view to_string(VerdictCase c);
std::string_view reason_text(RejectReason r);

struct AdmissibilityVerdict {
  VerdictCase outcome = VerdictCase::Rejected;
  int N = 0;
  RejectReason reason = RejectReason::None;
  /// Rejection that the lattice condition cannot certify.
  bool inconclusive = false;
  bool theta_full_plane = false;
  /// Number of atoms with a nonzero weight.
  int contributing_atoms = 0;
  /// Two contributing atoms: decided on the one-dimensional section.
  bool one_dimensional = false;
  std::optional<StarReport> star;

  bool accepted() const { return outcome != VerdictCase::Rejected; }
  std::string reason_string() const { return std::string(reason_text(reason)); }
};

struct VerdictOptions {
  double tol = kDefaultTol;       // weight-sum tolerance
  double integrality_tol = 1e-9;  // |r - round(r)|
  int star_bound = 50;
};

AdmissibilityVerdict admissibility_verdict(const CandidateModel& m, const VerdictOptions& opts = {});

}  // namespace nefdiag
