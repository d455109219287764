#pragma once

#include "nefdiag/model.hpp"
#include "nefdiag/rational.hpp"
#include "nefdiag/roots.hpp"

#include <array>
#include <functional>
#include <optional>
#include <vector>

namespace nefdiag {

using Point2 = std::array<double, 2>;
using Matrix2 = std::array<std::array<double, 2>, 2>;
using ExactPoint2 = std::array<Rational, 2>;

/// Finite atomic probability measure on the plane. Exact support and masses
/// accompany the floating values when every input was rational.
struct FiniteMeasure {
  std::vector<Point2> support;
  std::vector<double> masses;
  std::optional<std::vector<ExactPoint2>> exact_support;
  std::optional<std::vector<Rational>> exact_masses;
  /// Support contained in one affine line (or a single point).
  bool degenerate = false;

  std::size_t size() const { return support.size(); }
  bool is_exact() const { return exact_support && exact_masses; }
  double laplace(const Point2& theta) const;
  Point2 mean() const;
  Matrix2 covariance() const;
};

/// N-fold convolution of the mixture sum_i |w_i| delta_{v_i}, with N taken
/// from an accepted verdict. Throws Error(NotAdmissible) for rejections.
FiniteMeasure realize_measure(const CandidateModel& m, const AdmissibilityVerdict& verdict);

struct CumulantValue {
  double k = 0;
  Point2 mean{0, 0};
  Matrix2 variance{{{0, 0}, {0, 0}}};
};

/// k = r log S(theta), gradient and Hessian, where S is the mixture sum. A
/// weight vector summing to a negative value is flipped first, matching the
/// even-exponent case. Throws Error(DomainViolation) when S <= 0.
CumulantValue cumulant_eval(const CandidateModel& m, const Point2& theta);

struct MeanToThetaOptions {
  double tol = 1e-10;
  int max_iterations = 100;
};

/// Damped Newton inversion of the mean map, started at theta = 0.
/// Throws Error(Degenerate) for collinear atoms and Error(OutOfMeanDomain)
/// when the target is not interior to r * conv(atoms).
Point2 mean_to_theta(const CandidateModel& m, const Point2& target, const MeanToThetaOptions& opts = {});

struct DiagCheckPoint {
  Point2 theta;
  double dev11 = 0;
  double dev22 = 0;
};

struct DiagCheckReport {
  std::vector<DiagCheckPoint> points;
  double max_deviation = 0;
  double tolerance = 0;
  bool pass = false;
};

/// Regular n x n grid on [lo, hi]^2.
std::vector<Point2> theta_grid(int n, double lo = -1.0, double hi = 1.0);

/// Compares the variance diagonal with A m1^2 + a m1 + b m2 + e and
/// A m2^2 + c m1 + d m2 + f along the theta-parametrized mean curve.
DiagCheckReport diag_variance_check(const CandidateModel& m, const DiagonalVFParams& p,
                                    const std::vector<Point2>& thetas, double tol);

struct RegressionReport {
  double max_deviation = 0;
  double tolerance = 0;
  bool pass = false;
  bool exact = false;
  std::size_t conditions = 0;  // distinct values of X + Y
};

/// Conditional-expectation identities for an i.i.d. pair X, Y ~ mu:
///   E[(X1-Y1)^2 - 2A X1 Y1 | X+Y] = a S1 + b S2 + 2e
///   E[(X2-Y2)^2 - 2A X2 Y2 | X+Y] = c S1 + d S2 + 2f
/// Evaluated by exact enumeration of support pairs; rational arithmetic is
/// used when the measure carries exact data.
RegressionReport regression_check(const FiniteMeasure& mu, const DiagonalVFParams& p, double tol);

/// The natural exponential family member exp(<theta,x> - k(theta)) mu(dx).
FiniteMeasure tilt_member(const FiniteMeasure& mu, const Point2& theta);

/// Central-difference Hessian of a scalar function of theta.
Matrix2 fd_hessian(const std::function<double(const Point2&)>& k, const Point2& theta, double h);
Matrix2 fd_hessian(const CandidateModel& m, const Point2& theta, double h);

/// True when all points lie on one affine line (tolerance scaled by extent).
bool collinear(const std::vector<Point2>& pts, double tol = 1e-12);

}  // namespace nefdiag
