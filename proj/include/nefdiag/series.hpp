#pragma once

#include "nefdiag/measure.hpp"
#include "nefdiag/model.hpp"

#include <complex>
#include <optional>
#include <vector>

namespace nefdiag {

struct SeriesTerm {
  Point2 point{0, 0};  // exponent vector, r * pivot + sum_i n_i (v_i - pivot)
  double coefficient = 0;
  int order = 0;       // smallest total order sum_i n_i reaching this point

  friend bool operator==(const SeriesTerm&, const SeriesTerm&) = default;
};

struct SeriesReport {
  int depth = 0;
  /// Sorted lexicographically by point.
  std::vector<SeriesTerm> terms;
  std::optional<SeriesTerm> first_negative;
  bool complete = false;
  std::size_t pivot = 0;        // index into the model atoms
  Point2 pivot_point{0, 0};
  Point2 probe{0, 0};           // a theta* where the non-pivot sum has modulus < 1
  int proof_case = 0;           // 1..4, from the lexicographic order of the atoms

  /// Coefficient at a point (within 1e-9), 0 when absent.
  double coefficient_at(const Point2& p) const;
};

/// Generalized binomial expansion of L^r around the atom with the largest |weight|:
///   L^r = w_p^r exp<r v_p, theta> sum_j C(r, j) (sum_{i != p} (w_i / w_p) exp<v_i - v_p, theta>)^j
/// truncated at total order `depth`. Weights summing to a negative value are
/// negated first. Throws Error(NoDominantAtom) when no probe point makes the
/// non-pivot sum smaller than one in modulus.
SeriesReport expand_series(const CandidateModel& m, int depth = 8);

/// Least k in 1..depth with alpha1^r C(r, k) (alpha2/alpha1)^k < 0.
/// Throws Error(NotNormalized) unless alpha1 + alpha2 = +-1 within tol.
std::optional<int> first_negative_coefficient(double alpha1, double alpha2, double r, int depth = 8,
                                              double tol = 1e-8);

/// r (r-1) ... (r-k+1) / k!
double binomial_coefficient(double r, int k);

struct OscillatoryBlock {
  double lambda = 0;
  double gamma = 0;
  double A0 = 0, A1 = 0;  // constant parts of the cos / sin factors
  double B0 = 0, B1 = 0;  // linear parts of the cos / sin factors
};

/// f(theta) = P(theta) + sum_i A_i exp(lambda_i theta) + B theta exp(gamma theta)
///          + sum_j exp(lambda_j theta) [(A0_j + theta B0_j) cos(gamma_j theta)
///                                      + (A1_j + theta B1_j) sin(gamma_j theta)]
struct EliminationForm {
  std::vector<double> polynomial;  // ascending coefficients
  std::vector<std::pair<double, double>> exponentials;  // (A_i, lambda_i)
  double B = 0;
  double gamma = 0;
  std::vector<OscillatoryBlock> blocks;

  std::complex<double> operator()(std::complex<double> theta) const;
  /// Throws Error(InvalidForm) when no block is present.
  void validate() const;
};

/// First t in the grid with |f(it)|^r > 1 + 1e-6.
std::optional<double> magnitude_scan(const EliminationForm& f, double r, const std::vector<double>& t_grid);

/// n evenly spaced points on [lo, hi].
std::vector<double> linear_grid(double lo, double hi, int n);

}  // namespace nefdiag
