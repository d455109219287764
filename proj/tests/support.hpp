#pragma once

#include "nefdiag/errors.hpp"
#include "nefdiag/measure.hpp"
#include "nefdiag/model.hpp"
#include "nefdiag/rational.hpp"
#include "nefdiag/roots.hpp"
#include "nefdiag/series.hpp"

#include <algorithm>
#include <array>
#include <optional>
#include <random>
#include <vector>

namespace testsupport {

using nefdiag::DiagonalVFParams;
using nefdiag::ExactPoint2;
using nefdiag::Rational;

inline DiagonalVFParams e1_params() { return DiagonalVFParams::make(-1, 0, 1, 0, 1, 0, 0); }
inline DiagonalVFParams p2_params() { return DiagonalVFParams::make(-1, 0, 1, 0, -1, 1, 0); }
inline std::vector<Rational> quarter_half_quarter() { return {Rational(1, 4), Rational(1, 2), Rational(1, 4)}; }

inline Rational det3(const std::array<std::array<Rational, 3>, 3>& m) {
  return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
         m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

// Cramer's rule; nullopt for a singular system.
inline std::optional<std::array<Rational, 3>> solve3(const std::array<std::array<Rational, 3>, 3>& m,
                                                     const std::array<Rational, 3>& rhs) {
  Rational d = det3(m);
  if (d == 0) return std::nullopt;
  std::array<Rational, 3> x;
  for (std::size_t k = 0; k < 3; ++k) {
    auto mk = m;
    for (std::size_t i = 0; i < 3; ++i) mk[i][k] = rhs[i];
    x[k] = det3(mk) / d;
  }
  return x;
}

/// Parameters whose variance diagonal is realized by three chosen atoms.
/// Both ordinate relations are linear in the unknowns:
///   lambda^2 = a lambda + b nu - eA,   nu^2 = c lambda + d nu - fA.
/// The quartic's fourth root 2a - sum(lambda) receives weight zero.
struct Forward {
  DiagonalVFParams params;
  std::vector<Rational> weights;  // aligned with the sorted distinct real roots
  std::vector<Rational> abscissas;
};

inline std::optional<Forward> forward_model(const std::array<ExactPoint2, 3>& pts, const Rational& A,
                                            const std::array<Rational, 3>& w) {
  std::array<std::array<Rational, 3>, 3> m;
  std::array<Rational, 3> r1, r2;
  for (std::size_t i = 0; i < 3; ++i) {
    m[i] = {pts[i][0], pts[i][1], Rational(-1)};
    r1[i] = pts[i][0] * pts[i][0];
    r2[i] = pts[i][1] * pts[i][1];
  }
  auto s1 = solve3(m, r1);
  auto s2 = solve3(m, r2);
  if (!s1 || !s2) return std::nullopt;
  const auto& [a, b, eA] = *s1;
  const auto& [c, d, fA] = *s2;
  if (b == 0) return std::nullopt;
  Forward out{DiagonalVFParams::make(A, a, b, c, d, eA / A, fA / A), {}, {}};
  std::vector<std::pair<Rational, Rational>> roots;
  for (std::size_t i = 0; i < 3; ++i) roots.emplace_back(pts[i][0], w[i]);
  Rational fourth = 2 * a - pts[0][0] - pts[1][0] - pts[2][0];
  if (std::none_of(roots.begin(), roots.end(), [&](const auto& r) { return r.first == fourth; }))
    roots.emplace_back(fourth, Rational(0));
  std::sort(roots.begin(), roots.end());
  for (const auto& [x, wt] : roots) {
    out.abscissas.push_back(x);
    out.weights.push_back(wt);
  }
  return out;
}

inline Rational random_rational(std::mt19937_64& rng, int num_range, int max_den) {
  std::uniform_int_distribution<int> num(-num_range, num_range);
  std::uniform_int_distribution<int> den(1, max_den);
  return Rational(num(rng), den(rng));
}

/// Three random non-collinear rational atoms with distinct abscissas.
inline std::array<ExactPoint2, 3> random_atoms(std::mt19937_64& rng) {
  for (;;) {
    std::array<ExactPoint2, 3> p;
    for (auto& x : p) x = {random_rational(rng, 6, 3), random_rational(rng, 6, 3)};
    if (p[0][0] == p[1][0] || p[0][0] == p[2][0] || p[1][0] == p[2][0]) continue;
    Rational cross = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[1][1] - p[0][1]) * (p[2][0] - p[0][0]);
    if (cross != 0) return p;
  }
}

/// The solver sees exactly the constructed abscissas.
inline bool consistent(const Forward& f) {
  auto roots = nefdiag::solve_quartic(nefdiag::build_characteristic_quartic(f.params));
  auto real = roots.real_entries();
  if (real.size() != f.abscissas.size()) return false;
  for (std::size_t i = 0; i < real.size(); ++i)
    if (!real[i].exact || *real[i].exact != f.abscissas[i]) return false;
  return true;
}

/// Strictly positive rational weights summing to one.
inline std::array<Rational, 3> random_simplex(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> u(1, 9);
  int x = u(rng), y = u(rng), z = u(rng);
  int s = x + y + z;
  return {Rational(x, s), Rational(y, s), Rational(z, s)};
}

/// Admissible forward model with A = -1/N (CaseA) or its negated weights (CaseB, N even).
inline Forward random_admissible(std::mt19937_64& rng, int N, bool case_b = false) {
  for (;;) {
    auto w = random_simplex(rng);
    if (case_b)
      for (auto& x : w) x = -x;
    auto f = forward_model(random_atoms(rng), Rational(-1, N), w);
    if (f && consistent(*f)) return *f;
  }
}

}  // namespace testsupport
