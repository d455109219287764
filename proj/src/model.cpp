#include "nefdiag/model.hpp"

#include "nefdiag/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

namespace nefdiag {

std::vector<double> CandidateModel::weights_double() const {
  std::vector<double> w;
  w.reserve(weights.size());
  for (const Rational& x : weights) w.push_back(to_double(x));
  return w;
}

CandidateModel candidate_model(const DiagonalVFParams& p, const std::vector<Rational>& weights,
                               double tol) {
  return candidate_model(p, solve_quartic(build_characteristic_quartic(p), tol), weights, tol);
}

CandidateModel candidate_model(const DiagonalVFParams& p, const RootSet& roots,
                               const std::vector<Rational>& weights, double tol) {
  p.validate();
  std::vector<RootEntry> real = roots.real_entries();
  if (real.size() < 2)
    throw Error(ErrorCode::NRootDeficit,
                "characteristic quartic has " + std::to_string(real.size()) + " distinct real root(s)");
  if (weights.size() != real.size())
    throw Error(ErrorCode::WeightCountMismatch, "expected " + std::to_string(real.size()) +
                                                    " weights, got " + std::to_string(weights.size()));
  CandidateModel m;
  m.exponent = p.exponent();
  m.weights = weights;
  for (const RootEntry& r : real) {
    Atom atom;
    atom.lambda = r.value.real();
    if (r.exact) {
      auto [nu, residual] = dual_ordinate_exact(*r.exact, p);
      atom.exact_lambda = *r.exact;
      atom.exact_nu = nu;
      atom.nu = to_double(nu);
    } else {
      atom.nu = dual_ordinate(atom.lambda, p, tol).nu;
    }
    m.atoms.push_back(atom);
  }
  return m;
}

CandidateModel normalize_model(const CandidateModel& m) {
  if (m.atoms.empty()) return m;
  CandidateModel out = m;
  const Atom& first = m.atoms.front();
  for (std::size_t i = 0; i < m.atoms.size(); ++i) {
    const Atom& src = m.atoms[i];
    Atom& dst = out.atoms[i];
    dst.lambda = src.lambda - first.lambda;
    dst.nu = (src.lambda - first.lambda) * (src.lambda + first.lambda);
    if (src.exact_lambda && first.exact_lambda) {
      Rational x = *src.exact_lambda - *first.exact_lambda;
      Rational y = *src.exact_lambda * *src.exact_lambda - *first.exact_lambda * *first.exact_lambda;
      dst.lambda = to_double(x);
      dst.nu = to_double(y);
      dst.exact_lambda = x;
      dst.exact_nu = y;
    } else {
      dst.exact_lambda.reset();
      dst.exact_nu.reset();
    }
  }
  return out;
}

CandidateModel drop_zero_weights(const CandidateModel& m) {
  CandidateModel out;
  out.exponent = m.exponent;
  for (std::size_t i = 0; i < m.atoms.size(); ++i) {
    if (m.weights[i] == 0) continue;
    out.atoms.push_back(m.atoms[i]);
    out.weights.push_back(m.weights[i]);
  }
  return out;
}

// --- lattice ------------------------------------------------------------------

LatticeMatrix LatticeMatrix::from_doubles(const std::array<std::array<double, 3>, 3>& m) {
  LatticeMatrix out;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) out.rows[i][j] = rational_from_double(m[i][j]);
  return out;
}

namespace {

Rational exact_coord(const std::optional<Rational>& exact, double value) {
  return exact ? *exact : rational_from_double(value);
}

std::array<BigInt, 3> primitive(const std::array<Rational, 3>& v) {
  BigInt lcm = 1;
  for (const Rational& x : v) {
    BigInt den = denominator(x);
    lcm = lcm / boost::multiprecision::gcd(lcm, den) * den;
  }
  std::array<BigInt, 3> out;
  BigInt g = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    out[i] = numerator(v[i]) * (lcm / denominator(v[i]));
    g = boost::multiprecision::gcd(g, out[i]);
  }
  if (g > 1)
    for (BigInt& x : out) x /= g;
  return out;
}

bool mixed_sign(const std::array<BigInt, 3>& a) {
  bool pos = false, neg = false;
  for (const BigInt& x : a) {
    pos = pos || x > 0;
    neg = neg || x < 0;
  }
  return pos && neg;
}

// First nonzero coordinate positive.
std::array<BigInt, 3> canonical_sign(std::array<BigInt, 3> a) {
  for (const BigInt& x : a) {
    if (x == 0) continue;
    if (x < 0)
      for (BigInt& y : a) y = -y;
    break;
  }
  return a;
}

}  // namespace

LatticeMatrix build_lambda_matrix(const CandidateModel& m) {
  const std::size_t n = m.atoms.size();
  if (n != 3 && n != 4)
    throw Error(ErrorCode::UnsupportedArity,
                "lattice matrix needs 3 or 4 atoms, got " + std::to_string(n));
  const Atom& base = m.atoms.front();
  Rational x0 = exact_coord(base.exact_lambda, base.lambda);
  Rational y0 = exact_coord(base.exact_nu, base.nu);
  LatticeMatrix out;
  out.exact = std::all_of(m.atoms.begin(), m.atoms.end(), [](const Atom& a) { return a.is_exact(); });
  for (auto& row : out.rows) row = {Rational(0), Rational(0), Rational(0)};
  for (std::size_t i = 1; i < n; ++i) {
    const Atom& a = m.atoms[i];
    out.rows[i - 1][0] = exact_coord(a.exact_lambda, a.lambda) - x0;
    out.rows[i - 1][1] = exact_coord(a.exact_nu, a.nu) - y0;
  }
  return out;
}

std::string_view to_string(StarMethod m) {
  switch (m) {
    case StarMethod::ExactKernel: return "exact-kernel";
    case StarMethod::BoundedSearch: return "bounded-search";
    case StarMethod::NumericSearch: return "numeric-search";
  }
  return "unknown";
}

namespace {

StarReport numeric_star(const LatticeMatrix& lattice, int bound) {
  StarReport report;
  report.method = StarMethod::NumericSearch;
  report.bound = bound;
  Eigen::Matrix3d L;
  double scale = 0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      L(i, j) = to_double(lattice.rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
      scale = std::max(scale, std::abs(L(i, j)));
    }
  constexpr double kRel = 1e-9;
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(L);
  int rank = 0;
  for (int i = 0; i < 3; ++i) rank += svd.singularValues()(i) > kRel * std::max(scale, 1e-300) ? 1 : 0;
  report.kernel_dimension = 3 - rank;
  if (report.kernel_dimension == 0) return report;

  // Smallest max-norm mixed-sign relation, lexicographic among equals.
  std::optional<std::array<int, 4>> best;
  for (int a0 = -bound; a0 <= bound; ++a0)
    for (int a1 = -bound; a1 <= bound; ++a1)
      for (int a2 = -bound; a2 <= bound; ++a2) {
        if (!((a0 > 0 || a1 > 0 || a2 > 0) && (a0 < 0 || a1 < 0 || a2 < 0))) continue;
        const int norm = std::max({std::abs(a0), std::abs(a1), std::abs(a2)});
        if (best && norm > (*best)[0]) continue;
        Eigen::RowVector3d a(a0, a1, a2);
        double res = (a * L).cwiseAbs().maxCoeff();
        if (res > kRel * (std::abs(a0) + std::abs(a1) + std::abs(a2)) * scale) continue;
        std::array<int, 4> key{norm, a0, a1, a2};
        if (!best || key < *best) best = key;
      }
  if (best) {
    report.holds = false;
    report.witness = canonical_sign({BigInt((*best)[1]), BigInt((*best)[2]), BigInt((*best)[3])});
  }
  return report;
}

}  // namespace

std::vector<std::array<BigInt, 3>> left_kernel_basis(const LatticeMatrix& lattice) {
  // a^T L = 0  <=>  L^T a = 0; reduce L^T to row echelon form.
  std::array<std::array<Rational, 3>, 3> t;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) t[i][j] = lattice.rows[j][i];

  std::array<int, 3> pivot_of_row{-1, -1, -1};
  std::array<bool, 3> is_pivot{false, false, false};
  std::size_t row = 0;
  for (std::size_t col = 0; col < 3 && row < 3; ++col) {
    std::size_t sel = row;
    while (sel < 3 && t[sel][col] == 0) ++sel;
    if (sel == 3) continue;
    std::swap(t[sel], t[row]);
    Rational inv = Rational(1) / t[row][col];
    for (auto& x : t[row]) x *= inv;
    for (std::size_t r = 0; r < 3; ++r) {
      if (r == row || t[r][col] == 0) continue;
      Rational factor = t[r][col];
      for (std::size_t j = 0; j < 3; ++j) t[r][j] -= factor * t[row][j];
    }
    pivot_of_row[row] = static_cast<int>(col);
    is_pivot[col] = true;
    ++row;
  }

  std::vector<std::array<BigInt, 3>> basis;
  for (std::size_t free = 0; free < 3; ++free) {
    if (is_pivot[free]) continue;
    std::array<Rational, 3> v{Rational(0), Rational(0), Rational(0)};
    v[free] = 1;
    for (std::size_t r = 0; r < 3; ++r)
      if (pivot_of_row[r] >= 0) v[static_cast<std::size_t>(pivot_of_row[r])] = -t[r][free];
    basis.push_back(primitive(v));
  }
  return basis;
}

StarReport star_condition(const LatticeMatrix& lattice, int bound) {
  if (!lattice.exact) return numeric_star(lattice, bound);
  StarReport report;
  auto basis = left_kernel_basis(lattice);
  report.kernel_dimension = static_cast<int>(basis.size());
  if (basis.empty()) return report;
  if (basis.size() == 1) {
    // Integer points of the kernel line are exactly the multiples of the
    // primitive generator.
    if (mixed_sign(basis[0])) {
      report.holds = false;
      report.witness = canonical_sign(basis[0]);
    }
    return report;
  }

  report.method = StarMethod::BoundedSearch;
  report.bound = bound;
  const std::size_t dim = basis.size();
  std::vector<int> coef(dim, 0);
  // Shells of increasing L1 norm, lexicographic within a shell.
  std::function<bool(std::size_t, int)> search = [&](std::size_t idx, int remaining) -> bool {
    if (idx == dim - 1) {
      for (int s : {-1, 1}) {
        int c = s * remaining;
        if (std::abs(c) > bound || (remaining == 0 && s == 1)) continue;
        coef[idx] = c;
        std::array<BigInt, 3> v{0, 0, 0};
        for (std::size_t k = 0; k < dim; ++k)
          for (std::size_t j = 0; j < 3; ++j) v[j] += coef[k] * basis[k][j];
        if (mixed_sign(v)) {
          report.holds = false;
          report.witness = canonical_sign(v);
          return true;
        }
      }
      return false;
    }
    for (int c = -std::min(bound, remaining); c <= std::min(bound, remaining); ++c) {
      coef[idx] = c;
      if (search(idx + 1, remaining - std::abs(c))) return true;
    }
    return false;
  };
  for (int total = 1; total <= bound * static_cast<int>(dim); ++total)
    if (search(0, total)) break;
  return report;
}

// --- verdict ------------------------------------------------------------------

std::string_view to_string(VerdictCase c) {
  switch (c) {
    case VerdictCase::CaseA: return "CaseA";
    case VerdictCase::CaseB: return "CaseB";
    case VerdictCase::Rejected: return "Rejected";
  }
  return "Unknown";
}

std::string_view reason_text(RejectReason r) {
  switch (r) {
    case RejectReason::None: return "";
    case RejectReason::NoContributingAtoms: return "no atom carries a nonzero weight";
    case RejectReason::PointMass: return "measure concentrated in a point";
    case RejectReason::MixedSigns: return "weights have mixed signs";
    case RejectReason::NotNormalized: return "weights do not sum to 1 or -1";
    case RejectReason::ExponentNotInteger: return "exponent not a positive integer";
    case RejectReason::ExponentNotEvenInteger: return "exponent not an even positive integer";
  }
  return "";
}

AdmissibilityVerdict admissibility_verdict(const CandidateModel& m, const VerdictOptions& opts) {
  // Sort by abscissa so that the verdict does not depend on atom order.
  std::vector<std::size_t> order(m.atoms.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t i, std::size_t j) { return m.atoms[i].lambda < m.atoms[j].lambda; });
  CandidateModel sorted;
  sorted.exponent = m.exponent;
  for (std::size_t i : order) {
    sorted.atoms.push_back(m.atoms[i]);
    sorted.weights.push_back(m.weights[i]);
  }
  CandidateModel eff = drop_zero_weights(sorted);

  AdmissibilityVerdict v;
  v.contributing_atoms = static_cast<int>(eff.size());
  v.one_dimensional = eff.size() == 2;

  auto reject = [&](RejectReason why) {
    v.outcome = VerdictCase::Rejected;
    v.reason = why;
  };

  if (eff.size() >= 3 && eff.size() <= 4)
    v.star = star_condition(build_lambda_matrix(normalize_model(eff)), opts.star_bound);

  const bool any_pos = std::any_of(eff.weights.begin(), eff.weights.end(), [](const Rational& w) { return w > 0; });
  const bool any_neg = std::any_of(eff.weights.begin(), eff.weights.end(), [](const Rational& w) { return w < 0; });
  const double sum = to_double(std::accumulate(eff.weights.begin(), eff.weights.end(), Rational(0)));
  const double r = to_double(m.exponent);
  const double nearest = std::round(r);
  const bool integral = nearest >= 1 && std::abs(r - nearest) <= opts.integrality_tol;

  if (eff.size() == 0) {
    reject(RejectReason::NoContributingAtoms);
  } else if (eff.size() == 1) {
    reject(RejectReason::PointMass);
  } else if (any_pos && any_neg) {
    reject(RejectReason::MixedSigns);
  } else if (any_pos) {
    if (std::abs(sum - 1.0) > opts.tol) {
      reject(RejectReason::NotNormalized);
    } else if (!integral) {
      reject(RejectReason::ExponentNotInteger);
    } else {
      v.outcome = VerdictCase::CaseA;
      v.N = static_cast<int>(nearest);
    }
  } else {
    if (std::abs(sum + 1.0) > opts.tol) {
      reject(RejectReason::NotNormalized);
    } else if (!integral || static_cast<long long>(nearest) % 2 != 0) {
      reject(RejectReason::ExponentNotEvenInteger);
    } else {
      v.outcome = VerdictCase::CaseB;
      v.N = static_cast<int>(nearest);
    }
  }

  if (v.accepted()) v.theta_full_plane = true;
  // A failed lattice condition leaves necessity unproven, so only rejections
  // become inconclusive; accepted cases are realized explicitly downstream.
  if (!v.accepted() && v.star && !v.star->holds) v.inconclusive = true;
  return v;
}

}  // namespace nefdiag
