#include "nefdiag/roots.hpp"

#include "nefdiag/errors.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

namespace nefdiag {

namespace {

constexpr double kBinomial[5][5] = {
    {1, 0, 0, 0, 0}, {1, 1, 0, 0, 0}, {1, 2, 1, 0, 0}, {1, 3, 3, 1, 0}, {1, 4, 6, 4, 1}};

Rational exact_taylor(const std::array<Rational, 5>& c, const Rational& x, int j) {
  Rational acc = 0;
  for (int k = 4; k >= j; --k) acc = acc * x + c[k] * static_cast<long>(kBinomial[k][j]);
  return acc;
}

std::array<double, 5> to_doubles(const std::array<Rational, 5>& c) {
  std::array<double, 5> out{};
  for (std::size_t i = 0; i < 5; ++i) out[i] = to_double(c[i]);
  return out;
}

}  // namespace

// --- DiagonalVFParams -------------------------------------------------------

DiagonalVFParams DiagonalVFParams::make(Rational A, Rational a, Rational b, Rational c,
                                        Rational d, Rational e, Rational f) {
  DiagonalVFParams p{std::move(A), std::move(a), std::move(b), std::move(c),
                     std::move(d), std::move(e), std::move(f)};
  p.validate();
  return p;
}

DiagonalVFParams DiagonalVFParams::from_doubles(double A, double a, double b, double c,
                                                double d, double e, double f) {
  return make(rational_from_double(A), rational_from_double(a), rational_from_double(b),
              rational_from_double(c), rational_from_double(d), rational_from_double(e),
              rational_from_double(f));
}

void DiagonalVFParams::validate() const {
  if (!(A < 0)) throw Error(ErrorCode::InvalidParams, "A must be strictly negative");
  if (b == 0) throw Error(ErrorCode::InvalidParams, "b must be nonzero");
}

// --- Quartic -----------------------------------------------------------------

Quartic Quartic::from_coefficients(const std::array<double, 5>& ascending) {
  if (ascending[4] == 0.0) throw Error(ErrorCode::InvalidParams, "leading coefficient is zero");
  Quartic q;
  for (std::size_t i = 0; i < 5; ++i) q.coeffs[i] = ascending[i] / ascending[4];
  q.coeffs[4] = 1.0;
  return q;
}

Quartic Quartic::from_exact(const std::array<Rational, 5>& ascending) {
  if (ascending[4] == 0) throw Error(ErrorCode::InvalidParams, "leading coefficient is zero");
  std::array<Rational, 5> monic;
  for (std::size_t i = 0; i < 5; ++i) monic[i] = ascending[i] / ascending[4];
  Quartic q;
  q.coeffs = to_doubles(monic);
  q.exact = monic;
  return q;
}

std::complex<double> Quartic::eval(std::complex<double> z) const { return taylor(z, 0); }

double Quartic::eval(double x) const {
  double acc = 0;
  for (int k = 4; k >= 0; --k) acc = acc * x + coeffs[k];
  return acc;
}

std::complex<double> Quartic::taylor(std::complex<double> z, int j) const {
  std::complex<double> acc = 0;
  for (int k = 4; k >= j; --k) acc = acc * z + coeffs[k] * kBinomial[k][j];
  return acc;
}

double Quartic::coefficient_norm() const {
  double s = 0;
  for (double c : coeffs) s += std::abs(c);
  return s;
}

double Quartic::scale() const {
  double m = 0;
  for (int i = 0; i < 4; ++i) m = std::max(m, std::abs(coeffs[i]));
  return 1.0 + m;
}

Quartic build_characteristic_quartic(const DiagonalVFParams& p) {
  const auto& [A, a, b, c, d, e, f] = p;
  std::array<Rational, 5> k;
  k[4] = 1;
  k[3] = -2 * a;
  k[2] = 2 * A * e + a * a - d * b;
  k[1] = -(2 * A * a * e - a * d * b + c * b * b);
  k[0] = A * A * e * e - e * d * b * A + f * b * b * A;
  return Quartic::from_exact(k);
}

Quartic build_dual_quartic(const DiagonalVFParams& p) {
  const auto& [A, a, b, c, d, e, f] = p;
  std::array<Rational, 5> k;
  k[4] = 1;
  k[3] = -2 * d;
  k[2] = 2 * A * f - a * c + d * d;
  k[1] = -(b * c * c - a * c * d + 2 * d * f * A);
  k[0] = A * A * f * f - a * c * f * A + e * c * c * A;
  return Quartic::from_exact(k);
}

// --- solve_quartic -------------------------------------------------------------

namespace {

using Partition = std::array<int, 4>;

std::vector<Partition> all_partitions() {
  // Restricted growth strings: label[0] = 0, label[i] <= max(label[<i]) + 1.
  std::vector<Partition> out;
  Partition p{0, 0, 0, 0};
  for (int b = 0; b <= 1; ++b)
    for (int c = 0; c <= std::max(b, 0) + 1; ++c)
      for (int d = 0; d <= std::max({b, c}) + 1; ++d) {
        p = {0, b, c, d};
        out.push_back(p);
      }
  return out;
}

struct Block {
  std::vector<int> members;
  std::complex<double> centroid;
  double worst = 0;  // largest normalized derivative residual
  std::array<std::complex<double>, 4> eigs{};
};

// A block of m eigenvalues is an m-fold root when q, q', ..., q^(m-1) all
// vanish at the centroid up to a relative perturbation of the coefficients.
bool accept_block(const Quartic& q, Block& blk, double tol) {
  const int m = static_cast<int>(blk.members.size());
  const double norm = q.coefficient_norm();
  const double mag = std::max(1.0, std::abs(blk.centroid));
  blk.worst = 0;
  for (int j = 0; j < m; ++j) {
    double bound = tol * norm * std::pow(mag, 4 - j);
    double val = std::abs(q.taylor(blk.centroid, j));
    blk.worst = std::max(blk.worst, val / bound);
    if (val > bound) return false;
  }
  // The centroid of distinct roots can itself be a root; members must also lie
  // within the splitting radius of an m-fold root under the same perturbation.
  const double lead = std::abs(q.taylor(blk.centroid, m));
  if (lead > 0) {
    const double radius = 10 * std::pow(tol * norm * std::pow(mag, 4) / lead, 1.0 / m);
    for (int i : blk.members)
      if (std::abs(blk.eigs[static_cast<std::size_t>(i)] - blk.centroid) > radius) return false;
  }
  return true;
}

std::complex<double> polish(const Quartic& q, std::complex<double> z, int m, bool real) {
  auto g = [&](std::complex<double> w) { return q.taylor(w, m - 1); };
  auto dg = [&](std::complex<double> w) { return static_cast<double>(m) * q.taylor(w, m); };
  if (real) z = {z.real(), 0.0};
  double gz = std::abs(g(z));
  for (int iter = 0; iter < 60 && gz > 0; ++iter) {
    std::complex<double> slope = dg(z);
    if (slope == 0.0) break;
    std::complex<double> step = g(z) / slope;
    if (real) step = {step.real(), 0.0};
    std::complex<double> next = z - step;
    double gn = std::abs(g(next));
    if (!(gn < gz)) break;
    z = next;
    gz = gn;
    if (std::abs(step) <= 4 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(z))) break;
  }
  return z;
}

bool root_less(const RootEntry& x, const RootEntry& y) {
  if (x.is_real() != y.is_real()) return x.is_real();
  if (x.value.real() != y.value.real()) return x.value.real() < y.value.real();
  return x.value.imag() < y.value.imag();
}

}  // namespace

RootSet solve_quartic(const Quartic& q, double tol) {
  if (!(tol > 0)) throw Error(ErrorCode::InvalidParams, "tolerance must be positive");
  const double snap = tol * q.scale();

  Eigen::Matrix4d companion = Eigen::Matrix4d::Zero();
  for (int i = 0; i < 3; ++i) companion(i + 1, i) = 1.0;
  for (int i = 0; i < 4; ++i) companion(i, 3) = -q.coeffs[i];
  Eigen::EigenSolver<Eigen::Matrix4d> solver(companion, false);
  std::array<std::complex<double>, 4> eig;
  for (int i = 0; i < 4; ++i) eig[i] = solver.eigenvalues()[i];

  std::vector<Block> best;
  double best_score = std::numeric_limits<double>::infinity();
  std::size_t best_count = 5;
  for (const Partition& part : all_partitions()) {
    int nblocks = *std::max_element(part.begin(), part.end()) + 1;
    std::vector<Block> blocks(static_cast<std::size_t>(nblocks));
    for (int i = 0; i < 4; ++i) blocks[static_cast<std::size_t>(part[i])].members.push_back(i);
    bool ok = true;
    double score = 0;
    for (Block& blk : blocks) {
      blk.eigs = eig;
      std::complex<double> sum = 0;
      for (int i : blk.members) sum += eig[static_cast<std::size_t>(i)];
      blk.centroid = sum / static_cast<double>(blk.members.size());
      // Singletons are eigenvalues and need no certificate.
      if (blk.members.size() > 1 && !accept_block(q, blk, tol)) { ok = false; break; }
      score += blk.worst;
    }
    if (!ok) continue;
    // Off-axis blocks must come in conjugate pairs of equal size.
    for (const Block& blk : blocks) {
      if (std::abs(blk.centroid.imag()) <= snap) continue;
      bool paired = std::any_of(blocks.begin(), blocks.end(), [&](const Block& other) {
        return &other != &blk && other.members.size() == blk.members.size() &&
               std::abs(other.centroid - std::conj(blk.centroid)) <= 1e-6 * (1 + std::abs(blk.centroid));
      });
      if (!paired) { ok = false; break; }
    }
    if (!ok) continue;
    if (blocks.size() < best_count || (blocks.size() == best_count && score < best_score)) {
      best = blocks;
      best_count = blocks.size();
      best_score = score;
    }
  }

  RootSet out;
  for (const Block& blk : best) {
    const int m = static_cast<int>(blk.members.size());
    const bool real = std::abs(blk.centroid.imag()) <= snap;
    if (!real && blk.centroid.imag() < 0) continue;  // emitted with its partner
    std::complex<double> z = polish(q, blk.centroid, m, real);
    if (real) {
      out.entries.push_back({{z.real(), 0.0}, m, std::nullopt});
    } else if (std::abs(z.imag()) <= snap) {
      out.entries.push_back({{z.real(), 0.0}, 2 * m, std::nullopt});
    } else {
      out.entries.push_back({z, m, std::nullopt});
      out.entries.push_back({std::conj(z), m, std::nullopt});
    }
  }

  if (q.exact) {
    for (RootEntry& r : out.entries) {
      if (!r.is_real()) continue;
      double x = r.value.real();
      auto guess = approximate_rational(x, 1'000'000);
      if (!guess || std::abs(to_double(*guess) - x) > 1e-6 * std::max(1.0, std::abs(x))) continue;
      bool exact_root = true;
      for (int j = 0; j < r.multiplicity && exact_root; ++j)
        exact_root = exact_taylor(*q.exact, *guess, j) == 0;
      if (exact_root) {
        r.exact = *guess;
        r.value = {to_double(*guess), 0.0};
      }
    }
  }

  std::sort(out.entries.begin(), out.entries.end(), root_less);
  out.n_r = static_cast<int>(std::count_if(out.entries.begin(), out.entries.end(),
                                           [](const RootEntry& r) { return r.is_real(); }));
  return out;
}

std::vector<double> RootSet::distinct_real() const {
  std::vector<double> xs;
  for (const RootEntry& r : entries)
    if (r.is_real()) xs.push_back(r.value.real());
  return xs;
}

std::vector<RootEntry> RootSet::real_entries() const {
  std::vector<RootEntry> xs;
  for (const RootEntry& r : entries)
    if (r.is_real()) xs.push_back(r);
  return xs;
}

// --- classification ----------------------------------------------------------

std::string_view to_string(RootPattern p) {
  switch (p) {
    case RootPattern::FourSingleReal: return "FourSingleReal";
    case RootPattern::DoublePlusTwoSingleReal: return "DoublePlusTwoSingleReal";
    case RootPattern::SinglePlusTripleReal: return "SinglePlusTripleReal";
    case RootPattern::QuadrupleReal: return "QuadrupleReal";
    case RootPattern::TwoDoubleReal: return "TwoDoubleReal";
    case RootPattern::TwoRealTwoComplex: return "TwoRealTwoComplex";
    case RootPattern::FourComplex: return "FourComplex";
    case RootPattern::TwoDoubleComplex: return "TwoDoubleComplex";
    case RootPattern::DoubleRealPlusComplexPair: return "DoubleRealPlusComplexPair";
  }
  return "Unknown";
}

std::optional<RootPattern> root_pattern_from_string(std::string_view s) {
  for (int i = 0; i <= static_cast<int>(RootPattern::DoubleRealPlusComplexPair); ++i) {
    auto p = static_cast<RootPattern>(i);
    if (to_string(p) == s) return p;
  }
  return std::nullopt;
}

RootPattern classify_root_pattern(const RootSet& r) {
  std::vector<int> real_mults;
  std::vector<int> pair_mults;
  for (const RootEntry& e : r.entries) {
    if (e.is_real())
      real_mults.push_back(e.multiplicity);
    else if (e.value.imag() > 0)
      pair_mults.push_back(e.multiplicity);
  }
  std::sort(real_mults.rbegin(), real_mults.rend());
  using V = std::vector<int>;
  if (pair_mults.empty()) {
    if (real_mults == V{1, 1, 1, 1}) return RootPattern::FourSingleReal;
    if (real_mults == V{2, 1, 1}) return RootPattern::DoublePlusTwoSingleReal;
    if (real_mults == V{3, 1}) return RootPattern::SinglePlusTripleReal;
    if (real_mults == V{4}) return RootPattern::QuadrupleReal;
    if (real_mults == V{2, 2}) return RootPattern::TwoDoubleReal;
  } else if (pair_mults.size() == 1 && pair_mults[0] == 1) {
    if (real_mults == V{1, 1}) return RootPattern::TwoRealTwoComplex;
    if (real_mults == V{2}) return RootPattern::DoubleRealPlusComplexPair;
  } else if (real_mults.empty()) {
    if (pair_mults == V{1, 1}) return RootPattern::FourComplex;
    if (pair_mults == V{2}) return RootPattern::TwoDoubleComplex;
  }
  throw Error(ErrorCode::InvalidParams, "root multiplicities do not describe a real quartic");
}

// --- dual ordinate -----------------------------------------------------------

DualOrdinate dual_ordinate(double lambda, const DiagonalVFParams& p, double tol) {
  Quartic q = build_characteristic_quartic(p);
  double bound = tol * q.coefficient_norm() * std::pow(std::max(1.0, std::abs(lambda)), 4);
  if (std::abs(q.eval(lambda)) > bound)
    throw Error(ErrorCode::NonRoot, "lambda is not a root of the characteristic quartic");
  const double A = to_double(p.A), a = to_double(p.a), b = to_double(p.b), c = to_double(p.c),
               d = to_double(p.d), e = to_double(p.e), f = to_double(p.f);
  double nu = (lambda * lambda - a * lambda + e * A) / b;
  double residual = nu * nu - c * lambda - d * nu + f * A;
  return {nu, residual};
}

std::pair<Rational, Rational> dual_ordinate_exact(const Rational& lambda, const DiagonalVFParams& p) {
  Rational nu = (lambda * lambda - p.a * lambda + p.e * p.A) / p.b;
  Rational residual = nu * nu - p.c * lambda - p.d * nu + p.f * p.A;
  return {nu, residual};
}

}  // namespace nefdiag
