#include "nefdiag/series.hpp"

#include "nefdiag/errors.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>

namespace nefdiag {

namespace {

constexpr double kKeyQuantum = 1e-9;
constexpr double kNegativeFloor = 1e-12;

std::pair<long long, long long> quantize(const Point2& p) {
  return {std::llround(p[0] / kKeyQuantum), std::llround(p[1] / kKeyQuantum)};
}

// Cases of the lexicographic argument: compare the extreme atoms' weights.
int proof_case_for(const CandidateModel& m, double sign) {
  std::vector<std::size_t> idx(m.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) {
    return std::pair(m.atoms[i].lambda, m.atoms[i].nu) < std::pair(m.atoms[j].lambda, m.atoms[j].nu);
  });
  const double first = sign * to_double(m.weights[idx.front()]);
  const double last = sign * to_double(m.weights[idx.back()]);
  if (first > 0) return 1;
  if (last > 0) return 2;
  if (first == 0 && last == 0) return 4;
  return 3;
}

double dominance(const std::vector<Point2>& w, const std::vector<double>& beta, const Point2& theta) {
  double s = 0;
  for (std::size_t i = 0; i < w.size(); ++i) s += std::abs(beta[i]) * std::exp(w[i][0] * theta[0] + w[i][1] * theta[1]);
  return s;
}

std::optional<Point2> find_probe(const std::vector<Point2>& w, const std::vector<double>& beta) {
  if (dominance(w, beta, {0, 0}) < 1) return Point2{0, 0};
  constexpr int kAngles = 720;
  for (int k = 0; k < kAngles; ++k) {
    const double phi = 2 * M_PI * k / kAngles;
    const Point2 d{std::cos(phi), std::sin(phi)};
    bool separating = true;
    for (const Point2& wi : w) separating = separating && (wi[0] * d[0] + wi[1] * d[1] < 0);
    if (!separating) continue;
    for (double t = 1; t < 1e12; t *= 2) {
      Point2 theta{t * d[0], t * d[1]};
      if (dominance(w, beta, theta) < 1) return theta;
    }
  }
  return std::nullopt;
}

}  // namespace

double binomial_coefficient(double r, int k) {
  double c = 1;
  for (int j = 0; j < k; ++j) c *= (r - j) / (j + 1);
  return c;
}

double SeriesReport::coefficient_at(const Point2& p) const {
  for (const SeriesTerm& t : terms)
    if (std::abs(t.point[0] - p[0]) <= 1e-9 && std::abs(t.point[1] - p[1]) <= 1e-9) return t.coefficient;
  return 0;
}

SeriesReport expand_series(const CandidateModel& m, int depth) {
  if (depth < 0) throw Error(ErrorCode::InvalidParams, "negative depth");
  Rational total = std::accumulate(m.weights.begin(), m.weights.end(), Rational(0));
  const double sign = total < 0 ? -1.0 : 1.0;
  const double r = m.r();

  // Pivot: largest |w| among weights carrying the sign of the total.
  std::optional<std::size_t> pivot;
  for (std::size_t i = 0; i < m.size(); ++i) {
    double w = sign * to_double(m.weights[i]);
    if (w <= 0) continue;
    if (!pivot || w > sign * to_double(m.weights[*pivot])) pivot = i;
  }
  if (!pivot) throw Error(ErrorCode::NoDominantAtom, "no weight with the sign of the total");

  const Point2 vp{m.atoms[*pivot].lambda, m.atoms[*pivot].nu};
  const double wp = sign * to_double(m.weights[*pivot]);
  std::vector<Point2> w;
  std::vector<double> beta;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (i == *pivot || m.weights[i] == 0) continue;
    w.push_back({m.atoms[i].lambda - vp[0], m.atoms[i].nu - vp[1]});
    beta.push_back(sign * to_double(m.weights[i]) / wp);
  }

  SeriesReport rep;
  rep.depth = depth;
  rep.pivot = *pivot;
  rep.pivot_point = vp;
  rep.proof_case = proof_case_for(m, sign);
  auto probe = find_probe(w, beta);
  if (!probe) throw Error(ErrorCode::NoDominantAtom, "no probe point separates the pivot atom");
  rep.probe = *probe;

  struct Acc {
    Point2 point;
    double coefficient = 0;
    int order = 0;
    int contributions = 0;
  };
  std::map<std::pair<long long, long long>, Acc> acc;
  const double scale = std::pow(wp, r);
  const std::size_t k = w.size();
  std::vector<int> n(k, 0);
  bool collision = false;

  // Every multi-index n with |n| <= depth.
  std::function<void(std::size_t, int)> walk = [&](std::size_t i, int left) {
    if (i == k) {
      int order = depth - left;
      double c = scale * binomial_coefficient(r, order);
      double fact = 1;
      Point2 pt{r * vp[0], r * vp[1]};
      for (std::size_t j = 0; j < k; ++j) {
        for (int q = 2; q <= n[j]; ++q) fact *= q;
        c *= std::pow(beta[j], n[j]);
        pt[0] += n[j] * w[j][0];
        pt[1] += n[j] * w[j][1];
      }
      // The multinomial j!/prod n! times the binomial's 1/j! leaves falling(r, j)/prod n!.
      for (int q = 2; q <= order; ++q) c *= q;
      c /= fact;
      if (c == 0) return;
      Acc& a = acc[quantize(pt)];
      if (a.contributions == 0) {
        a.point = pt;
        a.order = order;
      } else {
        collision = true;
        a.order = std::min(a.order, order);
      }
      a.coefficient += c;
      ++a.contributions;
      return;
    }
    for (int q = 0; q <= left; ++q) {
      n[i] = q;
      walk(i + 1, left - q);
    }
    n[i] = 0;
  };
  walk(0, depth);

  for (const auto& [key, a] : acc) rep.terms.push_back({a.point, a.coefficient, a.order});
  std::sort(rep.terms.begin(), rep.terms.end(),
            [](const SeriesTerm& x, const SeriesTerm& y) { return x.point < y.point; });
  for (const SeriesTerm& t : rep.terms) {
    if (t.coefficient >= -kNegativeFloor) continue;
    if (!rep.first_negative || t.order < rep.first_negative->order) rep.first_negative = t;
  }
  const bool finite = std::abs(r - std::round(r)) < 1e-12 && r >= 0 && std::round(r) <= depth;
  rep.complete = finite || !collision;
  return rep;
}

std::optional<int> first_negative_coefficient(double alpha1, double alpha2, double r, int depth, double tol) {
  const double s = alpha1 + alpha2;
  if (std::abs(s - 1) > tol && std::abs(s + 1) > tol)
    throw Error(ErrorCode::NotNormalized, "weights must sum to 1 or -1");
  if (s < 0) {
    alpha1 = -alpha1;
    alpha2 = -alpha2;
  }
  if (!(alpha1 > 0)) throw Error(ErrorCode::InvalidParams, "leading weight must be positive");
  const double ratio = alpha2 / alpha1;
  for (int k = 1; k <= depth; ++k) {
    if (binomial_coefficient(r, k) * std::pow(ratio, k) < 0) return k;
  }
  return std::nullopt;
}

std::complex<double> EliminationForm::operator()(std::complex<double> theta) const {
  std::complex<double> out = 0;
  for (std::size_t i = polynomial.size(); i-- > 0;) out = out * theta + polynomial[i];
  for (const auto& [A, lambda] : exponentials) out += A * std::exp(lambda * theta);
  out += B * theta * std::exp(gamma * theta);
  for (const OscillatoryBlock& b : blocks) {
    out += std::exp(b.lambda * theta) *
           ((b.A0 + theta * b.B0) * std::cos(b.gamma * theta) + (b.A1 + theta * b.B1) * std::sin(b.gamma * theta));
  }
  return out;
}

void EliminationForm::validate() const {
  if (polynomial.empty() && exponentials.empty() && B == 0 && blocks.empty())
    throw Error(ErrorCode::InvalidForm, "form has no blocks");
}

std::optional<double> magnitude_scan(const EliminationForm& f, double r, const std::vector<double>& t_grid) {
  for (double t : t_grid) {
    double mag = std::pow(std::abs(f(std::complex<double>(0, t))), r);
    if (mag > 1 + 1e-6) return t;
  }
  return std::nullopt;
}

std::vector<double> linear_grid(double lo, double hi, int n) {
  std::vector<double> out;
  if (n <= 0) return out;
  if (n == 1) return {0.5 * (lo + hi)};
  for (int i = 0; i < n; ++i) out.push_back(lo + (hi - lo) * i / (n - 1));
  return out;
}

}  // namespace nefdiag
