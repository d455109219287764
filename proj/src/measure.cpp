#include "nefdiag/measure.hpp"

#include "nefdiag/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace nefdiag {

namespace {

double dot(const Point2& a, const Point2& b) { return a[0] * b[0] + a[1] * b[1]; }

double cross(const Point2& o, const Point2& a, const Point2& b) {
  return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

bool exact_collinear(const std::vector<ExactPoint2>& pts) {
  if (pts.size() <= 2) return true;
  const ExactPoint2& o = pts[0];
  std::size_t far = 1;
  while (far < pts.size() && pts[far] == o) ++far;
  if (far == pts.size()) return true;
  for (const ExactPoint2& p : pts) {
    Rational c = (pts[far][0] - o[0]) * (p[1] - o[1]) - (pts[far][1] - o[1]) * (p[0] - o[0]);
    if (c != 0) return false;
  }
  return true;
}

void compositions(int total, std::size_t parts, std::vector<int>& cur,
                  const std::function<void(const std::vector<int>&)>& visit) {
  if (cur.size() + 1 == parts) {
    cur.push_back(total);
    visit(cur);
    cur.pop_back();
    return;
  }
  for (int n = total; n >= 0; --n) {
    cur.push_back(n);
    compositions(total - n, parts, cur, visit);
    cur.pop_back();
  }
}

BigInt factorial(int n) {
  BigInt f = 1;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

Rational rational_pow(const Rational& x, int n) {
  Rational out = 1;
  for (int i = 0; i < n; ++i) out *= x;
  return out;
}

struct Flipped {
  std::vector<Point2> points;
  std::vector<double> weights;  // sign-normalized
};

// Nonzero-weight atoms, with weights negated when they sum below zero.
Flipped flipped_atoms(const CandidateModel& m) {
  Rational sum = std::accumulate(m.weights.begin(), m.weights.end(), Rational(0));
  double sign = sum < 0 ? -1.0 : 1.0;
  Flipped out;
  for (std::size_t i = 0; i < m.atoms.size(); ++i) {
    if (m.weights[i] == 0) continue;
    out.points.push_back({m.atoms[i].lambda, m.atoms[i].nu});
    out.weights.push_back(sign * to_double(m.weights[i]));
  }
  return out;
}

std::vector<Point2> convex_hull(std::vector<Point2> pts) {
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  std::vector<Point2> hull(2 * pts.size());
  std::size_t k = 0;
  for (const Point2& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    const Point2& p = pts[i];
    while (k >= t && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  hull.resize(k - 1);
  return hull;
}

}  // namespace

bool collinear(const std::vector<Point2>& pts, double tol) {
  if (pts.size() <= 2) return true;
  const Point2& o = pts[0];
  std::size_t far = 0;
  double best = 0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    double d = std::hypot(pts[i][0] - o[0], pts[i][1] - o[1]);
    if (d > best) { best = d; far = i; }
  }
  if (best == 0) return true;
  for (const Point2& p : pts)
    if (std::abs(cross(o, pts[far], p)) > tol * best * std::max(1.0, best)) return false;
  return true;
}

// --- FiniteMeasure ------------------------------------------------------------

double FiniteMeasure::laplace(const Point2& theta) const {
  double s = 0;
  for (std::size_t i = 0; i < support.size(); ++i) s += masses[i] * std::exp(dot(theta, support[i]));
  return s;
}

Point2 FiniteMeasure::mean() const {
  Point2 mu{0, 0};
  for (std::size_t i = 0; i < support.size(); ++i)
    for (int j = 0; j < 2; ++j) mu[j] += masses[i] * support[i][j];
  return mu;
}

Matrix2 FiniteMeasure::covariance() const {
  Point2 mu = mean();
  Matrix2 cov{{{0, 0}, {0, 0}}};
  for (std::size_t i = 0; i < support.size(); ++i)
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c)
        cov[r][c] += masses[i] * (support[i][r] - mu[r]) * (support[i][c] - mu[c]);
  return cov;
}

// --- realize_measure -------------------------------------------------------------

FiniteMeasure realize_measure(const CandidateModel& m, const AdmissibilityVerdict& verdict) {
  if (!verdict.accepted())
    throw Error(ErrorCode::NotAdmissible, "verdict rejected: " + verdict.reason_string());
  CandidateModel eff = drop_zero_weights(m);
  const int N = verdict.N;
  const std::size_t k = eff.size();
  const bool exact_points = std::all_of(eff.atoms.begin(), eff.atoms.end(),
                                        [](const Atom& a) { return a.is_exact(); });
  std::vector<Rational> alpha;
  for (const Rational& w : eff.weights) alpha.push_back(w < 0 ? Rational(-w) : w);
  const BigInt nfact = factorial(N);

  std::map<ExactPoint2, Rational> exact_acc;
  std::vector<Point2> float_pts;
  std::vector<Rational> float_mass;

  std::vector<int> cur;
  compositions(N, k, cur, [&](const std::vector<int>& n) {
    BigInt denom = 1;
    Rational mass = 1;
    for (std::size_t i = 0; i < k; ++i) {
      denom *= factorial(n[i]);
      mass *= rational_pow(alpha[i], n[i]);
    }
    mass *= Rational(nfact, denom);
    if (mass == 0) return;
    if (exact_points) {
      ExactPoint2 pt{Rational(0), Rational(0)};
      for (std::size_t i = 0; i < k; ++i) {
        pt[0] += n[i] * *eff.atoms[i].exact_lambda;
        pt[1] += n[i] * *eff.atoms[i].exact_nu;
      }
      exact_acc[pt] += mass;
    } else {
      Point2 pt{0, 0};
      for (std::size_t i = 0; i < k; ++i) {
        pt[0] += n[i] * eff.atoms[i].lambda;
        pt[1] += n[i] * eff.atoms[i].nu;
      }
      for (std::size_t j = 0; j < float_pts.size(); ++j) {
        if (std::abs(float_pts[j][0] - pt[0]) <= 1e-9 && std::abs(float_pts[j][1] - pt[1]) <= 1e-9) {
          float_mass[j] += mass;
          return;
        }
      }
      float_pts.push_back(pt);
      float_mass.push_back(mass);
    }
  });

  FiniteMeasure mu;
  std::vector<Rational> masses;
  if (exact_points) {
    std::vector<ExactPoint2> pts;
    for (const auto& [pt, mass] : exact_acc) {
      pts.push_back(pt);
      masses.push_back(mass);
      mu.support.push_back({to_double(pt[0]), to_double(pt[1])});
    }
    mu.degenerate = exact_collinear(pts);
    mu.exact_support = std::move(pts);
  } else {
    std::vector<std::size_t> order(float_pts.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return float_pts[i] < float_pts[j]; });
    for (std::size_t i : order) {
      mu.support.push_back(float_pts[i]);
      masses.push_back(float_mass[i]);
    }
    mu.degenerate = collinear(mu.support);
  }
  for (const Rational& q : masses) mu.masses.push_back(to_double(q));
  mu.exact_masses = std::move(masses);
  return mu;
}

// --- cumulant calculus ------------------------------------------------------------

CumulantValue cumulant_eval(const CandidateModel& m, const Point2& theta) {
  Flipped fl = flipped_atoms(m);
  if (fl.points.empty()) throw Error(ErrorCode::DomainViolation, "no contributing atoms");
  double shift = -std::numeric_limits<double>::infinity();
  for (const Point2& v : fl.points) shift = std::max(shift, dot(v, theta));
  std::vector<double> terms(fl.points.size());
  double s = 0;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    terms[i] = fl.weights[i] * std::exp(dot(fl.points[i], theta) - shift);
    s += terms[i];
  }
  if (!(s > 0)) throw Error(ErrorCode::DomainViolation, "mixture sum is not positive at theta");
  const double r = m.r();
  CumulantValue out;
  out.k = r * (shift + std::log(s));
  Point2 first{0, 0};
  Matrix2 second{{{0, 0}, {0, 0}}};
  for (std::size_t i = 0; i < terms.size(); ++i) {
    double p = terms[i] / s;
    const Point2& v = fl.points[i];
    for (int a = 0; a < 2; ++a) {
      first[a] += p * v[a];
      for (int b = 0; b < 2; ++b) second[a][b] += p * v[a] * v[b];
    }
  }
  for (int a = 0; a < 2; ++a) {
    out.mean[a] = r * first[a];
    for (int b = 0; b < 2; ++b) out.variance[a][b] = r * (second[a][b] - first[a] * first[b]);
  }
  out.variance[1][0] = out.variance[0][1];
  return out;
}

Point2 mean_to_theta(const CandidateModel& m, const Point2& target, const MeanToThetaOptions& opts) {
  Flipped fl = flipped_atoms(m);
  if (std::any_of(fl.weights.begin(), fl.weights.end(), [](double w) { return w < 0; }))
    throw Error(ErrorCode::DomainViolation, "mean map inversion needs weights of one sign");
  if (collinear(fl.points)) throw Error(ErrorCode::Degenerate, "atoms are collinear");

  const double r = m.r();
  std::vector<Point2> scaled;
  for (const Point2& p : fl.points) scaled.push_back({r * p[0], r * p[1]});
  std::vector<Point2> hull = convex_hull(scaled);
  double extent = 0;
  for (const Point2& p : hull) extent = std::max({extent, std::abs(p[0]), std::abs(p[1])});
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const Point2& a = hull[i];
    const Point2& b = hull[(i + 1) % hull.size()];
    double edge = std::hypot(b[0] - a[0], b[1] - a[1]);
    if (cross(a, b, target) <= 1e-12 * edge * std::max(1.0, extent))
      throw Error(ErrorCode::OutOfMeanDomain, "target is not interior to the domain of means");
  }

  Point2 theta{0, 0};
  auto residual = [&](const Point2& t, CumulantValue& cv) {
    cv = cumulant_eval(m, t);
    return Point2{cv.mean[0] - target[0], cv.mean[1] - target[1]};
  };
  CumulantValue cv;
  Point2 res = residual(theta, cv);
  double norm = std::hypot(res[0], res[1]);
  for (int iter = 0; iter < opts.max_iterations && norm > opts.tol; ++iter) {
    const Matrix2& v = cv.variance;
    double det = v[0][0] * v[1][1] - v[0][1] * v[1][0];
    if (det == 0) break;
    Point2 step{-(v[1][1] * res[0] - v[0][1] * res[1]) / det, -(-v[1][0] * res[0] + v[0][0] * res[1]) / det};
    double scale = 1.0;
    bool moved = false;
    for (int halving = 0; halving < 60; ++halving, scale *= 0.5) {
      Point2 trial{theta[0] + scale * step[0], theta[1] + scale * step[1]};
      CumulantValue tcv;
      Point2 tres = residual(trial, tcv);
      double tnorm = std::hypot(tres[0], tres[1]);
      if (tnorm < norm) {
        theta = trial;
        res = tres;
        norm = tnorm;
        cv = tcv;
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  if (!(norm <= opts.tol))
    throw Error(ErrorCode::NoConvergence, "mean inversion stalled at residual " + std::to_string(norm));
  return theta;
}

std::vector<Point2> theta_grid(int n, double lo, double hi) {
  std::vector<Point2> out;
  if (n <= 0) return out;
  auto at = [&](int i) { return n == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * i / (n - 1); };
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out.push_back({at(i), at(j)});
  return out;
}

DiagCheckReport diag_variance_check(const CandidateModel& m, const DiagonalVFParams& p,
                                    const std::vector<Point2>& thetas, double tol) {
  const double A = to_double(p.A), a = to_double(p.a), b = to_double(p.b), c = to_double(p.c),
               d = to_double(p.d), e = to_double(p.e), f = to_double(p.f);
  DiagCheckReport rep;
  rep.tolerance = tol;
  for (const Point2& theta : thetas) {
    DiagCheckPoint pt{theta, std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
    try {
      CumulantValue cv = cumulant_eval(m, theta);
      double m1 = cv.mean[0], m2 = cv.mean[1];
      pt.dev11 = std::abs(cv.variance[0][0] - (A * m1 * m1 + a * m1 + b * m2 + e));
      pt.dev22 = std::abs(cv.variance[1][1] - (A * m2 * m2 + c * m1 + d * m2 + f));
    } catch (const Error&) {
      // recorded as an infinite deviation
    }
    rep.max_deviation = std::max({rep.max_deviation, pt.dev11, pt.dev22});
    rep.points.push_back(pt);
  }
  rep.pass = !thetas.empty() && rep.max_deviation <= tol;
  return rep;
}

// --- regression identities ----------------------------------------------------

RegressionReport regression_check(const FiniteMeasure& mu, const DiagonalVFParams& p, double tol) {
  RegressionReport rep;
  rep.tolerance = tol;
  const std::size_t n = mu.size();
  if (mu.is_exact()) {
    rep.exact = true;
    struct Acc { Rational prob = 0, g1 = 0, g2 = 0; };
    std::map<ExactPoint2, Acc> groups;
    const auto& xs = *mu.exact_support;
    const auto& ws = *mu.exact_masses;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const ExactPoint2& x = xs[i];
        const ExactPoint2& y = xs[j];
        Rational w = ws[i] * ws[j];
        Acc& acc = groups[{x[0] + y[0], x[1] + y[1]}];
        acc.prob += w;
        acc.g1 += w * ((x[0] - y[0]) * (x[0] - y[0]) - 2 * p.A * x[0] * y[0]);
        acc.g2 += w * ((x[1] - y[1]) * (x[1] - y[1]) - 2 * p.A * x[1] * y[1]);
      }
    Rational worst = 0;
    for (const auto& [s, acc] : groups) {
      Rational d1 = acc.g1 / acc.prob - (p.a * s[0] + p.b * s[1] + 2 * p.e);
      Rational d2 = acc.g2 / acc.prob - (p.c * s[0] + p.d * s[1] + 2 * p.f);
      worst = std::max({worst, Rational(abs(d1)), Rational(abs(d2))});
    }
    rep.conditions = groups.size();
    rep.max_deviation = to_double(worst);
    rep.pass = worst <= rational_from_double(tol);
    return rep;
  }

  const double A = to_double(p.A), a = to_double(p.a), b = to_double(p.b), c = to_double(p.c),
               d = to_double(p.d), e = to_double(p.e), f = to_double(p.f);
  struct Acc { Point2 s{0, 0}; double prob = 0, g1 = 0, g2 = 0; };
  std::map<std::pair<long long, long long>, Acc> groups;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const Point2& x = mu.support[i];
      const Point2& y = mu.support[j];
      double w = mu.masses[i] * mu.masses[j];
      Point2 s{x[0] + y[0], x[1] + y[1]};
      Acc& acc = groups[{std::llround(s[0] * 1e9), std::llround(s[1] * 1e9)}];
      acc.s = s;
      acc.prob += w;
      acc.g1 += w * ((x[0] - y[0]) * (x[0] - y[0]) - 2 * A * x[0] * y[0]);
      acc.g2 += w * ((x[1] - y[1]) * (x[1] - y[1]) - 2 * A * x[1] * y[1]);
    }
  for (const auto& [key, acc] : groups) {
    double d1 = acc.g1 / acc.prob - (a * acc.s[0] + b * acc.s[1] + 2 * e);
    double d2 = acc.g2 / acc.prob - (c * acc.s[0] + d * acc.s[1] + 2 * f);
    rep.max_deviation = std::max({rep.max_deviation, std::abs(d1), std::abs(d2)});
  }
  rep.conditions = groups.size();
  rep.pass = rep.max_deviation <= tol;
  return rep;
}

FiniteMeasure tilt_member(const FiniteMeasure& mu, const Point2& theta) {
  FiniteMeasure out;
  out.support = mu.support;
  out.degenerate = mu.degenerate;
  double shift = -std::numeric_limits<double>::infinity();
  for (const Point2& x : mu.support) shift = std::max(shift, dot(theta, x));
  double total = 0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    out.masses.push_back(mu.masses[i] * std::exp(dot(theta, mu.support[i]) - shift));
    total += out.masses.back();
  }
  for (double& w : out.masses) w /= total;
  return out;
}

Matrix2 fd_hessian(const std::function<double(const Point2&)>& k, const Point2& theta, double h) {
  if (!(h > 0)) throw Error(ErrorCode::InvalidParams, "step must be positive");
  auto at = [&](double d1, double d2) { return k({theta[0] + d1, theta[1] + d2}); };
  const double k0 = k(theta);
  Matrix2 H;
  H[0][0] = (at(h, 0) - 2 * k0 + at(-h, 0)) / (h * h);
  H[1][1] = (at(0, h) - 2 * k0 + at(0, -h)) / (h * h);
  H[0][1] = H[1][0] = (at(h, h) - at(h, -h) - at(-h, h) + at(-h, -h)) / (4 * h * h);
  return H;
}

// Differences of k are taken as r log(sum_i p_i exp<v_i, delta>) with the
// tilted weights p_i at theta, through expm1/log1p. The increments are then
// O(h) in size instead of O(|k|), which keeps cancellation out of the quotient.
Matrix2 fd_hessian(const CandidateModel& m, const Point2& theta, double h) {
  cumulant_eval(m, theta);  // domain check
  Flipped fl = flipped_atoms(m);
  double shift = -std::numeric_limits<double>::infinity();
  for (const Point2& v : fl.points) shift = std::max(shift, dot(v, theta));
  std::vector<double> p(fl.points.size());
  double s = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = fl.weights[i] * std::exp(dot(fl.points[i], theta) - shift);
    s += p[i];
  }
  for (double& x : p) x /= s;
  const double r = m.r();
  auto increment = [&](const Point2& d) {
    double acc = 0;
    for (std::size_t i = 0; i < p.size(); ++i) acc += p[i] * std::expm1(dot(fl.points[i], d));
    return r * std::log1p(acc);
  };
  return fd_hessian(increment, {0, 0}, h);
}

}  // namespace nefdiag
