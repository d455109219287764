#include "nefdiag/pipeline.hpp"

#include "nefdiag/errors.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

namespace nefdiag {

namespace {

constexpr const char* kParamNames[7] = {"A", "a", "b", "c", "d", "e", "f"};

Json number_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

double number_from(const Json& j) {
  if (j.is_null()) return std::numeric_limits<double>::infinity();
  return j.get<double>();
}

const Json& require(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw Error(ErrorCode::ParseError, std::string("missing key '") + key + "'");
  return j.at(key);
}

Json check_to_json(const std::optional<CheckRecord>& c) {
  if (!c) return nullptr;
  return {{"max_dev", number_or_null(c->max_dev)}, {"pass", c->pass}};
}

std::optional<CheckRecord> check_from_json(const Json& j) {
  if (j.is_null()) return std::nullopt;
  return CheckRecord{number_from(j.at("max_dev")), j.at("pass").get<bool>()};
}

Json term_to_json(const SeriesTerm& t) {
  return {{"point", {t.point[0], t.point[1]}}, {"coefficient", t.coefficient}, {"order", t.order}};
}

SeriesTerm term_from_json(const Json& j) {
  SeriesTerm t;
  t.point = {j.at("point").at(0).get<double>(), j.at("point").at(1).get<double>()};
  t.coefficient = j.at("coefficient").get<double>();
  t.order = j.at("order").get<int>();
  return t;
}

std::vector<std::vector<Rational>> positive_grid(int n, std::size_t parts) {
  std::vector<std::vector<Rational>> out;
  std::vector<int> cur;
  std::function<void(int, std::size_t)> walk = [&](int left, std::size_t slots) {
    if (slots == 1) {
      cur.push_back(left);
      std::vector<Rational> w;
      for (int k : cur) w.emplace_back(k, n);
      out.push_back(std::move(w));
      cur.pop_back();
      return;
    }
    for (int k = 1; k <= left - static_cast<int>(slots) + 1; ++k) {
      cur.push_back(k);
      walk(left - k, slots - 1);
      cur.pop_back();
    }
  };
  if (parts > 0 && n >= static_cast<int>(parts)) walk(n, parts);
  return out;
}

PipelineReport characterize_with(const DiagonalVFParams& p, const RootSet& roots,
                                 const std::vector<Rational>& weights, const PipelineOptions& opts,
                                 PipelineReport rep) {
  for (const Rational& w : weights) rep.weights.push_back(format_rational(w));
  CandidateModel m = candidate_model(p, roots, weights, opts.tol);
  for (const Atom& a : m.atoms) rep.atoms.push_back({a.lambda, a.nu});

  VerdictOptions vo;
  vo.tol = opts.tol;
  vo.star_bound = opts.bound;
  AdmissibilityVerdict v = admissibility_verdict(m, vo);
  rep.verdict = {std::string(to_string(v.outcome)), v.N, v.reason_string(), v.inconclusive};
  if (v.star) {
    StarRecord s{v.star->holds, std::nullopt, std::string(to_string(v.star->method))};
    if (v.star->witness) {
      s.witness.emplace();
      for (const BigInt& x : *v.star->witness) s.witness->push_back(x.str());
    }
    rep.star = s;
  }
  if (!v.accepted()) {
    rep.status = v.inconclusive ? OverallStatus::Inconclusive : OverallStatus::Rejected;
    return rep;
  }

  FiniteMeasure mu = realize_measure(m, v);
  DiagCheckReport dc = diag_variance_check(m, p, theta_grid(opts.grid), opts.tol);
  rep.diag_check = CheckRecord{dc.max_deviation, dc.pass};
  RegressionReport rc = regression_check(mu, p, opts.tol);
  rep.regression = CheckRecord{rc.max_deviation, rc.pass};
  try {
    SeriesReport sr = expand_series(normalize_model(m), opts.depth);
    rep.series = SeriesRecord{sr.depth, sr.first_negative, sr.complete, sr.proof_case};
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NoDominantAtom) throw;
  }
  if (dc.pass && rc.pass)
    rep.status = mu.degenerate ? OverallStatus::DegenerateAdmissible : OverallStatus::Admissible;
  else
    rep.status = OverallStatus::Rejected;
  return rep;
}

}  // namespace

// --- parsing -------------------------------------------------------------------

Rational json_rational(const Json& j) {
  if (j.is_number_integer()) return j.is_number_unsigned() ? Rational(j.get<unsigned long long>())
                                                           : Rational(j.get<long long>());
  if (j.is_number_float()) return rational_from_decimal_double(j.get<double>());
  if (j.is_string()) return parse_rational(j.get<std::string>());
  throw Error(ErrorCode::ParseError, "expected a number, got " + j.dump());
}

double json_double(const Json& j) {
  if (j.is_number()) return j.get<double>();
  return to_double(json_rational(j));
}

DiagonalVFParams parse_params(const Json& j) {
  std::array<Rational, 7> v;
  if (j.is_array()) {
    if (j.size() != 7) throw Error(ErrorCode::ParseError, "params array must have 7 entries");
    for (std::size_t i = 0; i < 7; ++i) v[i] = json_rational(j[i]);
  } else if (j.is_object()) {
    for (std::size_t i = 0; i < 7; ++i) v[i] = json_rational(require(j, kParamNames[i]));
  } else {
    throw Error(ErrorCode::ParseError, "params must be an object or an array");
  }
  return DiagonalVFParams::make(v[0], v[1], v[2], v[3], v[4], v[5], v[6]);
}

PipelineConfig PipelineConfig::from_json(const Json& j) {
  if (!j.is_object()) throw Error(ErrorCode::ParseError, "config must be an object");
  PipelineConfig c{parse_params(require(j, "params")), std::nullopt, std::nullopt};
  if (j.contains("weights")) {
    const Json& w = j.at("weights");
    if (!w.is_array()) throw Error(ErrorCode::ParseError, "weights must be an array");
    c.weights.emplace();
    for (const Json& x : w) c.weights->push_back(json_rational(x));
  }
  if (j.contains("weight_grid")) {
    const Json& g = j.at("weight_grid");
    if (!g.is_number_integer() || g.get<long long>() < 1)
      throw Error(ErrorCode::ParseError, "weight_grid must be a positive integer");
    c.weight_grid = g.get<int>();
  }
  if (!c.weights && !c.weight_grid) throw Error(ErrorCode::ParseError, "config needs weights or weight_grid");
  return c;
}

// --- pipeline -----------------------------------------------------------------

std::string_view to_string(OverallStatus s) {
  switch (s) {
    case OverallStatus::Admissible: return "Admissible";
    case OverallStatus::Rejected: return "Rejected";
    case OverallStatus::Inconclusive: return "Inconclusive";
    case OverallStatus::DegenerateAdmissible: return "Degenerate-Admissible";
  }
  return "Rejected";
}

std::optional<OverallStatus> overall_status_from_string(std::string_view s) {
  for (auto st : {OverallStatus::Admissible, OverallStatus::Rejected, OverallStatus::Inconclusive,
                  OverallStatus::DegenerateAdmissible})
    if (to_string(st) == s) return st;
  return std::nullopt;
}

PipelineReport run_characterize(const PipelineConfig& config, const PipelineOptions& opts) {
  const DiagonalVFParams& p = config.params;
  p.validate();
  PipelineReport rep;
  for (const Rational* x : {&p.A, &p.a, &p.b, &p.c, &p.d, &p.e, &p.f}) rep.params.push_back(format_rational(*x));
  rep.r = format_rational(p.exponent());

  Quartic q = build_characteristic_quartic(p);
  for (const Rational& c : *q.exact) rep.quartic.push_back(format_rational(c));
  RootSet roots = solve_quartic(q, opts.tol);
  for (const RootEntry& e : roots.entries) rep.roots.push_back({e.value.real(), e.value.imag(), e.multiplicity});
  rep.pattern = std::string(to_string(classify_root_pattern(roots)));
  rep.n_r = roots.n_r;

  if (roots.n_r < 2) {
    if (config.weights)
      for (const Rational& w : *config.weights) rep.weights.push_back(format_rational(w));
    rep.verdict = {"Rejected", 0, "NRootDeficit", false};
    rep.status = OverallStatus::Rejected;
    return rep;
  }

  if (config.weights) return characterize_with(p, roots, *config.weights, opts, rep);

  auto grid = positive_grid(*config.weight_grid, static_cast<std::size_t>(roots.n_r));
  if (grid.empty())
    throw Error(ErrorCode::WeightCountMismatch, "weight_grid is smaller than the number of atoms");
  std::optional<PipelineReport> first;
  for (const auto& w : grid) {
    PipelineReport r = characterize_with(p, roots, w, opts, rep);
    if (r.status == OverallStatus::Admissible || r.status == OverallStatus::DegenerateAdmissible) return r;
    if (!first) first = std::move(r);
  }
  return *first;
}

int exit_code(const PipelineReport& report) { return report.status == OverallStatus::Rejected ? 1 : 0; }

// --- serialization ------------------------------------------------------------

Json PipelineReport::to_json() const {
  Json j;
  Json pj = Json::object();
  for (std::size_t i = 0; i < params.size() && i < 7; ++i) pj[kParamNames[i]] = params[i];
  j["params"] = pj;
  j["quartic"] = quartic;
  Json rj = Json::array();
  for (const RootRecord& r : roots) rj.push_back({{"re", r.re}, {"im", r.im}, {"mult", r.mult}});
  j["roots"] = rj;
  j["pattern"] = pattern;
  j["n_r"] = n_r;
  Json aj = Json::array();
  for (const AtomRecord& a : atoms) aj.push_back({{"lambda", a.lambda}, {"nu", a.nu}});
  j["atoms"] = aj;
  j["weights"] = weights;
  j["r"] = r;
  j["verdict"] = {{"case", verdict.outcome}, {"N", verdict.N}, {"reason", verdict.reason},
                  {"inconclusive", verdict.inconclusive}};
  if (star) {
    j["star"] = {{"holds", star->holds},
                 {"witness", star->witness ? Json(*star->witness) : Json(nullptr)},
                 {"method", star->method}};
  } else {
    j["star"] = nullptr;
  }
  j["diag_check"] = check_to_json(diag_check);
  j["regression"] = check_to_json(regression);
  if (series) {
    j["series"] = {{"depth", series->depth},
                   {"first_negative", series->first_negative ? term_to_json(*series->first_negative) : Json(nullptr)},
                   {"complete", series->complete},
                   {"proof_case", series->proof_case}};
  } else {
    j["series"] = nullptr;
  }
  j["status"] = std::string(nefdiag::to_string(status));
  return j;
}

PipelineReport PipelineReport::from_json(const Json& j) {
  try {
    PipelineReport rep;
    for (const char* name : kParamNames) rep.params.push_back(j.at("params").at(name).get<std::string>());
    rep.quartic = j.at("quartic").get<std::vector<std::string>>();
    for (const Json& r : j.at("roots"))
      rep.roots.push_back({r.at("re").get<double>(), r.at("im").get<double>(), r.at("mult").get<int>()});
    rep.pattern = j.at("pattern").get<std::string>();
    rep.n_r = j.at("n_r").get<int>();
    for (const Json& a : j.at("atoms")) rep.atoms.push_back({a.at("lambda").get<double>(), a.at("nu").get<double>()});
    rep.weights = j.at("weights").get<std::vector<std::string>>();
    rep.r = j.at("r").get<std::string>();
    const Json& v = j.at("verdict");
    rep.verdict = {v.at("case").get<std::string>(), v.at("N").get<int>(), v.at("reason").get<std::string>(),
                   v.at("inconclusive").get<bool>()};
    if (const Json& s = j.at("star"); !s.is_null()) {
      StarRecord sr{s.at("holds").get<bool>(), std::nullopt, s.at("method").get<std::string>()};
      if (!s.at("witness").is_null()) sr.witness = s.at("witness").get<std::vector<std::string>>();
      rep.star = sr;
    }
    rep.diag_check = check_from_json(j.at("diag_check"));
    rep.regression = check_from_json(j.at("regression"));
    if (const Json& s = j.at("series"); !s.is_null()) {
      SeriesRecord sr;
      sr.depth = s.at("depth").get<int>();
      if (!s.at("first_negative").is_null()) sr.first_negative = term_from_json(s.at("first_negative"));
      sr.complete = s.at("complete").get<bool>();
      sr.proof_case = s.at("proof_case").get<int>();
      rep.series = sr;
    }
    auto st = overall_status_from_string(j.at("status").get<std::string>());
    if (!st) throw Error(ErrorCode::ParseError, "unknown status");
    rep.status = *st;
    return rep;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
}

std::string human_summary(const PipelineReport& r) {
  std::ostringstream os;
  os << "params  A=" << r.params[0] << " a=" << r.params[1] << " b=" << r.params[2] << " c=" << r.params[3]
     << " d=" << r.params[4] << " e=" << r.params[5] << " f=" << r.params[6] << "\n";
  os << "roots   " << r.pattern << ", n_r=" << r.n_r << ":";
  for (const RootRecord& x : r.roots) {
    os << " " << x.re;
    if (x.im != 0) os << (x.im > 0 ? "+" : "") << x.im << "i";
    if (x.mult > 1) os << " (x" << x.mult << ")";
  }
  os << "\n";
  if (!r.atoms.empty()) {
    os << "atoms  ";
    for (std::size_t i = 0; i < r.atoms.size(); ++i)
      os << " (" << r.atoms[i].lambda << ", " << r.atoms[i].nu << ")"
         << (i < r.weights.size() ? " w=" + r.weights[i] : "");
    os << "\n";
  }
  os << "r       " << r.r << "\n";
  os << "verdict " << r.verdict.outcome;
  if (r.verdict.outcome != "Rejected") os << " N=" << r.verdict.N;
  if (!r.verdict.reason.empty()) os << " (" << r.verdict.reason << ")";
  if (r.verdict.inconclusive) os << " [lattice condition failed]";
  os << "\n";
  if (r.star) {
    os << "star    " << (r.star->holds ? "holds" : "fails");
    if (r.star->witness) os << " witness (" << (*r.star->witness)[0] << ", " << (*r.star->witness)[1] << ", " << (*r.star->witness)[2] << ")";
    os << " via " << r.star->method << "\n";
  }
  if (r.diag_check) os << "diag    max dev " << r.diag_check->max_dev << (r.diag_check->pass ? " ok" : " FAIL") << "\n";
  if (r.regression) os << "regress max dev " << r.regression->max_dev << (r.regression->pass ? " ok" : " FAIL") << "\n";
  if (r.series) {
    os << "series  depth " << r.series->depth;
    if (r.series->first_negative)
      os << ", first negative " << r.series->first_negative->coefficient << " at order " << r.series->first_negative->order;
    else
      os << ", no negative coefficient";
    os << "\n";
  }
  os << "status  " << to_string(r.status) << "\n";
  return os.str();
}

Json roots_to_json(const RootSet& roots) {
  Json out = Json::array();
  for (const RootEntry& e : roots.entries) {
    Json r = {{"re", e.value.real()}, {"im", e.value.imag()}, {"mult", e.multiplicity}};
    if (e.exact) r["exact"] = format_rational(*e.exact);
    out.push_back(r);
  }
  return out;
}

Json star_to_json(const StarReport& star) {
  Json w = nullptr;
  if (star.witness) {
    w = Json::array();
    for (const BigInt& x : *star.witness) w.push_back(x.str());
  }
  return {{"holds", star.holds}, {"witness", w}, {"method", std::string(to_string(star.method))},
          {"kernel_dimension", star.kernel_dimension}, {"bound", star.bound}};
}

Json series_to_json(const SeriesReport& s) {
  Json terms = Json::array();
  for (const SeriesTerm& t : s.terms) terms.push_back(term_to_json(t));
  return {{"depth", s.depth},
          {"pivot", s.pivot},
          {"pivot_point", {s.pivot_point[0], s.pivot_point[1]}},
          {"probe", {s.probe[0], s.probe[1]}},
          {"proof_case", s.proof_case},
          {"complete", s.complete},
          {"first_negative", s.first_negative ? term_to_json(*s.first_negative) : Json(nullptr)},
          {"terms", terms}};
}

Json measure_to_json(const FiniteMeasure& mu) {
  Json pts = Json::array();
  for (std::size_t i = 0; i < mu.size(); ++i) {
    Json p = {{"x", mu.support[i][0]}, {"y", mu.support[i][1]}, {"mass", mu.masses[i]}};
    if (mu.exact_masses) p["exact_mass"] = format_rational((*mu.exact_masses)[i]);
    pts.push_back(p);
  }
  return {{"degenerate", mu.degenerate}, {"support", pts}};
}

EliminationForm parse_elimination_form(const Json& j) {
  if (!j.is_object()) throw Error(ErrorCode::ParseError, "form must be an object");
  EliminationForm f;
  if (j.contains("polynomial"))
    for (const Json& c : j.at("polynomial")) f.polynomial.push_back(json_double(c));
  if (j.contains("exponentials"))
    for (const Json& e : j.at("exponentials"))
      f.exponentials.emplace_back(json_double(require(e, "A")), json_double(require(e, "lambda")));
  if (j.contains("B")) f.B = json_double(j.at("B"));
  if (j.contains("gamma")) f.gamma = json_double(j.at("gamma"));
  if (j.contains("blocks")) {
    for (const Json& b : j.at("blocks")) {
      OscillatoryBlock blk;
      auto get = [&](const char* k) { return b.contains(k) ? json_double(b.at(k)) : 0.0; };
      blk.lambda = get("lambda");
      blk.gamma = get("gamma");
      blk.A0 = get("A0");
      blk.A1 = get("A1");
      blk.B0 = get("B0");
      blk.B1 = get("B1");
      f.blocks.push_back(blk);
    }
  }
  f.validate();
  return f;
}

LatticeMatrix parse_lattice(const Json& j) {
  if (!j.is_array() || j.size() != 3) throw Error(ErrorCode::ParseError, "matrix must have 3 rows");
  LatticeMatrix m;
  for (std::size_t r = 0; r < 3; ++r) {
    if (!j[r].is_array() || j[r].size() != 3) throw Error(ErrorCode::ParseError, "matrix rows must have 3 entries");
    for (std::size_t c = 0; c < 3; ++c) m.rows[r][c] = json_rational(j[r][c]);
  }
  return m;
}

}  // namespace nefdiag
