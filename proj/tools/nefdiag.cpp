#include "nefdiag/errors.hpp"
#include "nefdiag/measure.hpp"
#include "nefdiag/model.hpp"
#include "nefdiag/pipeline.hpp"
#include "nefdiag/roots.hpp"
#include "nefdiag/series.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <iterator>
#include <random>
#include <sstream>

using namespace nefdiag;

namespace {

struct Flags {
  double tol = 1e-8;
  int grid = 11;
  int depth = 8;
  int bound = 50;
  bool json = false;
  unsigned seed = 0;
  std::string input = "-";
};

Json read_config(const std::string& path) {
  std::string text;
  if (path == "-") {
    text.assign(std::istreambuf_iterator<char>(std::cin), {});
  } else {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path);
    text.assign(std::istreambuf_iterator<char>(in), {});
  }
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
}

bool is_input_error(ErrorCode c) {
  switch (c) {
    case ErrorCode::ParseError:
    case ErrorCode::InvalidParams:
    case ErrorCode::WeightCountMismatch:
    case ErrorCode::UnsupportedArity:
    case ErrorCode::InvalidForm:
      return true;
    default:
      return false;
  }
}

void emit(const Json& j, const Flags& f, const std::string& human) {
  if (f.json)
    std::cout << j.dump(2) << "\n";
  else
    std::cout << human;
}

const Json& require_params(const Json& cfg) {
  if (!cfg.is_object() || !cfg.contains("params")) throw Error(ErrorCode::ParseError, "missing key 'params'");
  return cfg.at("params");
}

std::string plain(const Json& j) { return j.dump(2) + "\n"; }

Point2 parse_theta(const Json& cfg) {
  if (!cfg.contains("theta")) return {0, 0};
  const Json& t = cfg.at("theta");
  if (!t.is_array() || t.size() != 2) throw Error(ErrorCode::ParseError, "theta must have two entries");
  return {json_double(t[0]), json_double(t[1])};
}

CandidateModel model_from(const Json& cfg, const Flags& f) {
  PipelineConfig pc = PipelineConfig::from_json(cfg);
  if (!pc.weights) throw Error(ErrorCode::ParseError, "this command needs explicit weights");
  return candidate_model(pc.params, *pc.weights, f.tol);
}

VerdictOptions verdict_options(const Flags& f) {
  VerdictOptions vo;
  vo.tol = f.tol;
  vo.star_bound = f.bound;
  return vo;
}

int cmd_characterize(const Flags& f) {
  PipelineOptions opts{f.tol, f.grid, f.depth, f.bound};
  PipelineReport rep = run_characterize(PipelineConfig::from_json(read_config(f.input)), opts);
  emit(rep.to_json(), f, human_summary(rep));
  return exit_code(rep);
}

int cmd_roots(const Flags& f) {
  Json cfg = read_config(f.input);
  Quartic q;
  std::optional<DiagonalVFParams> p;
  if (cfg.contains("quartic")) {
    const Json& c = cfg.at("quartic");
    if (!c.is_array() || c.size() != 5) throw Error(ErrorCode::ParseError, "quartic needs 5 ascending coefficients");
    std::array<Rational, 5> k;
    for (std::size_t i = 0; i < 5; ++i) k[i] = json_rational(c[i]);
    q = Quartic::from_exact(k);
  } else {
    p = parse_params(require_params(cfg));
    q = build_characteristic_quartic(*p);
  }
  RootSet roots = solve_quartic(q, f.tol);
  Json out;
  Json coeffs = Json::array();
  for (const Rational& c : *q.exact) coeffs.push_back(format_rational(c));
  out["quartic"] = coeffs;
  out["roots"] = roots_to_json(roots);
  out["pattern"] = std::string(to_string(classify_root_pattern(roots)));
  out["n_r"] = roots.n_r;
  if (p) {
    Json atoms = Json::array();
    for (const RootEntry& e : roots.real_entries()) {
      DualOrdinate d = dual_ordinate(e.value.real(), *p, f.tol);
      atoms.push_back({{"lambda", e.value.real()}, {"nu", d.nu}, {"residual", d.residual}});
    }
    out["atoms"] = atoms;
  }
  emit(out, f, plain(out));
  return 0;
}

int cmd_lattice(const Flags& f) {
  Json cfg = read_config(f.input);
  LatticeMatrix m;
  if (cfg.contains("matrix"))
    m = parse_lattice(cfg.at("matrix"));
  else
    m = build_lambda_matrix(normalize_model(drop_zero_weights(model_from(cfg, f))));
  StarReport s = star_condition(m, f.bound);
  Json out = star_to_json(s);
  Json rows = Json::array();
  for (const auto& row : m.rows) {
    Json r = Json::array();
    for (const Rational& x : row) r.push_back(format_rational(x));
    rows.push_back(r);
  }
  out["matrix"] = rows;
  emit(out, f, plain(out));
  return 0;
}

int cmd_expand(const Flags& f) {
  CandidateModel m = normalize_model(model_from(read_config(f.input), f));
  Json out = series_to_json(expand_series(m, f.depth));
  emit(out, f, plain(out));
  return 0;
}

int cmd_scan(const Flags& f) {
  Json cfg = read_config(f.input);
  EliminationForm form = parse_elimination_form(cfg.contains("form") ? cfg.at("form") : cfg);
  const double r = cfg.contains("r") ? json_double(cfg.at("r")) : 1.0;
  std::vector<double> grid;
  if (cfg.contains("t")) {
    for (const Json& t : cfg.at("t")) grid.push_back(json_double(t));
  } else {
    double lo = -50, hi = 50;
    int n = 1001;
    bool random = false;
    if (cfg.contains("grid")) {
      const Json& g = cfg.at("grid");
      if (g.contains("lo")) lo = json_double(g.at("lo"));
      if (g.contains("hi")) hi = json_double(g.at("hi"));
      if (g.contains("n")) n = g.at("n").get<int>();
      random = g.value("random", false);
    }
    if (random) {
      std::mt19937_64 rng(f.seed);
      std::uniform_real_distribution<double> u(lo, hi);
      for (int i = 0; i < n; ++i) grid.push_back(u(rng));
    } else {
      grid = linear_grid(lo, hi, n);
    }
  }
  auto w = magnitude_scan(form, r, grid);
  Json out = {{"r", r}, {"points", grid.size()}, {"witness", w ? Json(*w) : Json(nullptr)}};
  if (w) out["magnitude"] = std::pow(std::abs(form(std::complex<double>(0, *w))), r);
  emit(out, f, plain(out));
  return 0;
}

int cmd_eval(const Flags& f) {
  Json cfg = read_config(f.input);
  CandidateModel m = model_from(cfg, f);
  Point2 theta = parse_theta(cfg);
  CumulantValue cv = cumulant_eval(m, theta);
  Json out = {{"theta", {theta[0], theta[1]}},
              {"k", cv.k},
              {"mean", {cv.mean[0], cv.mean[1]}},
              {"variance", {{cv.variance[0][0], cv.variance[0][1]}, {cv.variance[1][0], cv.variance[1][1]}}}};
  if (cfg.contains("mean")) {
    const Json& t = cfg.at("mean");
    Point2 target{json_double(t.at(0)), json_double(t.at(1))};
    Point2 back = mean_to_theta(m, target);
    out["theta_for_mean"] = {back[0], back[1]};
  }
  emit(out, f, plain(out));
  return 0;
}

int cmd_tilt(const Flags& f) {
  Json cfg = read_config(f.input);
  CandidateModel m = model_from(cfg, f);
  AdmissibilityVerdict v = admissibility_verdict(m, verdict_options(f));
  FiniteMeasure mu = realize_measure(m, v);
  FiniteMeasure tilted = tilt_member(mu, parse_theta(cfg));
  Json out = measure_to_json(tilted);
  Point2 mean = tilted.mean();
  out["mean"] = {mean[0], mean[1]};
  emit(out, f, plain(out));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Diagonal variance function characterization"};
  app.require_subcommand(1);
  app.fallthrough();
  Flags f;
  app.add_option("--tol", f.tol, "numerical tolerance")->capture_default_str();
  app.add_option("--grid", f.grid, "theta grid points per axis")->capture_default_str();
  app.add_option("--depth", f.depth, "series depth")->capture_default_str();
  app.add_option("--bound", f.bound, "lattice enumeration bound")->capture_default_str();
  app.add_flag("--json", f.json, "machine-readable output");
  app.add_option("--seed", f.seed, "seed for randomized grids")->capture_default_str();

  struct Sub { const char* name; const char* help; int (*run)(const Flags&); };
  const Sub subs[] = {
      {"characterize", "full pipeline", cmd_characterize},
      {"roots", "characteristic quartic roots", cmd_roots},
      {"lattice", "lattice (star) condition", cmd_lattice},
      {"expand", "binomial series around the dominant atom", cmd_expand},
      {"scan", "characteristic-function magnitude scan", cmd_scan},
      {"eval", "cumulant, mean and variance at theta", cmd_eval},
      {"tilt", "exponentially tilted member", cmd_tilt},
  };
  int (*chosen)(const Flags&) = nullptr;
  for (const Sub& s : subs) {
    CLI::App* sc = app.add_subcommand(s.name, s.help);
    sc->add_option("config", f.input, "config file, '-' for stdin");
    sc->callback([&chosen, run = s.run] { chosen = run; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  if (f.tol <= 0 || f.grid < 1 || f.depth < 0 || f.bound < 1) {
    std::cerr << "error: invalid flag value\n";
    return 2;
  }
  try {
    return chosen(f);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return is_input_error(e.code()) ? 2 : 1;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
