#pragma once

#include "nefdiag/measure.hpp"
#include "nefdiag/model.hpp"
#include "nefdiag/roots.hpp"
#include "nefdiag/series.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace nefdiag {

using Json = nlohmann::ordered_json;

/// Reads a number given as a JSON integer, a JSON float (through its shortest
/// decimal text) or a string "p/q" / decimal. Throws Error(ParseError).
Rational json_rational(const Json& j);
double json_double(const Json& j);

/// Accepts {"A":..,"a":..,...,"f":..} or a 7-element array in that order.
DiagonalVFParams parse_params(const Json& j);

struct PipelineConfig {
  DiagonalVFParams params;
  std::optional<std::vector<Rational>> weights;
  /// Search positive weights k/n summing to one when no weights are given.
  std::optional<int> weight_grid;

  static PipelineConfig from_json(const Json& j);
};

struct PipelineOptions {
  double tol = kDefaultTol;
  int grid = 11;
  int depth = 8;
  int bound = 50;
};

enum class OverallStatus { Admissible, Rejected, Inconclusive, DegenerateAdmissible };
std::string_view to_string(OverallStatus s);
std::optional<OverallStatus> overall_status_from_string(std::string_view s);

struct RootRecord {
  double re = 0;
  double im = 0;
  int mult = 1;
  friend bool operator==(const RootRecord&, const RootRecord&) = default;
};

struct AtomRecord {
  double lambda = 0;
  double nu = 0;
  friend bool operator==(const AtomRecord&, const AtomRecord&) = default;
};

struct VerdictRecord {
  std::string outcome;  // CaseA | CaseB | Rejected
  int N = 0;
  std::string reason;
  bool inconclusive = false;
  friend bool operator==(const VerdictRecord&, const VerdictRecord&) = default;
};

struct StarRecord {
  bool holds = true;
  std::optional<std::vector<std::string>> witness;
  std::string method;
  friend bool operator==(const StarRecord&, const StarRecord&) = default;
};

struct CheckRecord {
  double max_dev = 0;
  bool pass = false;
  friend bool operator==(const CheckRecord&, const CheckRecord&) = default;
};

struct SeriesRecord {
  int depth = 0;
  std::optional<SeriesTerm> first_negative;
  bool complete = false;
  int proof_case = 0;
  friend bool operator==(const SeriesRecord&, const SeriesRecord&) = default;
};

struct PipelineReport {
  std::vector<std::string> params;   // A, a, b, c, d, e, f as exact rationals
  std::vector<std::string> quartic;  // ascending monic coefficients
  std::vector<RootRecord> roots;
  std::string pattern;
  int n_r = 0;
  std::vector<AtomRecord> atoms;
  std::vector<std::string> weights;
  std::string r;
  VerdictRecord verdict;
  std::optional<StarRecord> star;
  std::optional<CheckRecord> diag_check;
  std::optional<CheckRecord> regression;
  std::optional<SeriesRecord> series;
  OverallStatus status = OverallStatus::Rejected;

  Json to_json() const;
  static PipelineReport from_json(const Json& j);
  friend bool operator==(const PipelineReport&, const PipelineReport&) = default;
};

/// quartic -> roots -> pattern -> candidate -> verdict -> measure -> checks -> series.
/// A root deficit or a failed verdict short-circuits to Rejected (or
/// Inconclusive when the lattice condition could not certify the rejection).
/// Errors from malformed input (WeightCountMismatch, InvalidParams) propagate.
PipelineReport run_characterize(const PipelineConfig& config, const PipelineOptions& opts = {});

/// 0 for Admissible / Degenerate-Admissible / Inconclusive, 1 for Rejected.
int exit_code(const PipelineReport& report);

std::string human_summary(const PipelineReport& report);

// Small serializers shared with the command-line tool.
Json roots_to_json(const RootSet& roots);
Json star_to_json(const StarReport& star);
Json series_to_json(const SeriesReport& s);
Json measure_to_json(const FiniteMeasure& mu);
EliminationForm parse_elimination_form(const Json& j);
LatticeMatrix parse_lattice(const Json& j);

}  // namespace nefdiag
