#pragma once

#include <optional>
#include <string>
#include <vector>

#include "oss/scenarios.hpp"
#include "oss/simulate.hpp"

namespace oss {

/// One evaluated check, expectation or comparison.
struct Outcome {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct RunResult {
  std::string label;
  Vector delta;
  Vector w;
  bool diverged = false;
  ConvergenceMetrics metrics;
  Vector y_final;
  Vector u_final;
  Vector y_star;
  double oracle_cost = 0.0;
  /// Extrema counts of the cost and of every y and u component, keyed by
  /// signal name ("cost", "y1", "u2", ...).
  std::vector<std::pair<std::string, int>> extrema;
  std::vector<Outcome> expectations;
  std::string csv;

  int extrema_of(const std::string& signal) const;
};

struct RunReport {
  std::string scenario;
  std::string variant;
  /// Informational analysis lines (robustness, propositions, spectra).
  std::vector<std::string> diagnostics;
  std::vector<Outcome> checks;
  std::vector<RunResult> runs;
  std::vector<Outcome> comparisons;

  bool passed() const;
  bool diverged() const;
  /// 0 pass, 1 expectation failure, 3 divergence.
  int exit_code() const;
  Json to_json() const;
  std::string to_text() const;
};

struct RunOptions {
  std::optional<double> h;
  std::optional<double> t_end;
  /// Repeats every run at each delta sample.
  bool sweep = false;
  /// Keep CSV text in each RunResult.
  bool keep_csv = true;
};

/// Static analysis: scripted checks plus robustness, proposition and spectrum
/// diagnostics at every delta sample.
RunReport cmd_check(const ScenarioSet& set);

/// Simulates every run and evaluates its expectations and comparisons.
RunReport cmd_run(const ScenarioSet& set, const RunOptions& opts = {});

/// Resolves a bundled scenario name or a file path to a parsed document.
Json read_scenario_document(const std::string& name_or_path);

/// Evaluates one scripted static check against a resolved scenario.
Outcome evaluate_check(const Scenario& s, const Json& check);

/// Simulates a resolved scenario and evaluates its expectations.
RunResult execute_run(const Scenario& s, const RunOptions& opts = {});

}  // namespace oss
