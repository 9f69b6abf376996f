#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "oss/omodels.hpp"
#include "oss/optprob.hpp"
#include "oss/plant.hpp"
#include "oss/stabilize.hpp"

namespace oss {

using Json = nlohmann::json;

/// Swing-equation network on an acyclic graph with quadratic generation costs
/// J_i(u) = a_i u^2 / 2 + b_i u.
struct PowerNetwork {
  int n = 0;
  /// Directed edge (from, to); the incidence column has +1 at from, -1 at to.
  std::vector<std::pair<int, int>> edges;
  Vector inertia;      // M, per bus
  Vector damping;      // D, per bus
  Vector susceptance;  // per line
  Vector injection;    // P*, per bus
  Vector a;
  Vector b;
  /// Communication Laplacian (rows sum to zero).
  Matrix Lc;
  /// Convex combination weights for the frequency integrator.
  Vector c;

  int n_lines() const { return static_cast<int>(edges.size()); }
  Matrix incidence() const;
  /// Throws std::invalid_argument for cyclic or disconnected graphs, bad
  /// parameter signs, or an invalid Laplacian.
  void validate() const;

  /// Four buses on a line with M = diag(1, 1.2, 0.8, 1), D = I, unit
  /// susceptances and a = (1, 2, 3, 4).
  static PowerNetwork default_line4();
};

/// Undirected path-graph Laplacian.
Matrix line_laplacian(int n);

/// delta = (dM, dD, dB) scales inertia, damping and susceptances by (1 + d).
/// State x = (omega, p); y = (u, omega); w = P*.
UncertainPlant build_swing_plant(const PowerNetwork& net, std::vector<Vector> samples = {});
std::vector<Vector> default_swing_samples();

/// min sum_i J_i(u_i) over y = (u, omega) with F omega = 0.
ConvexProgram build_dispatch_program(const PowerNetwork& net, const Matrix& F);

/// Equal-marginal-cost dispatch: u_i = (alpha - b_i) / a_i with sum u = -sum P*.
Vector dispatch_oracle(const PowerNetwork& net);

struct ControllerDesign {
  OptimalityModel om;
  Stabilizer stab;
};

/// eps = omega + Lc grad J(u), u = -(1/k) eta.
ControllerDesign build_dapi(const PowerNetwork& net, double k);

/// eps = (c^T omega, Lc~ grad J(u)) with Lc~ the Laplacian without its first
/// row; u = -K1 eta1 - K2 eta2 - K3 omega.
ControllerDesign build_novel_freq_controller(const PowerNetwork& net, const Matrix& K1,
                                             const Matrix& K2, const Matrix& K3);

/// eta' = c^T omega, u_i = (grad J_i)^{-1}(-eta). The sign makes the loop a
/// negative feedback.
ControllerDesign build_gather_broadcast(const PowerNetwork& net);

/// Fully resolved scenario run.
struct Scenario {
  std::string name;
  std::string description;
  std::string label;
  std::optional<UncertainPlant> plant;
  ConvexProgram program;
  OptimalityModel om;
  Stabilizer stab;
  std::optional<PowerNetwork> network;

  Vector w;
  Vector delta;
  double h = 1e-3;
  double t_end = 10.0;
  int stride = 1;
  std::optional<Vector> z0;

  Json checks = Json::array();
  Json expect = Json::array();
};

/// Deep merge of `patch` into `base` (objects merge, everything else replaces).
Json merge_json(Json base, const Json& patch);

Matrix json_matrix(const Json& j, const std::string& key);
Vector json_vector(const Json& j, const std::string& key);

/// Builds one scenario from a document that already has run patches applied.
Scenario load_scenario(const Json& doc);

/// A document expanded into its base configuration (which owns the static
/// checks) and one resolved scenario per entry of "runs".
struct ScenarioSet {
  std::string name;
  Scenario base;
  std::vector<Scenario> runs;
  Json compare = Json::array();
};

/// Applies an optional named variant, then expands "runs".
ScenarioSet load_scenario_set(const Json& doc, const std::string& variant = "");

std::vector<std::string> bundled_scenarios();
/// JSON text of a bundled scenario; throws std::invalid_argument if unknown.
std::string bundled_scenario_text(const std::string& name);

}  // namespace oss
