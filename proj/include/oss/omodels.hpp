#pragma once

#include <string>

#include "oss/augmented.hpp"
#include "oss/matlib.hpp"
#include "oss/optprob.hpp"
#include "oss/plant.hpp"

namespace oss {

enum class PhiNuKind { kProjectionMax, kSaddlePoint };

/// Map whose zeros encode nu >= 0, f <= 0 and nu^T f = 0.
struct PhiNu {
  PhiNuKind kind = PhiNuKind::kProjectionMax;

  /// projection_max: max(alpha + beta, 0) - alpha.
  /// saddle_point:   beta_i if alpha_i > 0, max(0, beta_i) otherwise.
  Vector operator()(const Vector& alpha, const Vector& beta) const;
};

PhiNuKind parse_phi_kind(const std::string& name);

/// Filter (nu, mu) -> eps. `basis` holds T0 (rfs, rerfs) or G0 (ros).
struct OptimalityModel {
  OmVariant variant = OmVariant::kRfs;
  ConvexProgram program;
  Matrix basis;
  PhiNu phi;

  int n_nu() const { return program.n_ic(); }
  int n_mu() const { return variant == OmVariant::kRos ? program.n_ec() : 0; }
  int eps_dim() const;

  /// Copy with delta-dependent engineering constraints evaluated at delta.
  OptimalityModel at(const Vector& delta) const;
};

OptimalityModel make_rfs(ConvexProgram prog, Matrix T0, PhiNu phi = {});
OptimalityModel make_ros(ConvexProgram prog, Matrix G0, PhiNu phi = {});
/// T0 must have exactly n_ec columns.
OptimalityModel make_rerfs(ConvexProgram prog, Matrix T0, PhiNu phi = {});
OptimalityModel make_model(OmVariant v, ConvexProgram prog, Matrix basis, PhiNu phi = {});

struct OmState {
  Vector nu;
  Vector mu;
};

struct OmOutput {
  Vector nu_dot;
  Vector mu_dot;
  Vector eps;
};

OmOutput om_dynamics(const OptimalityModel& om, const Vector& y, const Vector& w,
                     const OmState& state);

/// Augmented plant of an equality-constrained QP model.
AugmentedPlant build_augmented(const PlantMatrices& pm, const OptimalityModel& om);

struct EquilibriumPoint {
  Vector x;
  Vector u;
  OmState state;
};

struct OmVerification {
  bool holds = false;
  /// Equilibrium equations (plant, filter state, eps) satisfied within tol.
  bool premise = false;
  double plant_residual = 0.0;
  double state_residual = 0.0;
  double eps_residual = 0.0;
  Vector y_bar;
  Vector y_star;
  double y_error = 0.0;
};

/// Checks the optimality-model implication at one concrete point: the point
/// is an equilibrium with eps = 0, and its output equals the oracle optimizer
/// within 10 * tol.
OmVerification verify_optimality_model(const OptimalityModel& om, const UncertainPlant& up,
                                       const Vector& delta, const Vector& w,
                                       const EquilibriumPoint& eq, double tol = 1e-8);

/// u_i = (alpha - b_i) / a_i, the inverse marginal cost of J_i = a_i u^2 / 2 + b_i u.
Vector gather_broadcast_input(const Vector& a, const Vector& b, double alpha);

}  // namespace oss
