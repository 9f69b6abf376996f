#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "oss/matlib.hpp"
#include "oss/omodels.hpp"
#include "oss/plant.hpp"
#include "oss/stabilize.hpp"

namespace oss {

/// Signals of the closed loop at one state.
struct LoopSignals {
  Vector y;
  Vector u;
  Vector eps;
  double cost = 0.0;
};

/// Plant + optimality model + integrators + static stabilizer.
/// State z = (x, nu, mu, eta, x_s); x_s is empty for static stabilizers.
class ClosedLoopSystem {
 public:
  ClosedLoopSystem(PlantMatrices pm, OptimalityModel om, Stabilizer stab, Vector w);

  int dim() const { return x_s_off_; }
  int n() const { return pm_.n(); }
  int nu_offset() const { return nu_off_; }
  int mu_offset() const { return mu_off_; }
  int eta_offset() const { return eta_off_; }
  int n_nu() const { return om_.n_nu(); }
  int n_mu() const { return om_.n_mu(); }
  int n_eta() const { return om_.eps_dim(); }

  const PlantMatrices& plant() const { return pm_; }
  const OptimalityModel& model() const { return om_; }
  const Stabilizer& stabilizer() const { return stab_; }
  const Vector& w() const { return w_; }

  /// Time-invariant right-hand side; t is accepted for integrator symmetry.
  Vector rhs(double t, const Vector& z) const;
  LoopSignals signals(const Vector& z) const;

 private:
  Vector solve_input(const Vector& z) const;

  PlantMatrices pm_;
  OptimalityModel om_;
  Stabilizer stab_;
  Vector w_;
  bool linear_loop_ = false;
  int nu_off_ = 0, mu_off_ = 0, eta_off_ = 0, x_s_off_ = 0;
};

ClosedLoopSystem assemble(const UncertainPlant& up, const Vector& delta, const Vector& w,
                          const OptimalityModel& om, const Stabilizer& stab);

struct Trajectory {
  std::vector<double> times;
  std::vector<Vector> states;
  std::vector<LoopSignals> signals;
  bool diverged = false;
};

/// Classical fixed-step RK4. Samples are stored every `stride` steps (the
/// final step is always stored). Integration stops with diverged = true when
/// ||z|| exceeds 1e12 or a non-finite value appears.
Trajectory integrate_rk4(const ClosedLoopSystem& sys, const Vector& z0, double t_end, double h,
                         int stride = 1);

struct EquilibriumResult {
  Vector z;
  double residual = 0.0;
  int iterations = 0;
};

/// Damped Newton on rhs(z) = 0 with a finite-difference Jacobian. Throws
/// NumericalError on a singular Jacobian or no convergence in 100 steps.
EquilibriumResult equilibrium_solve(const ClosedLoopSystem& sys, const Vector& z_guess,
                                    double tol = 1e-10);

/// Splits an equilibrium state into plant and filter parts.
EquilibriumPoint equilibrium_point(const ClosedLoopSystem& sys, const Vector& z);

struct ConvergenceMetrics {
  double final_err = 0.0;
  /// First time after which ||y - y*|| stays below the tolerance; +inf if never.
  double settling_time = 0.0;
  double ise = 0.0;
  int extrema_count = 0;
};

ConvergenceMetrics convergence_metrics(const Trajectory& traj, const Vector& y_star,
                                       double settle_tol = 1e-3);

/// Strict local extrema of a sampled signal after t > guard, ignoring
/// reversals smaller than a relative noise floor.
int count_extrema(const std::vector<double>& t, const std::vector<double>& v, double guard);

/// Header t,x1..,u1..,y1..,eps1..,cost; %.15g; LF line endings.
void write_csv(std::ostream& os, const ClosedLoopSystem& sys, const Trajectory& traj);

/// Largest difference between two trajectories on the coarser grid.
double trajectory_distance(const Trajectory& coarse, const Trajectory& fine);

}  // namespace oss
