#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "oss/matlib.hpp"
#include "oss/plant.hpp"

namespace oss {

/// f0(y; w) = 1/2 y^T M y - y^T N w + c^T y.
struct QPData {
  Matrix M;
  Matrix N;
  /// Constant linear cost; empty means zero.
  Vector c;

  void validate(int p, int nw) const;
  double value(const Vector& y, const Vector& w) const;
  Vector gradient(const Vector& y, const Vector& w) const;
};

using ScalarFn = std::function<double(const Vector& y, const Vector& w)>;
using GradientFn = std::function<Vector(const Vector& y, const Vector& w)>;

struct Objective {
  std::string name;
  ScalarFn value;
  GradientFn gradient;
  /// Present when the objective is quadratic; enables exact linear solves.
  std::optional<QPData> quadratic;

  static Objective from_qp(QPData qp);
};

/// f(y; w) = a^T y - bw^T w - c.
struct AffineInequality {
  Vector a;
  Vector bw;
  double c = 0.0;
};

struct Inequality {
  ScalarFn value;
  GradientFn gradient;
  std::optional<AffineInequality> affine;

  static Inequality from_affine(AffineInequality a);
};

/// minimize f0(y;w) subject to y in the forced-equilibrium output set,
/// H y = L w and f_i(y;w) <= 0.
struct ConvexProgram {
  int p = 0;
  Objective objective;
  Matrix H;
  Matrix L;
  std::vector<Inequality> inequalities;
  /// Optional uncertain engineering constraints (H(delta), L(delta)).
  std::function<std::pair<Matrix, Matrix>(const Vector& delta)> engineering_at;

  int n_ec() const { return static_cast<int>(H.rows()); }
  int n_ic() const { return static_cast<int>(inequalities.size()); }
  bool is_equality_qp() const {
    return objective.quadratic.has_value() && inequalities.empty();
  }
  const QPData& qp() const;

  /// Copy with (H, L) evaluated at delta when they are delta-dependent.
  ConvexProgram at(const Vector& delta) const;

  /// Normalizes empty H/L to 0 x p / 0 x nw and checks every shape.
  void validate(int nw);

  Vector constraint_values(const Vector& y, const Vector& w) const;
  /// Columns are the inequality gradients.
  Matrix constraint_gradients(const Vector& y, const Vector& w) const;
  /// grad f0 + sum_i nu_i grad f_i.
  Vector lagrangian_gradient(const Vector& y, const Vector& w, const Vector& nu) const;
};

ConvexProgram make_qp_program(QPData qp, Matrix H = Matrix(), Matrix L = Matrix());

struct KKTPoint {
  Vector y;
  Vector lambda;
  Vector mu;
  Vector nu;
};

struct KKTResidual {
  Vector stationarity;
  Vector primal;
  Vector complementarity;

  double max_abs() const;
};

KKTResidual kkt_residual(const ConvexProgram& prog, const Matrix& gperp, const Vector& b,
                         const KKTPoint& pt, const Vector& w);

class InfeasibleProgram : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NonuniqueOptimizer : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct OracleResult {
  Vector y_star;
  KKTPoint multipliers;
  Vector x_bar;
  Vector u_bar;
  double cost = 0.0;
  /// Active inequality indices at the optimizer.
  std::vector<int> active_set;
  /// Smallest eigenvalue of the (reduced) Hessian on the feasible directions.
  double min_curvature = 0.0;
};

inline constexpr int kMaxOracleInequalities = 12;

/// Ground-truth optimizer computed over forced equilibria (x, u).
OracleResult oracle_optimal_output(const ConvexProgram& prog, const PlantMatrices& pm,
                                   const Vector& w);

/// T0^T M T0 is positive definite (vacuously true for an empty T0).
bool unique_optimizer_check(const Matrix& M, const Matrix& T0, double tol = 1e-9);
double min_restricted_eigenvalue(const Matrix& M, const Matrix& T0);

/// [gperp; H] has full row rank.
bool nonredundant_check(const Matrix& gperp, const Matrix& H, double tol = kRankTol);

enum class SmoothNormKind { kL2, kL1LogCosh, kLinfLogSumExp };

struct SmoothNormValue {
  double value = 0.0;
  Vector gradient;
};

SmoothNormValue smooth_norm(SmoothNormKind kind, const Vector& y, double beta = 20.0);

/// Tracking objective ||y_m - r||_2 + theta * (1/beta) sum log cosh(beta u) with
/// y = (y_m, u) and r = w.segment(ref_offset, p_m).
Objective sparse_tracking_objective(int p_m, int m, double theta, double beta,
                                    int ref_offset);

/// Largest relative central-difference error of grad against value at (y, w).
double gradient_fd_error(const ScalarFn& value, const GradientFn& gradient,
                         const Vector& y, const Vector& w);

}  // namespace oss
