#pragma once

#include <optional>
#include <string>
#include <vector>

#include "oss/augmented.hpp"
#include "oss/matlib.hpp"
#include "oss/omodels.hpp"
#include "oss/optprob.hpp"
#include "oss/plant.hpp"

namespace oss {

/// Verdict of a PBH-type test together with how far the underlying rank
/// decisions were from the threshold (larger is safer).
struct PbhVerdict {
  bool holds = false;
  double gap = std::numeric_limits<double>::infinity();
  /// Eigenvalues that fail the rank test (uncontrollable and not stable).
  ComplexVector bad_modes;
};

/// rank [lambda I - A, B] == n for every eigenvalue with Re lambda >= -tol.
///
/// The failing eigenvalues are exactly the spectrum of the uncontrollable
/// block of an orthogonal controllability staircase, so the test is decided
/// on that block rather than at numerically perturbed eigenvalues of A.
PbhVerdict pbh_stabilizable_report(const Matrix& A, const Matrix& B, double tol = 1e-9);
bool pbh_stabilizable(const Matrix& A, const Matrix& B, double tol = 1e-9);
PbhVerdict pbh_detectable_report(const Matrix& C, const Matrix& A, double tol = 1e-9);
bool pbh_detectable(const Matrix& C, const Matrix& A, double tol = 1e-9);

/// Orthonormal basis of the controllable subspace of (A, B).
Matrix controllable_subspace(const Matrix& A, const Matrix& B, double* gap = nullptr);

struct Clause {
  std::string name;
  bool holds = false;
  std::string detail;
  double gap = std::numeric_limits<double>::infinity();
};

struct ConditionReport {
  std::string title;
  std::vector<Clause> clauses;
  bool overall = false;
  /// Direct PBH verdict on the assembled augmented plant, when computed.
  std::optional<bool> pbh;
  /// Smallest decision gap over all clauses and the PBH tests.
  double min_gap = std::numeric_limits<double>::infinity();
  bool borderline() const { return min_gap < 1e3; }
};

/// Disagreement threshold: clause and PBH verdicts that differ while every
/// decision gap is at least this large indicate a numerics bug.
inline constexpr double kDecisiveGap = 1e3;

/// (Cm, A, B) stabilizable and detectable; [A B; C D] full row rank.
ConditionReport theorem1_check(const PlantMatrices& pm, double tol = 1e-9);

/// Clause checks for the RFS, ROS and reduced-error models on an
/// equality-constrained QP, cross-validated against PBH tests on the
/// augmented plant. Throws NumericalError when the two verdicts disagree on
/// a decisive instance.
ConditionReport prop4_check(const PlantMatrices& pm, const ConvexProgram& qp, const Matrix& T0);
ConditionReport prop5_check(const PlantMatrices& pm, const ConvexProgram& qp, const Matrix& G0);
ConditionReport prop6_check(const PlantMatrices& pm, const ConvexProgram& qp, const Matrix& T0);
ConditionReport prop4_check(const UncertainPlant& up, const Vector& delta,
                            const ConvexProgram& qp, const Matrix& T0);
ConditionReport prop5_check(const UncertainPlant& up, const Vector& delta,
                            const ConvexProgram& qp, const Matrix& G0);
ConditionReport prop6_check(const UncertainPlant& up, const Vector& delta,
                            const ConvexProgram& qp, const Matrix& T0);
/// Dispatches on the model variant.
ConditionReport proposition_check(const PlantMatrices& pm, const OptimalityModel& om);

/// PBH stabilizability and detectability of an augmented plant.
PbhVerdict augmented_pbh(const AugmentedPlant& aug);

/// Static gains u = -(Kx x + Kmu mu + Knu nu + Keta eta + Keps eps) + u0.
/// Empty blocks act as zero.
struct Stabilizer {
  std::string kind = "static_gains";
  Matrix Kx, Kmu, Knu, Keta, Keps;
  Vector u0;

  /// Replaces empty blocks by zeros of the right shape; checks the others.
  void conform(int m, int n, int n_mu, int n_nu, int n_eta);
};

struct Spectrum {
  Matrix A_cl;
  ComplexVector eigenvalues;
  double abscissa = 0.0;
  bool hurwitz() const { return abscissa < 0.0; }
};

/// Closed loop of an augmented plant with a static stabilizer. The algebraic
/// loop through Keps and the feedthrough of eps is solved exactly.
Spectrum closed_loop_matrix(const AugmentedPlant& aug, Stabilizer stab);

/// Stabilizing solution of A^T P + P A - P B R^{-1} B^T P + Q = 0.
Matrix solve_care(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R);

/// LQR state feedback on the full augmented state; empty Q or R mean identity.
Stabilizer synthesize_lqr(const AugmentedPlant& aug, const Matrix& Q = Matrix(),
                          const Matrix& R = Matrix());

}  // namespace oss
