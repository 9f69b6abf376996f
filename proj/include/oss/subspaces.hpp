#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "oss/matlib.hpp"
#include "oss/plant.hpp"

namespace oss {

/// Geometry of the forced-equilibrium output set at one delta.
///
/// null_ab spans null [A B]; G = [C D] null_ab spans the directions of the
/// equilibrium outputs; gperp has orthonormal rows with null gperp = range G;
/// feasible spans null [gperp; H], the directions that keep both the
/// equilibrium and engineering equality constraints satisfied.
struct EquilibriumGeometry {
  Matrix null_ab;
  Matrix G;
  Matrix gperp;
  SubspaceBasis range_g;
  SubspaceBasis feasible;
};

EquilibriumGeometry equilibrium_geometry(const PlantMatrices& pm, const Matrix& H,
                                         double tol = kRankTol);

/// An equilibrium output for input (x,u) chosen as the min-norm solution of
/// A x + B u = -Bw w. Throws NumericalError when no equilibrium exists.
Vector particular_equilibrium_output(const PlantMatrices& pm, const Vector& w);

/// b(w, delta) = gperp * ytilde for a particular equilibrium output ytilde.
Vector equilibrium_offset(const PlantMatrices& pm, const EquilibriumGeometry& geo,
                          const Vector& w);

/// Per-sample verdict recorded by the robustness checks.
struct SampleVerdict {
  Vector delta;
  bool holds = false;
  /// Largest principal-angle sine against the nominal subspace.
  double max_sine = 0.0;
};

struct RobustnessVerdict {
  bool holds = false;
  /// Orthonormal basis at nominal delta (G0 for ROS, T0 for RFS) when holds.
  std::optional<Matrix> basis;
  /// (nominal delta, first violating delta) when the property fails.
  std::optional<std::pair<Vector, Vector>> witness;
  std::vector<SampleVerdict> samples;
};

using DeltaMatrix = std::function<Matrix(const Vector& delta)>;

RobustnessVerdict check_ros(const UncertainPlant& up, double tol = 1e-8);
RobustnessVerdict check_rfs(const UncertainPlant& up, const Matrix& H,
                            double tol = 1e-8);
/// Extended property with delta-dependent engineering constraints H(delta).
RobustnessVerdict check_rfs(const UncertainPlant& up, const DeltaMatrix& H,
                            double tol = 1e-8);

/// rank [A B; C D] == n + p at every sample.
bool check_robust_full_rank(const UncertainPlant& up, double tol = kRankTol);

struct RangeConditionVerdict {
  bool holds = false;
  std::optional<Vector> witness;
  std::vector<SampleVerdict> samples;
};

/// range(H G(delta)) and range(T0^T) intersect trivially at every sample.
RangeConditionVerdict check_rerfs_range_condition(const UncertainPlant& up,
                                                  const Matrix& H, const Matrix& T0);

/// (range H G(delta))^perp and (range T0^T)^perp intersect trivially at every
/// sample.
bool check_prop6_detectability_condition(const UncertainPlant& up, const Matrix& H,
                                         const Matrix& T0);

/// Same two conditions at a single plant evaluation.
bool rerfs_range_condition_at(const PlantMatrices& pm, const Matrix& H,
                              const Matrix& T0);
bool rerfs_detectability_condition_at(const PlantMatrices& pm, const Matrix& H,
                                      const Matrix& T0);

/// Steady-state gain -C A^{-1} B + D; requires invertible A (n == 0 allowed).
Matrix dc_gain(const PlantMatrices& pm);

}  // namespace oss
