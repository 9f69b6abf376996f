#pragma once

#include <string>

#include "oss/matlib.hpp"
#include "oss/optprob.hpp"
#include "oss/plant.hpp"

namespace oss {

enum class OmVariant { kRfs, kRos, kRerfs };

std::string to_string(OmVariant v);
/// Accepts "rfs", "ros", "rerfs".
OmVariant parse_om_variant(const std::string& name);

/// Plant in series with an optimality model and integrators on its error,
/// for an equality-constrained QP. State z = (x, mu, eta); mu is present
/// only for the ROS variant.
///
///   zdot = A z + B u + Bw w + f
///   eps  = Ceps z + Deps u + Qeps w + eps0
///   ya   = Cmeas z + Dmeas u + Qmeas w
struct AugmentedPlant {
  OmVariant variant = OmVariant::kRfs;
  int n = 0;
  int n_mu = 0;
  int n_eps = 0;

  Matrix A, B, Bw;
  Vector f;
  Matrix Ceps, Deps, Qeps;
  Vector eps0;
  Matrix Cmeas, Dmeas, Qmeas;

  int dim() const { return n + n_mu + n_eps; }
  int x_offset() const { return 0; }
  int mu_offset() const { return n; }
  int eta_offset() const { return n + n_mu; }
};

/// Builds the augmented plant. `basis` is T0 for RFS/RERFS and G0 for ROS.
/// Throws std::invalid_argument on shape mismatches (including a RERFS T0
/// whose column count differs from n_ec).
AugmentedPlant build_augmented_qp(const PlantMatrices& pm, const ConvexProgram& prog,
                                  OmVariant variant, const Matrix& basis);

}  // namespace oss
