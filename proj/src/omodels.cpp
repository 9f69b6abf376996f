#include "oss/omodels.hpp"

#include <algorithm>
#include <cmath>

namespace oss {

Vector PhiNu::operator()(const Vector& alpha, const Vector& beta) const {
  if (alpha.size() != beta.size()) throw std::invalid_argument("phi_nu: size mismatch");
  Vector out(alpha.size());
  for (Eigen::Index i = 0; i < alpha.size(); ++i) {
    if (kind == PhiNuKind::kProjectionMax) {
      out(i) = std::max(alpha(i) + beta(i), 0.0) - alpha(i);
    } else {
      out(i) = alpha(i) > 0.0 ? beta(i) : std::max(0.0, beta(i));
    }
  }
  return out;
}

PhiNuKind parse_phi_kind(const std::string& name) {
  if (name == "projection_max") return PhiNuKind::kProjectionMax;
  if (name == "saddle_point") return PhiNuKind::kSaddlePoint;
  throw std::invalid_argument("unknown phi_nu kind '" + name + "'");
}

int OptimalityModel::eps_dim() const {
  switch (variant) {
    case OmVariant::kRfs:
      return program.n_ec() + static_cast<int>(basis.cols());
    case OmVariant::kRos:
      return static_cast<int>(basis.cols());
    case OmVariant::kRerfs:
      return program.n_ec();
  }
  return 0;
}

OptimalityModel OptimalityModel::at(const Vector& delta) const {
  OptimalityModel out = *this;
  out.program = program.at(delta);
  if (out.program.H.size() == 0) out.program.H = Matrix::Zero(0, program.p);
  return out;
}

namespace {

void normalize(ConvexProgram& prog) {
  if (prog.H.size() == 0) prog.H = Matrix::Zero(0, prog.p);
  if (prog.H.cols() != prog.p) {
    throw std::invalid_argument("H has shape " + shape_string(prog.H) + ", expected n_ec x " +
                                std::to_string(prog.p));
  }
  if (prog.L.rows() != prog.H.rows()) {
    if (prog.L.size() != 0) {
      throw std::invalid_argument("L has " + std::to_string(prog.L.rows()) +
                                  " rows, expected n_ec = " + std::to_string(prog.H.rows()));
    }
  }
}

}  // namespace

OptimalityModel make_model(OmVariant v, ConvexProgram prog, Matrix basis, PhiNu phi) {
  normalize(prog);
  const char* name = v == OmVariant::kRos ? "G0" : "T0";
  if (basis.size() == 0) basis = Matrix::Zero(prog.p, 0);
  if (basis.rows() != prog.p) {
    throw std::invalid_argument(std::string(name) + " has shape " + shape_string(basis) +
                                ", expected " + std::to_string(prog.p) + " rows");
  }
  if (v == OmVariant::kRerfs && basis.cols() != prog.n_ec()) {
    throw std::invalid_argument(
        "reduced-error model needs T0 in R^{p x n_ec}: expected " + std::to_string(prog.n_ec()) +
        " columns, got " + std::to_string(basis.cols()));
  }
  OptimalityModel om;
  om.variant = v;
  om.program = std::move(prog);
  om.basis = std::move(basis);
  om.phi = phi;
  return om;
}

OptimalityModel make_rfs(ConvexProgram prog, Matrix T0, PhiNu phi) {
  return make_model(OmVariant::kRfs, std::move(prog), std::move(T0), phi);
}

OptimalityModel make_ros(ConvexProgram prog, Matrix G0, PhiNu phi) {
  return make_model(OmVariant::kRos, std::move(prog), std::move(G0), phi);
}

OptimalityModel make_rerfs(ConvexProgram prog, Matrix T0, PhiNu phi) {
  return make_model(OmVariant::kRerfs, std::move(prog), std::move(T0), phi);
}

OmOutput om_dynamics(const OptimalityModel& om, const Vector& y, const Vector& w,
                     const OmState& state) {
  const ConvexProgram& prog = om.program;
  if (y.size() != prog.p) throw std::invalid_argument("om_dynamics: y has wrong length");
  if (state.nu.size() != om.n_nu() || state.mu.size() != om.n_mu()) {
    throw std::invalid_argument("om_dynamics: filter state has wrong dimension");
  }
  OmOutput out;
  out.nu_dot = om.phi(state.nu, prog.constraint_values(y, w));
  const Vector lag = prog.lagrangian_gradient(y, w, state.nu);
  const Vector lw = prog.L.size() ? Vector(prog.L * w) : Vector::Zero(prog.n_ec());
  const Vector residual = prog.H * y - lw;
  out.mu_dot = Vector::Zero(om.n_mu());
  switch (om.variant) {
    case OmVariant::kRfs:
      out.eps.resize(om.eps_dim());
      out.eps << residual, om.basis.transpose() * lag;
      break;
    case OmVariant::kRos:
      out.mu_dot = residual;
      out.eps = om.basis.transpose() * (lag + prog.H.transpose() * state.mu);
      break;
    case OmVariant::kRerfs:
      out.eps = residual + om.basis.transpose() * lag;
      break;
  }
  return out;
}

AugmentedPlant build_augmented(const PlantMatrices& pm, const OptimalityModel& om) {
  return build_augmented_qp(pm, om.program, om.variant, om.basis);
}

OmVerification verify_optimality_model(const OptimalityModel& om_in, const UncertainPlant& up,
                                       const Vector& delta, const Vector& w,
                                       const EquilibriumPoint& eq, double tol) {
  const PlantMatrices pm = up.evaluate(delta);
  const OptimalityModel om = om_in.at(delta);
  OmVerification v;
  v.y_bar = pm.output(eq.x, eq.u, w);
  v.plant_residual = (pm.A * eq.x + pm.B * eq.u + pm.Bw * w).cwiseAbs().maxCoeff();
  if (pm.n() == 0) v.plant_residual = 0.0;
  const OmOutput o = om_dynamics(om, v.y_bar, w, eq.state);
  double sr = 0.0;
  if (o.nu_dot.size()) sr = std::max(sr, o.nu_dot.cwiseAbs().maxCoeff());
  if (o.mu_dot.size()) sr = std::max(sr, o.mu_dot.cwiseAbs().maxCoeff());
  v.state_residual = sr;
  v.eps_residual = o.eps.size() ? o.eps.cwiseAbs().maxCoeff() : 0.0;
  v.premise = v.plant_residual <= tol && v.state_residual <= tol && v.eps_residual <= tol;
  v.y_star = oracle_optimal_output(om.program, pm, w).y_star;
  v.y_error = (v.y_bar - v.y_star).norm();
  v.holds = v.premise && v.y_error <= 10.0 * tol;
  return v;
}

Vector gather_broadcast_input(const Vector& a, const Vector& b, double alpha) {
  if (a.size() != b.size()) throw std::invalid_argument("gather_broadcast_input: size mismatch");
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (!(a(i) > 0.0)) {
      throw std::invalid_argument("gather_broadcast_input: cost curvature a_i must be positive");
    }
  }
  return (Vector::Constant(a.size(), alpha) - b).cwiseQuotient(a);
}

}  // namespace oss
