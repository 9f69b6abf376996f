#include "oss/subspaces.hpp"

#include <sstream>

namespace oss {
namespace {

Matrix normalize_h(const Matrix& H, int p) {
  if (H.size() == 0) return Matrix::Zero(0, p);
  if (H.cols() != p) {
    throw std::invalid_argument("engineering constraint matrix H has " +
                                std::to_string(H.cols()) + " columns, expected p = " +
                                std::to_string(p));
  }
  return H;
}

template <typename SubspaceOf>
RobustnessVerdict sweep(const UncertainPlant& up, SubspaceOf subspace_of, double tol) {
  RobustnessVerdict out;
  const size_t nominal = up.nominal_index();
  const SubspaceBasis reference = subspace_of(up.nominal_delta());
  out.holds = true;
  for (size_t i = 0; i < up.samples().size(); ++i) {
    const Vector& delta = up.samples()[i];
    SampleVerdict sv;
    sv.delta = delta;
    if (i == nominal) {
      sv.holds = true;
    } else {
      const SubspaceBasis s = subspace_of(delta);
      sv.max_sine = max_principal_sine(reference, s);
      sv.holds = s.dim() == reference.dim() && sv.max_sine <= tol;
    }
    if (!sv.holds && out.holds) {
      out.holds = false;
      out.witness = std::make_pair(up.nominal_delta(), delta);
    }
    out.samples.push_back(std::move(sv));
  }
  if (out.holds) out.basis = reference.basis();
  return out;
}

}  // namespace

EquilibriumGeometry equilibrium_geometry(const PlantMatrices& pm, const Matrix& H,
                                         double tol) {
  const int p = pm.p();
  const Matrix h = normalize_h(H, p);
  EquilibriumGeometry geo;
  Matrix ab(pm.n(), pm.n() + pm.m());
  ab << pm.A, pm.B;
  geo.null_ab = null_basis(ab, tol).basis();
  Matrix cd(p, pm.n() + pm.m());
  cd << pm.C, pm.D;
  geo.G = cd * geo.null_ab;
  // null_ab is orthonormal, so |G| <= |cd|; cut relative to cd.
  const double ref = cd.norm();
  geo.range_g = range_basis(geo.G, tol, ref);
  geo.gperp = left_null_basis(geo.G, tol, ref).basis().transpose();
  geo.feasible = null_basis(vstack({geo.gperp, h}), tol);
  return geo;
}

Vector particular_equilibrium_output(const PlantMatrices& pm, const Vector& w) {
  Matrix ab(pm.n(), pm.n() + pm.m());
  ab << pm.A, pm.B;
  const Vector rhs = -pm.Bw * w;
  const Vector z = solve_linear(ab, rhs);
  const double residual = (ab * z - rhs).norm();
  if (residual > 1e-9 * (1.0 + rhs.norm())) {
    throw NumericalError("no forced equilibrium exists for this disturbance");
  }
  return pm.C * z.head(pm.n()) + pm.D * z.tail(pm.m()) + pm.Q * w;
}

Vector equilibrium_offset(const PlantMatrices& pm, const EquilibriumGeometry& geo,
                          const Vector& w) {
  return geo.gperp * particular_equilibrium_output(pm, w);
}

RobustnessVerdict check_ros(const UncertainPlant& up, double tol) {
  return sweep(
      up,
      [&](const Vector& delta) {
        return equilibrium_geometry(up.evaluate(delta), Matrix()).range_g;
      },
      tol);
}

RobustnessVerdict check_rfs(const UncertainPlant& up, const Matrix& H, double tol) {
  return check_rfs(up, DeltaMatrix([H](const Vector&) { return H; }), tol);
}

RobustnessVerdict check_rfs(const UncertainPlant& up, const DeltaMatrix& H,
                            double tol) {
  return sweep(
      up,
      [&](const Vector& delta) {
        return equilibrium_geometry(up.evaluate(delta), H(delta)).feasible;
      },
      tol);
}

bool check_robust_full_rank(const UncertainPlant& up, double tol) {
  for (const auto& delta : up.samples()) {
    const PlantMatrices pm = up.evaluate(delta);
    if (numerical_rank(system_matrix(pm), tol) != pm.n() + pm.p()) return false;
  }
  return true;
}

namespace {

struct RangePair {
  SubspaceBasis hg;
  SubspaceBasis t0t;
};

RangePair range_pair(const PlantMatrices& pm, const Matrix& H, const Matrix& T0) {
  const Matrix h = normalize_h(H, pm.p());
  if (T0.rows() != pm.p() || T0.cols() != h.rows()) {
    std::ostringstream os;
    os << "T0 has shape " << shape_string(T0) << ", expected " << pm.p() << "x"
       << h.rows() << " (p x n_ec)";
    throw std::invalid_argument(os.str());
  }
  const EquilibriumGeometry geo = equilibrium_geometry(pm, h);
  return {range_basis(h * geo.G), range_basis(T0.transpose())};
}

}  // namespace

bool rerfs_range_condition_at(const PlantMatrices& pm, const Matrix& H,
                              const Matrix& T0) {
  const RangePair r = range_pair(pm, H, T0);
  return subspace_intersection(r.hg, r.t0t).is_empty();
}

bool rerfs_detectability_condition_at(const PlantMatrices& pm, const Matrix& H,
                                      const Matrix& T0) {
  const RangePair r = range_pair(pm, H, T0);
  return subspace_intersection(orthogonal_complement(r.hg), orthogonal_complement(r.t0t))
      .is_empty();
}

RangeConditionVerdict check_rerfs_range_condition(const UncertainPlant& up,
                                                  const Matrix& H, const Matrix& T0) {
  RangeConditionVerdict out;
  out.holds = true;
  for (const auto& delta : up.samples()) {
    SampleVerdict sv;
    sv.delta = delta;
    sv.holds = rerfs_range_condition_at(up.evaluate(delta), H, T0);
    if (!sv.holds && out.holds) {
      out.holds = false;
      out.witness = delta;
    }
    out.samples.push_back(std::move(sv));
  }
  return out;
}

bool check_prop6_detectability_condition(const UncertainPlant& up, const Matrix& H,
                                         const Matrix& T0) {
  for (const auto& delta : up.samples()) {
    if (!rerfs_detectability_condition_at(up.evaluate(delta), H, T0)) return false;
  }
  return true;
}

Matrix dc_gain(const PlantMatrices& pm) {
  if (pm.n() == 0) return pm.D;
  Eigen::FullPivLU<Matrix> lu(pm.A);
  if (!lu.isInvertible()) {
    throw std::invalid_argument("dc_gain: A is singular");
  }
  return -pm.C * lu.solve(pm.B) + pm.D;
}

}  // namespace oss
