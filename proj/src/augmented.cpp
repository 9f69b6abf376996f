#include "oss/augmented.hpp"

#include <sstream>

namespace oss {

std::string to_string(OmVariant v) {
  switch (v) {
    case OmVariant::kRfs:
      return "rfs";
    case OmVariant::kRos:
      return "ros";
    case OmVariant::kRerfs:
      return "rerfs";
  }
  return "?";
}

OmVariant parse_om_variant(const std::string& name) {
  if (name == "rfs") return OmVariant::kRfs;
  if (name == "ros") return OmVariant::kRos;
  if (name == "rerfs") return OmVariant::kRerfs;
  throw std::invalid_argument("unknown optimality model variant '" + name +
                              "' (expected rfs, ros or rerfs)");
}

AugmentedPlant build_augmented_qp(const PlantMatrices& pm_in, const ConvexProgram& prog_in,
                                  OmVariant variant, const Matrix& basis) {
  const PlantMatrices pm = PlantMatrices::with_full_state_measurement(pm_in);
  pm.validate();
  ConvexProgram prog = prog_in;
  prog.validate(pm.nw());
  if (!prog.is_equality_qp()) {
    throw std::invalid_argument("augmented plant requires an equality-constrained QP");
  }
  if (prog.p != pm.p()) {
    throw std::invalid_argument("program output dimension does not match plant p");
  }
  const QPData& qp = prog.qp();
  const int n = pm.n();
  const int m = pm.m();
  const int nw = pm.nw();
  const int p = pm.p();
  const int nec = prog.n_ec();
  if (basis.rows() != p) {
    std::ostringstream os;
    os << (variant == OmVariant::kRos ? "G0" : "T0") << " has shape " << shape_string(basis)
       << ", expected " << p << " rows";
    throw std::invalid_argument(os.str());
  }
  if (variant == OmVariant::kRerfs && basis.cols() != nec) {
    throw std::invalid_argument("reduced-error model needs T0 with exactly n_ec = " +
                                std::to_string(nec) + " columns, got " +
                                std::to_string(basis.cols()));
  }
  const Vector c = qp.c.size() ? qp.c : Vector::Zero(p);

  AugmentedPlant aug;
  aug.variant = variant;
  aug.n = n;
  aug.n_mu = variant == OmVariant::kRos ? nec : 0;

  // eps = Ey y + Emu mu + Ew w + e0 before substituting y = Cx + Du + Qw.
  Matrix ey, emu, ew;
  Vector e0;
  switch (variant) {
    case OmVariant::kRfs:
      ey = vstack({prog.H, basis.transpose() * qp.M});
      ew = vstack({-prog.L, -basis.transpose() * qp.N});
      e0 = vstack({Matrix::Zero(nec, 1), basis.transpose() * c});
      emu = Matrix::Zero(ey.rows(), 0);
      break;
    case OmVariant::kRos:
      ey = basis.transpose() * qp.M;
      ew = -basis.transpose() * qp.N;
      e0 = basis.transpose() * c;
      emu = basis.transpose() * prog.H.transpose();
      break;
    case OmVariant::kRerfs:
      ey = prog.H + basis.transpose() * qp.M;
      ew = -prog.L - basis.transpose() * qp.N;
      e0 = basis.transpose() * c;
      emu = Matrix::Zero(ey.rows(), 0);
      break;
  }
  aug.n_eps = static_cast<int>(ey.rows());
  const int N = aug.dim();

  aug.Ceps = Matrix::Zero(aug.n_eps, N);
  aug.Ceps.leftCols(n) = ey * pm.C;
  aug.Ceps.middleCols(n, aug.n_mu) = emu;
  aug.Deps = ey * pm.D;
  aug.Qeps = ey * pm.Q + ew;
  aug.eps0 = e0;

  aug.A = Matrix::Zero(N, N);
  aug.B = Matrix::Zero(N, m);
  aug.Bw = Matrix::Zero(N, nw);
  aug.f = Vector::Zero(N);
  aug.A.topLeftCorner(n, n) = pm.A;
  aug.B.topRows(n) = pm.B;
  aug.Bw.topRows(n) = pm.Bw;
  if (aug.n_mu > 0) {
    aug.A.block(n, 0, nec, n) = prog.H * pm.C;
    aug.B.middleRows(n, nec) = prog.H * pm.D;
    aug.Bw.middleRows(n, nec) = prog.H * pm.Q - prog.L;
  }
  aug.A.bottomRows(aug.n_eps) = aug.Ceps;
  aug.B.bottomRows(aug.n_eps) = aug.Deps;
  aug.Bw.bottomRows(aug.n_eps) = aug.Qeps;
  aug.f.tail(aug.n_eps) = aug.eps0;

  const int pm_rows = pm.pm();
  const int ctrl = aug.n_mu + aug.n_eps;
  aug.Cmeas = Matrix::Zero(pm_rows + ctrl, N);
  aug.Cmeas.topLeftCorner(pm_rows, n) = pm.Cm;
  aug.Cmeas.bottomRightCorner(ctrl, ctrl) = Matrix::Identity(ctrl, ctrl);
  aug.Dmeas = Matrix::Zero(pm_rows + ctrl, m);
  aug.Dmeas.topRows(pm_rows) = pm.Dm;
  aug.Qmeas = Matrix::Zero(pm_rows + ctrl, nw);
  aug.Qmeas.topRows(pm_rows) = pm.Qm;
  return aug;
}

}  // namespace oss
