#include "oss/stabilize.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "oss/subspaces.hpp"

namespace oss {
namespace {

constexpr double kTiny = 1e-300;

double two_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

// Gap of a "Re lambda >= -tol" decision: small only when |Re| is within three
// decades of tol on either side.
double re_gap(double re, double tol) {
  const double a = std::abs(re);
  return std::max(a / tol, tol / std::max(a, kTiny));
}

// Averages eigenvalues that lie within `radius` of each other so that split
// defective eigenvalues are replaced by their (accurate) centroid.
ComplexVector cluster_means(const ComplexVector& ev, double radius) {
  const size_t k = ev.size();
  std::vector<int> label(k, -1);
  int next = 0;
  for (size_t i = 0; i < k; ++i) {
    if (label[i] >= 0) continue;
    label[i] = next;
    // Grow the cluster transitively.
    bool grew = true;
    while (grew) {
      grew = false;
      for (size_t j = 0; j < k; ++j) {
        if (label[j] >= 0) continue;
        for (size_t l = 0; l < k; ++l) {
          if (label[l] == next && std::abs(ev[j] - ev[l]) <= radius) {
            label[j] = next;
            grew = true;
            break;
          }
        }
      }
    }
    ++next;
  }
  ComplexVector out;
  for (int c = 0; c < next; ++c) {
    std::complex<double> sum = 0.0;
    int count = 0;
    for (size_t i = 0; i < k; ++i) {
      if (label[i] == c) {
        sum += ev[i];
        ++count;
      }
    }
    out.push_back(sum / static_cast<double>(count));
  }
  return out;
}

}  // namespace

Matrix controllable_subspace(const Matrix& A, const Matrix& B, double* gap) {
  const Eigen::Index n = A.rows();
  if (A.cols() != n || B.rows() != n) {
    throw std::invalid_argument("controllable_subspace: A is " + shape_string(A) + ", B is " +
                                shape_string(B));
  }
  const double scale = std::max({two_norm(A), two_norm(B), kTiny});
  const double threshold = kRankTol * scale * static_cast<double>(std::max<Eigen::Index>(n, 1));
  double min_gap = std::numeric_limits<double>::infinity();
  Matrix V(n, 0);
  Matrix W = B;
  while (V.cols() < n && W.cols() > 0) {
    for (int pass = 0; pass < 2; ++pass) W -= V * (V.transpose() * W);
    Eigen::JacobiSVD<Matrix> svd(W, Eigen::ComputeThinU);
    const Vector& s = svd.singularValues();
    Eigen::Index r = 0;
    while (r < s.size() && s(r) > threshold) ++r;
    r = std::min<Eigen::Index>(r, n - V.cols());
    const double below = r < s.size() ? s(r) : 0.0;
    const double above = r > 0 ? s(r - 1) : threshold;
    min_gap = std::min(min_gap, r > 0 ? above / std::max(below, threshold)
                                      : threshold / std::max(below, kTiny));
    if (r == 0) break;
    const Matrix fresh = svd.matrixU().leftCols(r);
    Matrix grown(n, V.cols() + r);
    grown << V, fresh;
    V = grown;
    W = A * fresh;
  }
  if (gap) *gap = min_gap;
  return V;
}

PbhVerdict pbh_stabilizable_report(const Matrix& A, const Matrix& B, double tol) {
  PbhVerdict out;
  const Eigen::Index n = A.rows();
  if (n == 0) {
    out.holds = true;
    return out;
  }
  double gap = 0.0;
  const Matrix V = controllable_subspace(A, B, &gap);
  out.gap = gap;
  out.holds = true;
  if (V.cols() == n) return out;
  const Matrix U = orthogonal_complement(SubspaceBasis(V, kRankTol)).basis();
  const Matrix auu = U.transpose() * A * U;
  const double scale = std::max(1.0, two_norm(A));
  const double tol_abs = tol * scale;
  const ComplexVector modes = cluster_means(eigenvalues(auu), 1e-3 * scale);
  for (const auto& lam : modes) {
    out.gap = std::min(out.gap, re_gap(lam.real(), tol_abs));
    if (lam.real() >= -tol_abs) {
      out.holds = false;
      out.bad_modes.push_back(lam);
    }
  }
  return out;
}

bool pbh_stabilizable(const Matrix& A, const Matrix& B, double tol) {
  return pbh_stabilizable_report(A, B, tol).holds;
}

PbhVerdict pbh_detectable_report(const Matrix& C, const Matrix& A, double tol) {
  if (C.cols() != A.rows()) {
    throw std::invalid_argument("pbh_detectable: C is " + shape_string(C) + ", A is " +
                                shape_string(A));
  }
  return pbh_stabilizable_report(A.transpose(), C.transpose(), tol);
}

bool pbh_detectable(const Matrix& C, const Matrix& A, double tol) {
  return pbh_detectable_report(C, A, tol).holds;
}

namespace {

void finish(ConditionReport& r) {
  r.overall = true;
  for (const auto& c : r.clauses) {
    r.overall = r.overall && c.holds;
    r.min_gap = std::min(r.min_gap, c.gap);
  }
}

Clause stab_detect_clause(const PlantMatrices& pm, double tol) {
  const PbhVerdict s = pbh_stabilizable_report(pm.A, pm.B, tol);
  const PbhVerdict d = pbh_detectable_report(pm.Cm, pm.A, tol);
  Clause c;
  c.name = "(Cm, A, B) stabilizable and detectable";
  c.holds = s.holds && d.holds;
  c.gap = std::min(s.gap, d.gap);
  std::ostringstream os;
  os << "stabilizable=" << (s.holds ? "yes" : "no") << " detectable=" << (d.holds ? "yes" : "no");
  if (!s.bad_modes.empty()) os << " (" << s.bad_modes.size() << " uncontrollable unstable modes)";
  if (!d.bad_modes.empty()) os << " (" << d.bad_modes.size() << " unobservable unstable modes)";
  c.detail = os.str();
  return c;
}

Clause full_row_rank_clause(const std::string& name, const Matrix& m) {
  const RankInfo ri = rank_info(m);
  Clause c;
  c.name = name;
  c.holds = ri.rank == m.rows();
  c.gap = ri.gap;
  std::ostringstream os;
  os << "rank " << ri.rank << " of " << m.rows() << " rows";
  c.detail = os.str();
  return c;
}

Clause full_column_rank_clause(const std::string& name, const Matrix& m) {
  const RankInfo ri = rank_info(m);
  Clause c;
  c.name = name;
  c.holds = ri.rank == m.cols();
  c.gap = m.cols() == 0 ? std::numeric_limits<double>::infinity() : ri.gap;
  std::ostringstream os;
  os << "rank " << ri.rank << " of " << m.cols() << " columns";
  c.detail = os.str();
  return c;
}

Clause unique_optimizer_clause(const Matrix& M, const Matrix& feasible) {
  Clause c;
  c.name = "unique optimizer";
  const double thr = 1e-9 * std::max(1.0, two_norm(M));
  const double lmin = min_restricted_eigenvalue(M, feasible);
  c.holds = lmin > thr;
  c.gap = std::isinf(lmin) ? lmin
                           : (c.holds ? lmin / thr : thr / std::max(std::abs(lmin), kTiny));
  std::ostringstream os;
  os << "min eigenvalue of M on the feasible directions = " << lmin;
  c.detail = os.str();
  return c;
}

Clause spans_clause(const std::string& name, const Matrix& basis, const SubspaceBasis& target) {
  Clause c;
  c.name = name;
  const double sine = max_principal_sine(range_basis(basis), target);
  constexpr double tol = 1e-8;
  c.holds = sine <= tol;
  c.gap = c.holds ? tol / std::max(sine, kTiny) : sine / tol;
  std::ostringstream os;
  os << "largest principal sine " << sine;
  c.detail = os.str();
  return c;
}

struct Prepared {
  PlantMatrices pm;
  ConvexProgram prog;
  EquilibriumGeometry geo;
};

Prepared prepare(const PlantMatrices& pm_in, const ConvexProgram& qp) {
  Prepared p;
  p.pm = PlantMatrices::with_full_state_measurement(pm_in);
  p.pm.validate();
  p.prog = qp;
  p.prog.validate(p.pm.nw());
  if (!p.prog.is_equality_qp()) {
    throw std::invalid_argument("stabilizability propositions need an equality-constrained QP");
  }
  p.geo = equilibrium_geometry(p.pm, p.prog.H);
  return p;
}

// The first clause is the premise that the basis spans the subspace the model
// was derived for; without it the equivalence makes no claim.
void cross_validate(ConditionReport& r, const AugmentedPlant& aug) {
  const PbhVerdict v = augmented_pbh(aug);
  r.pbh = v.holds;
  r.min_gap = std::min(r.min_gap, v.gap);
  if (!r.clauses.front().holds) return;
  if (r.overall != v.holds && !r.borderline()) {
    std::ostringstream os;
    os << r.title << ": clause verdict " << (r.overall ? "true" : "false")
       << " disagrees with direct PBH verdict " << (v.holds ? "true" : "false")
       << " (min gap " << r.min_gap << ")";
    throw NumericalError(os.str());
  }
}

}  // namespace

PbhVerdict augmented_pbh(const AugmentedPlant& aug) {
  PbhVerdict s = pbh_stabilizable_report(aug.A, aug.B);
  const PbhVerdict d = pbh_detectable_report(aug.Cmeas, aug.A);
  s.holds = s.holds && d.holds;
  s.gap = std::min(s.gap, d.gap);
  s.bad_modes.insert(s.bad_modes.end(), d.bad_modes.begin(), d.bad_modes.end());
  return s;
}

ConditionReport theorem1_check(const PlantMatrices& pm_in, double tol) {
  const PlantMatrices pm = PlantMatrices::with_full_state_measurement(pm_in);
  pm.validate();
  ConditionReport r;
  r.title = "augmented plant with integrators on e = y";
  r.clauses.push_back(stab_detect_clause(pm, tol));
  r.clauses.push_back(full_row_rank_clause("[A B; C D] full row rank", system_matrix(pm)));
  finish(r);
  return r;
}

ConditionReport prop4_check(const PlantMatrices& pm, const ConvexProgram& qp, const Matrix& T0) {
  const Prepared p = prepare(pm, qp);
  ConditionReport r;
  r.title = "RFS model";
  r.clauses.push_back(spans_clause("range T0 is the feasible subspace", T0, p.geo.feasible));
  r.clauses.push_back(stab_detect_clause(p.pm, 1e-9));
  r.clauses.push_back(
      full_row_rank_clause("nonredundant constraints", vstack({p.geo.gperp, p.prog.H})));
  r.clauses.push_back(unique_optimizer_clause(p.prog.qp().M, p.geo.feasible.basis()));
  r.clauses.push_back(full_column_rank_clause("T0 full column rank", T0));
  finish(r);
  cross_validate(r, build_augmented_qp(p.pm, p.prog, OmVariant::kRfs, T0));
  return r;
}

ConditionReport prop5_check(const PlantMatrices& pm, const ConvexProgram& qp, const Matrix& G0) {
  const Prepared p = prepare(pm, qp);
  ConditionReport r;
  r.title = "ROS model";
  r.clauses.push_back(spans_clause("range G0 is the equilibrium output subspace", G0, p.geo.range_g));
  r.clauses.push_back(stab_detect_clause(p.pm, 1e-9));
  r.clauses.push_back(
      full_row_rank_clause("nonredundant constraints", vstack({p.geo.gperp, p.prog.H})));
  r.clauses.push_back(unique_optimizer_clause(p.prog.qp().M, p.geo.feasible.basis()));
  r.clauses.push_back(full_column_rank_clause("G0 full column rank", G0));
  finish(r);
  cross_validate(r, build_augmented_qp(p.pm, p.prog, OmVariant::kRos, G0));
  return r;
}

ConditionReport prop6_check(const PlantMatrices& pm, const ConvexProgram& qp, const Matrix& T0) {
  const Prepared p = prepare(pm, qp);
  if (T0.rows() != p.pm.p() || T0.cols() != p.prog.n_ec()) {
    throw std::invalid_argument("reduced-error model needs T0 of shape p x n_ec, got " +
                                shape_string(T0));
  }
  ConditionReport r;
  r.title = "reduced-error RFS model";
  r.clauses.push_back(spans_clause("range T0 is the feasible subspace", T0, p.geo.feasible));
  r.clauses.push_back(stab_detect_clause(p.pm, 1e-9));
  r.clauses.push_back(unique_optimizer_clause(p.prog.qp().M, p.geo.feasible.basis()));
  // (range HG)^perp and (range T0^T)^perp meet trivially iff [(HG)^T; T0]
  // has full column rank.
  const Matrix hg = p.prog.H * p.geo.G;
  Clause c = full_column_rank_clause("complements of range HG and range T0^T meet trivially",
                                     vstack({hg.transpose(), T0}));
  r.clauses.push_back(c);
  finish(r);
  cross_validate(r, build_augmented_qp(p.pm, p.prog, OmVariant::kRerfs, T0));
  return r;
}

ConditionReport prop4_check(const UncertainPlant& up, const Vector& delta,
                            const ConvexProgram& qp, const Matrix& T0) {
  return prop4_check(up.evaluate(delta), qp.at(delta), T0);
}

ConditionReport prop5_check(const UncertainPlant& up, const Vector& delta,
                            const ConvexProgram& qp, const Matrix& G0) {
  return prop5_check(up.evaluate(delta), qp.at(delta), G0);
}

ConditionReport prop6_check(const UncertainPlant& up, const Vector& delta,
                            const ConvexProgram& qp, const Matrix& T0) {
  return prop6_check(up.evaluate(delta), qp.at(delta), T0);
}

ConditionReport proposition_check(const PlantMatrices& pm, const OptimalityModel& om) {
  switch (om.variant) {
    case OmVariant::kRfs:
      return prop4_check(pm, om.program, om.basis);
    case OmVariant::kRos:
      return prop5_check(pm, om.program, om.basis);
    case OmVariant::kRerfs:
      return prop6_check(pm, om.program, om.basis);
  }
  throw std::invalid_argument("unknown model variant");
}

void Stabilizer::conform(int m, int n, int n_mu, int n_nu, int n_eta) {
  auto fix = [m](Matrix& k, int cols, const char* name) {
    if (k.size() == 0) {
      k = Matrix::Zero(m, cols);
      return;
    }
    if (k.rows() != m || k.cols() != cols) {
      std::ostringstream os;
      os << "stabilizer gain " << name << " has shape " << shape_string(k) << ", expected " << m
         << "x" << cols;
      throw std::invalid_argument(os.str());
    }
  };
  fix(Kx, n, "Kx");
  fix(Kmu, n_mu, "Kmu");
  fix(Knu, n_nu, "Knu");
  fix(Keta, n_eta, "Keta");
  fix(Keps, n_eta, "Keps");
  if (u0.size() == 0) u0 = Vector::Zero(m);
  if (u0.size() != m) throw std::invalid_argument("stabilizer offset u0 has wrong length");
}

Spectrum closed_loop_matrix(const AugmentedPlant& aug, Stabilizer stab) {
  const int m = static_cast<int>(aug.B.cols());
  stab.conform(m, aug.n, aug.n_mu, 0, aug.n_eps);
  const Matrix kz = hstack({stab.Kx, stab.Kmu, stab.Keta});
  const Matrix loop = Matrix::Identity(m, m) + stab.Keps * aug.Deps;
  Eigen::FullPivLU<Matrix> lu(loop);
  if (!lu.isInvertible()) {
    throw NumericalError("algebraic loop I + Keps * Deps is singular");
  }
  Spectrum s;
  s.A_cl = aug.A - aug.B * lu.solve(kz + stab.Keps * aug.Ceps);
  s.eigenvalues = eigenvalues(s.A_cl);
  s.abscissa = spectral_abscissa(s.A_cl);
  return s;
}

namespace {

// Solves X^T P + P X = -S for symmetric P by vectorization.
Matrix solve_lyapunov(const Matrix& X, const Matrix& S) {
  const Eigen::Index n = X.rows();
  const Matrix I = Matrix::Identity(n, n);
  Matrix big = Matrix::Zero(n * n, n * n);
  // vec(X^T P + P X) = (I kron X^T + X^T kron I) vec(P)
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      big.block(i * n, j * n, n, n) += I(i, j) * X.transpose();
      big.block(i * n, j * n, n, n) += X(j, i) * I;
    }
  }
  const Vector rhs = -Eigen::Map<const Vector>(S.data(), n * n);
  Eigen::FullPivLU<Matrix> lu(big);
  if (!lu.isInvertible()) throw NumericalError("Lyapunov equation is singular");
  const Vector sol = lu.solve(rhs);
  Matrix P = Eigen::Map<const Matrix>(sol.data(), n, n);
  return 0.5 * (P + P.transpose());
}

double care_residual(const Matrix& A, const Matrix& G, const Matrix& Q, const Matrix& P) {
  return (A.transpose() * P + P * A - P * G * P + Q).norm();
}

}  // namespace

Matrix solve_care(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R) {
  const Eigen::Index n = A.rows();
  if (n == 0) return Matrix::Zero(0, 0);
  Eigen::LLT<Matrix> rchol(R);
  if (rchol.info() != Eigen::Success) throw std::invalid_argument("LQR weight R is not PD");
  const Matrix G = B * rchol.solve(B.transpose());
  Matrix ham(2 * n, 2 * n);
  ham << A, -G, -Q, -A.transpose();
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(ham.cast<std::complex<double>>());
  if (es.info() != Eigen::Success) throw NumericalError("Hamiltonian eigen-decomposition failed");
  const double scale = std::max(1.0, ham.norm());
  Eigen::MatrixXcd U(2 * n, n);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < 2 * n; ++i) {
    const double re = es.eigenvalues()(i).real();
    if (std::abs(re) <= 1e-9 * scale) {
      throw NumericalError("Hamiltonian has eigenvalues on the imaginary axis");
    }
    if (re < 0.0) {
      if (k == n) throw NumericalError("Hamiltonian stable subspace has wrong dimension");
      U.col(k++) = es.eigenvectors().col(i);
    }
  }
  if (k != n) throw NumericalError("Hamiltonian stable subspace has wrong dimension");
  const Eigen::MatrixXcd u1 = U.topRows(n);
  const Eigen::MatrixXcd u2 = U.bottomRows(n);
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(u1);
  const auto& sv = svd.singularValues();
  if (sv(n - 1) <= 1e-12 * sv(0)) {
    throw NumericalError("Hamiltonian stable eigenvectors are defective");
  }
  const Eigen::MatrixXcd pc = u1.transpose().fullPivLu().solve(u2.transpose()).transpose();
  Matrix P = pc.real();
  P = 0.5 * (P + P.transpose());
  if ((P - P.transpose()).norm() > 1e-9 * std::max(1.0, P.norm())) {
    throw NumericalError("Riccati solution is not symmetric");
  }
  // Newton-Kleinman refinement from the eigenvector solution.
  double res = care_residual(A, G, Q, P);
  for (int it = 0; it < 4 && res > 1e-13 * std::max(1.0, P.norm()); ++it) {
    const Matrix K = rchol.solve(B.transpose() * P);
    const Matrix ak = A - B * K;
    if (spectral_abscissa(ak) >= 0.0) break;
    const Matrix next = solve_lyapunov(ak, Q + K.transpose() * R * K);
    const double nres = care_residual(A, G, Q, next);
    if (!(nres < res)) break;
    P = next;
    res = nres;
  }
  return P;
}

Stabilizer synthesize_lqr(const AugmentedPlant& aug, const Matrix& Q_in, const Matrix& R_in) {
  const int N = aug.dim();
  const int m = static_cast<int>(aug.B.cols());
  const Matrix Q = Q_in.size() ? Q_in : Matrix::Identity(N, N);
  const Matrix R = R_in.size() ? R_in : Matrix::Identity(m, m);
  if (Q.rows() != N || Q.cols() != N || R.rows() != m || R.cols() != m) {
    throw std::invalid_argument("LQR weights have wrong shape");
  }
  if (!pbh_stabilizable(aug.A, aug.B)) {
    throw std::invalid_argument("augmented plant is not stabilizable; LQR synthesis refused");
  }
  const Matrix P = solve_care(aug.A, aug.B, Q, R);
  const Matrix K = R.llt().solve(aug.B.transpose() * P);
  Stabilizer s;
  s.kind = "lqr";
  s.Kx = K.leftCols(aug.n);
  s.Kmu = K.middleCols(aug.n, aug.n_mu);
  s.Knu = Matrix::Zero(m, 0);
  s.Keta = K.rightCols(aug.n_eps);
  s.Keps = Matrix::Zero(m, aug.n_eps);
  s.u0 = Vector::Zero(m);
  if (!closed_loop_matrix(aug, s).hurwitz()) {
    throw NumericalError("LQR closed loop is not Hurwitz");
  }
  return s;
}

}  // namespace oss
