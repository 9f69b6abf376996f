#include "oss/optprob.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "oss/subspaces.hpp"

namespace oss {
namespace {

constexpr double kFeasTol = 1e-9;

double log_cosh(double x) {
  const double ax = std::abs(x);
  return ax + std::log1p(std::exp(-2.0 * ax)) - std::log(2.0);
}

double min_eigenvalue(const Matrix& s) {
  if (s.rows() == 0) return std::numeric_limits<double>::infinity();
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (s + s.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

}  // namespace

void QPData::validate(int p, int nw) const {
  if (M.rows() != p || M.cols() != p) {
    throw std::invalid_argument("QP cost matrix M has shape " + shape_string(M) +
                                ", expected " + std::to_string(p) + "x" + std::to_string(p));
  }
  if (N.rows() != p || N.cols() != nw) {
    throw std::invalid_argument("QP matrix N has shape " + shape_string(N) + ", expected " +
                                std::to_string(p) + "x" + std::to_string(nw));
  }
  if (c.size() != 0 && c.size() != p) {
    throw std::invalid_argument("QP linear term c has length " + std::to_string(c.size()));
  }
  if (!M.allFinite() || !N.allFinite() || !c.allFinite()) {
    throw std::invalid_argument("QP data has non-finite entries");
  }
  const double scale = 1.0 + M.cwiseAbs().maxCoeff();
  if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw std::invalid_argument("QP cost matrix M is not symmetric");
  }
  if (min_eigenvalue(M) < -1e-10 * scale) {
    throw std::invalid_argument("QP cost matrix M is not positive semidefinite");
  }
}

double QPData::value(const Vector& y, const Vector& w) const {
  double v = 0.5 * y.dot(M * y) - y.dot(N * w);
  if (c.size() != 0) v += c.dot(y);
  return v;
}

Vector QPData::gradient(const Vector& y, const Vector& w) const {
  Vector g = M * y - N * w;
  if (c.size() != 0) g += c;
  return g;
}

Objective Objective::from_qp(QPData qp) {
  Objective o;
  o.name = "quadratic";
  o.value = [qp](const Vector& y, const Vector& w) { return qp.value(y, w); };
  o.gradient = [qp](const Vector& y, const Vector& w) { return qp.gradient(y, w); };
  o.quadratic = std::move(qp);
  return o;
}

Inequality Inequality::from_affine(AffineInequality a) {
  Inequality q;
  q.value = [a](const Vector& y, const Vector& w) {
    double v = a.a.dot(y) - a.c;
    if (a.bw.size() != 0) v -= a.bw.dot(w);
    return v;
  };
  q.gradient = [a](const Vector&, const Vector&) { return a.a; };
  q.affine = std::move(a);
  return q;
}

const QPData& ConvexProgram::qp() const {
  if (!objective.quadratic) {
    throw std::invalid_argument("program objective '" + objective.name + "' is not quadratic");
  }
  return *objective.quadratic;
}

ConvexProgram ConvexProgram::at(const Vector& delta) const {
  ConvexProgram out = *this;
  if (engineering_at) {
    auto [h, l] = engineering_at(delta);
    out.H = std::move(h);
    out.L = std::move(l);
  }
  return out;
}

void ConvexProgram::validate(int nw) {
  if (p <= 0) throw std::invalid_argument("program output dimension p must be positive");
  if (!objective.value || !objective.gradient) {
    throw std::invalid_argument("program objective is missing value or gradient");
  }
  if (objective.quadratic) objective.quadratic->validate(p, nw);
  if (H.size() == 0) H = Matrix::Zero(0, p);
  if (H.cols() != p) {
    throw std::invalid_argument("H has shape " + shape_string(H) + ", expected n_ec x " +
                                std::to_string(p));
  }
  if (L.size() == 0) L = Matrix::Zero(H.rows(), nw);
  if (L.rows() != H.rows() || L.cols() != nw) {
    throw std::invalid_argument("L has shape " + shape_string(L) + ", expected " +
                                std::to_string(H.rows()) + "x" + std::to_string(nw));
  }
  for (size_t i = 0; i < inequalities.size(); ++i) {
    auto& q = inequalities[i];
    if (!q.value || !q.gradient) {
      throw std::invalid_argument("inequality " + std::to_string(i) + " is incomplete");
    }
    if (q.affine) {
      if (q.affine->a.size() != p) {
        throw std::invalid_argument("inequality " + std::to_string(i) +
                                    " has a gradient of the wrong length");
      }
      if (q.affine->bw.size() != 0 && q.affine->bw.size() != nw) {
        throw std::invalid_argument("inequality " + std::to_string(i) +
                                    " has a disturbance term of the wrong length");
      }
    }
  }
}

Vector ConvexProgram::constraint_values(const Vector& y, const Vector& w) const {
  Vector f(n_ic());
  for (int i = 0; i < n_ic(); ++i) f(i) = inequalities[static_cast<size_t>(i)].value(y, w);
  return f;
}

Matrix ConvexProgram::constraint_gradients(const Vector& y, const Vector& w) const {
  Matrix g(p, n_ic());
  for (int i = 0; i < n_ic(); ++i) g.col(i) = inequalities[static_cast<size_t>(i)].gradient(y, w);
  return g;
}

Vector ConvexProgram::lagrangian_gradient(const Vector& y, const Vector& w,
                                          const Vector& nu) const {
  Vector g = objective.gradient(y, w);
  if (n_ic() > 0) g += constraint_gradients(y, w) * nu;
  return g;
}

ConvexProgram make_qp_program(QPData qp, Matrix H, Matrix L) {
  ConvexProgram prog;
  prog.p = static_cast<int>(qp.M.rows());
  prog.objective = Objective::from_qp(std::move(qp));
  prog.H = std::move(H);
  prog.L = std::move(L);
  return prog;
}

double KKTResidual::max_abs() const {
  double m = 0.0;
  for (const Vector* v : {&stationarity, &primal, &complementarity}) {
    if (v->size() != 0) m = std::max(m, v->cwiseAbs().maxCoeff());
  }
  return m;
}

KKTResidual kkt_residual(const ConvexProgram& prog, const Matrix& gperp, const Vector& b,
                         const KKTPoint& pt, const Vector& w) {
  if (pt.y.size() != prog.p || gperp.cols() != prog.p || pt.lambda.size() != gperp.rows() ||
      b.size() != gperp.rows() || pt.mu.size() != prog.n_ec() ||
      pt.nu.size() != prog.n_ic()) {
    throw std::invalid_argument("kkt_residual: dimension mismatch");
  }
  KKTResidual r;
  r.stationarity = prog.lagrangian_gradient(pt.y, w, pt.nu) + gperp.transpose() * pt.lambda +
                   prog.H.transpose() * pt.mu;
  const Vector f = prog.constraint_values(pt.y, w);
  r.primal.resize(gperp.rows() + prog.n_ec() + prog.n_ic());
  r.primal << gperp * pt.y - b, prog.H * pt.y - prog.L * w, f.cwiseMax(0.0);
  r.complementarity = pt.nu.cwiseProduct(f);
  return r;
}

namespace {

struct ReducedSolution {
  Vector v;
  double min_curvature = 0.0;
  bool bounded = true;
};

// Minimizes a quadratic f0(y0 + Y v) exactly.
ReducedSolution solve_reduced_qp(const QPData& qp, const Matrix& Y, const Vector& y0,
                                 const Vector& w) {
  ReducedSolution out;
  const Matrix hred = Y.transpose() * qp.M * Y;
  const Vector gred = Y.transpose() * qp.gradient(y0, w);
  out.v = solve_linear(hred, -gred, 1e-12);
  const double scale = 1.0 + gred.norm() + hred.norm();
  out.bounded = (hred * out.v + gred).norm() <= 1e-9 * scale;
  const Matrix t = range_basis(Y).basis();
  out.min_curvature = min_eigenvalue(t.transpose() * qp.M * t);
  return out;
}

// Damped Newton on v -> f0(y0 + Y v) with a finite-difference Hessian.
ReducedSolution solve_reduced_smooth(const Objective& obj, const Matrix& Y, const Vector& y0,
                                     const Vector& w) {
  ReducedSolution out;
  const Eigen::Index k = Y.cols();
  out.v = Vector::Zero(k);
  if (k == 0) {
    out.min_curvature = std::numeric_limits<double>::infinity();
    return out;
  }
  auto f = [&](const Vector& v) { return obj.value(y0 + Y * v, w); };
  auto g = [&](const Vector& v) -> Vector { return Y.transpose() * obj.gradient(y0 + Y * v, w); };
  Matrix hess = Matrix::Identity(k, k);
  for (int iter = 0; iter < 200; ++iter) {
    const Vector gv = g(out.v);
    const double step_h = 1e-5 * (1.0 + out.v.norm());
    for (Eigen::Index j = 0; j < k; ++j) {
      Vector vp = out.v, vm = out.v;
      vp(j) += step_h;
      vm(j) -= step_h;
      hess.col(j) = (g(vp) - g(vm)) / (2.0 * step_h);
    }
    hess = 0.5 * (hess + hess.transpose());
    if (gv.norm() <= 1e-13 * (1.0 + std::abs(f(out.v)))) break;
    Eigen::SelfAdjointEigenSolver<Matrix> es(hess);
    Vector ev = es.eigenvalues();
    const double floor = 1e-12 * std::max(1.0, ev.cwiseAbs().maxCoeff());
    for (Eigen::Index j = 0; j < k; ++j) ev(j) = std::max(ev(j), floor);
    const Vector d = -es.eigenvectors() *
                     (es.eigenvectors().transpose() * gv).cwiseQuotient(ev);
    const double f0 = f(out.v);
    double t = 1.0;
    bool moved = false;
    while (t > 1e-12) {
      const Vector cand = out.v + t * d;
      const double fc = f(cand);
      if (std::isfinite(fc) && fc <= f0 + 1e-4 * t * gv.dot(d)) {
        out.v = cand;
        moved = true;
        break;
      }
      t *= 0.5;
    }
    if (!moved) {
      // Armijo cannot make progress at roundoff level; accept a full step
      // if it does not increase f, otherwise stop.
      const Vector cand = out.v + d;
      if (f(cand) <= f0) out.v = cand;
      break;
    }
    if ((t * d).norm() <= 1e-15 * (1.0 + out.v.norm())) break;
  }
  out.min_curvature = min_eigenvalue(hess);
  return out;
}

struct Candidate {
  Vector y;
  Vector z;
  KKTPoint kkt;
  std::vector<int> active;
  double min_curvature = 0.0;
};

}  // namespace

OracleResult oracle_optimal_output(const ConvexProgram& prog_in, const PlantMatrices& pm,
                                   const Vector& w) {
  ConvexProgram prog = prog_in;
  prog.validate(pm.nw());
  if (prog.p != pm.p()) {
    throw std::invalid_argument("program output dimension " + std::to_string(prog.p) +
                                " does not match plant p = " + std::to_string(pm.p()));
  }
  if (w.size() != pm.nw()) throw std::invalid_argument("disturbance w has wrong length");
  const int nic = prog.n_ic();
  if (nic > kMaxOracleInequalities) {
    throw std::invalid_argument("oracle supports at most " +
                                std::to_string(kMaxOracleInequalities) + " inequalities");
  }
  for (const auto& q : prog.inequalities) {
    if (!q.affine) throw std::invalid_argument("oracle supports affine inequalities only");
  }

  const int n = pm.n();
  const int m = pm.m();
  const Matrix K = hstack({pm.C, pm.D});
  const Matrix ab = hstack({pm.A, pm.B});
  const Vector qw = pm.Q * w;
  const Matrix base_e = vstack({ab, prog.H * K});
  Vector base_rhs(n + prog.n_ec());
  base_rhs << -pm.Bw * w, prog.L * w - prog.H * qw;
  const Matrix gperp = equilibrium_geometry(pm, prog.H).gperp;
  const double mscale =
      prog.objective.quadratic ? std::max(1.0, prog.qp().M.norm()) : 1.0;

  std::vector<Candidate> found;
  bool any_feasible = false;
  bool any_degenerate = false;
  const unsigned subsets = 1U << nic;
  for (unsigned mask = 0; mask < subsets; ++mask) {
    std::vector<int> active;
    for (int i = 0; i < nic; ++i) {
      if (mask & (1U << i)) active.push_back(i);
    }
    const auto na = static_cast<Eigen::Index>(active.size());
    Matrix e(base_e.rows() + na, n + m);
    Vector rhs(base_rhs.size() + na);
    e.topRows(base_e.rows()) = base_e;
    rhs.head(base_rhs.size()) = base_rhs;
    for (Eigen::Index j = 0; j < na; ++j) {
      const AffineInequality& a = *prog.inequalities[static_cast<size_t>(active[j])].affine;
      e.row(base_e.rows() + j) = a.a.transpose() * K;
      double r = a.c - a.a.dot(qw);
      if (a.bw.size() != 0) r += a.bw.dot(w);
      rhs(base_rhs.size() + j) = r;
    }
    const Vector z0 = solve_linear(e, rhs);
    if ((e * z0 - rhs).norm() > kFeasTol * (1.0 + rhs.norm())) continue;
    const Matrix Z = null_basis(e).basis();
    const Vector y0 = K * z0 + qw;
    // Free output directions T = range(K Z), with the rank cut taken against
    // K so that roundoff in K Z is not mistaken for a direction. P maps
    // coordinates along T back to the equilibrium parameters: K Z P = T.
    Matrix T = Matrix::Zero(prog.p, 0);
    Matrix P = Matrix::Zero(Z.cols(), 0);
    if (Z.cols() > 0 && prog.p > 0) {
      const Matrix Y = K * Z;
      Eigen::JacobiSVD<Matrix> ysvd(Y, Eigen::ComputeThinU | Eigen::ComputeThinV);
      const Vector& sv = ysvd.singularValues();
      const double cut = kRankTol * std::max(sv(0), K.norm()) *
                         static_cast<double>(std::max(Y.rows(), Y.cols()));
      Eigen::Index r = 0;
      while (r < sv.size() && sv(r) > cut) ++r;
      T = ysvd.matrixU().leftCols(r);
      P = ysvd.matrixV().leftCols(r) * sv.head(r).cwiseInverse().asDiagonal();
    }

    const ReducedSolution rs = prog.objective.quadratic
                                   ? solve_reduced_qp(prog.qp(), T, y0, w)
                                   : solve_reduced_smooth(prog.objective, T, y0, w);
    const Vector y = y0 + T * rs.v;
    const Vector fvals = prog.constraint_values(y, w);
    bool feasible = true;
    for (int i = 0; i < nic; ++i) feasible = feasible && fvals(i) <= kFeasTol * (1.0 + y.norm());
    if (!feasible) continue;
    any_feasible = true;
    if (!rs.bounded) {
      any_degenerate = true;
      continue;
    }

    const Vector grad = prog.objective.gradient(y, w);
    Matrix a_s(prog.p, na);
    for (Eigen::Index j = 0; j < na; ++j) {
      a_s.col(j) = prog.inequalities[static_cast<size_t>(active[j])].affine->a;
    }
    const Matrix stack = hstack({gperp.transpose(), prog.H.transpose(), a_s});
    const Vector mult = solve_linear(stack, -grad);
    if ((stack * mult + grad).norm() > 1e-7 * (1.0 + grad.norm())) continue;
    Candidate c;
    c.y = y;
    c.z = z0 + Z * (P * rs.v);
    c.active = active;
    c.min_curvature = rs.min_curvature;
    c.kkt.y = y;
    c.kkt.lambda = mult.head(gperp.rows());
    c.kkt.mu = mult.segment(gperp.rows(), prog.n_ec());
    c.kkt.nu = Vector::Zero(nic);
    bool dual_ok = true;
    for (Eigen::Index j = 0; j < na; ++j) {
      const double nu = mult(gperp.rows() + prog.n_ec() + j);
      dual_ok = dual_ok && nu >= -1e-9 * (1.0 + grad.norm());
      c.kkt.nu(active[j]) = std::max(nu, 0.0);
    }
    if (!dual_ok) continue;
    if (rs.min_curvature <= 1e-9 * mscale) any_degenerate = true;
    found.push_back(std::move(c));
  }

  if (found.empty()) {
    if (!any_feasible) {
      throw InfeasibleProgram("no forced equilibrium satisfies the program constraints");
    }
    throw NonuniqueOptimizer("objective has no unique minimizer over the feasible set");
  }
  if (any_degenerate) {
    throw NonuniqueOptimizer(
        "objective is not strictly convex on the feasible directions; optimizer is not unique");
  }
  for (const auto& c : found) {
    if ((c.y - found.front().y).norm() > 1e-6 * (1.0 + c.y.norm())) {
      throw NonuniqueOptimizer("two KKT points give different optimal outputs");
    }
  }
  const Candidate& best = found.front();
  OracleResult out;
  out.y_star = best.y;
  out.multipliers = best.kkt;
  out.x_bar = best.z.head(n);
  out.u_bar = best.z.tail(m);
  out.cost = prog.objective.value(best.y, w);
  out.active_set = best.active;
  out.min_curvature = best.min_curvature;
  return out;
}

double min_restricted_eigenvalue(const Matrix& M, const Matrix& T0) {
  if (T0.cols() == 0) return std::numeric_limits<double>::infinity();
  return min_eigenvalue(T0.transpose() * M * T0);
}

bool unique_optimizer_check(const Matrix& M, const Matrix& T0, double tol) {
  if (T0.cols() == 0) return true;
  if (T0.rows() != M.rows()) {
    throw std::invalid_argument("T0 has " + std::to_string(T0.rows()) +
                                " rows, expected " + std::to_string(M.rows()));
  }
  const double scale = std::max(1.0, M.norm()) * std::max(1.0, T0.squaredNorm());
  return min_restricted_eigenvalue(M, T0) > tol * scale;
}

bool nonredundant_check(const Matrix& gperp, const Matrix& H, double tol) {
  const Matrix stacked = vstack({gperp, H});
  return numerical_rank(stacked, tol) == stacked.rows();
}

SmoothNormValue smooth_norm(SmoothNormKind kind, const Vector& y, double beta) {
  if (!(beta > 0.0)) throw std::invalid_argument("smooth_norm: beta must be positive");
  SmoothNormValue out;
  out.gradient = Vector::Zero(y.size());
  switch (kind) {
    case SmoothNormKind::kL2: {
      out.value = y.norm();
      if (out.value > 0.0) out.gradient = y / out.value;
      break;
    }
    case SmoothNormKind::kL1LogCosh: {
      for (Eigen::Index i = 0; i < y.size(); ++i) {
        out.value += log_cosh(beta * y(i)) / beta;
        out.gradient(i) = std::tanh(beta * y(i));
      }
      break;
    }
    case SmoothNormKind::kLinfLogSumExp: {
      if (y.size() == 0) break;
      const double top = beta * y.cwiseAbs().maxCoeff();
      double sum = 0.0;
      for (Eigen::Index i = 0; i < y.size(); ++i) {
        sum += std::exp(beta * y(i) - top) + std::exp(-beta * y(i) - top);
      }
      out.value = (top + std::log(sum) - std::log(2.0 * static_cast<double>(y.size()))) / beta;
      for (Eigen::Index i = 0; i < y.size(); ++i) {
        out.gradient(i) = (std::exp(beta * y(i) - top) - std::exp(-beta * y(i) - top)) / sum;
      }
      break;
    }
  }
  return out;
}

Objective sparse_tracking_objective(int p_m, int m, double theta, double beta,
                                    int ref_offset) {
  if (p_m <= 0 || m < 0 || theta < 0.0 || ref_offset < 0) {
    throw std::invalid_argument("sparse_tracking_objective: invalid parameters");
  }
  auto ref = [p_m, ref_offset](const Vector& w) -> Vector {
    if (w.size() < ref_offset + p_m) {
      throw std::invalid_argument("sparse tracking: disturbance vector too short for reference");
    }
    return w.segment(ref_offset, p_m);
  };
  Objective o;
  o.name = "sparse_tracking";
  o.value = [=](const Vector& y, const Vector& w) {
    const Vector e = y.head(p_m) - ref(w);
    return smooth_norm(SmoothNormKind::kL2, e).value +
           theta * smooth_norm(SmoothNormKind::kL1LogCosh, y.segment(p_m, m), beta).value;
  };
  o.gradient = [=](const Vector& y, const Vector& w) {
    Vector g(p_m + m);
    g.head(p_m) = smooth_norm(SmoothNormKind::kL2, y.head(p_m) - ref(w)).gradient;
    g.tail(m) = theta * smooth_norm(SmoothNormKind::kL1LogCosh, y.segment(p_m, m), beta).gradient;
    return g;
  };
  return o;
}

double gradient_fd_error(const ScalarFn& value, const GradientFn& gradient, const Vector& y,
                         const Vector& w) {
  const Vector g = gradient(y, w);
  const double h = 1e-6 * (1.0 + y.norm());
  Vector fd(y.size());
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    Vector yp = y, ym = y;
    yp(i) += h;
    ym(i) -= h;
    fd(i) = (value(yp, w) - value(ym, w)) / (2.0 * h);
  }
  return (fd - g).norm() / std::max(1.0, g.norm());
}

}  // namespace oss
