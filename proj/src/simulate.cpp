#include "oss/simulate.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

namespace oss {

ClosedLoopSystem::ClosedLoopSystem(PlantMatrices pm, OptimalityModel om, Stabilizer stab,
                                   Vector w)
    : pm_(PlantMatrices::with_full_state_measurement(std::move(pm))),
      om_(std::move(om)),
      stab_(std::move(stab)),
      w_(std::move(w)) {
  pm_.validate();
  if (w_.size() != pm_.nw()) {
    throw std::invalid_argument("disturbance w has length " + std::to_string(w_.size()) +
                                ", plant expects " + std::to_string(pm_.nw()));
  }
  om_.program.validate(pm_.nw());
  if (om_.program.p != pm_.p()) {
    throw std::invalid_argument("program output dimension " + std::to_string(om_.program.p) +
                                " does not match plant p = " + std::to_string(pm_.p()));
  }
  stab_.conform(pm_.m(), pm_.n(), om_.n_mu(), om_.n_nu(), om_.eps_dim());
  nu_off_ = pm_.n();
  mu_off_ = nu_off_ + om_.n_nu();
  eta_off_ = mu_off_ + om_.n_mu();
  x_s_off_ = eta_off_ + om_.eps_dim();
  linear_loop_ = om_.program.is_equality_qp();
}

Vector ClosedLoopSystem::solve_input(const Vector& z) const {
  const int n = pm_.n();
  const Vector x = z.head(n);
  OmState st{z.segment(nu_off_, n_nu()), z.segment(mu_off_, n_mu())};
  const Vector eta = z.segment(eta_off_, n_eta());
  const Vector base = -(stab_.Kx * x + stab_.Kmu * st.mu + stab_.Knu * st.nu + stab_.Keta * eta) +
                      stab_.u0;
  if (stab_.Keps.size() == 0 || stab_.Keps.cwiseAbs().maxCoeff() == 0.0) return base;

  const int m = pm_.m();
  auto eps_of = [&](const Vector& u) {
    return om_dynamics(om_, pm_.output(x, u, w_), w_, st).eps;
  };
  if (linear_loop_) {
    // eps is affine in u: eps(u) = eps(0) + E u.
    const Vector e0 = eps_of(Vector::Zero(m));
    Matrix E(n_eta(), m);
    for (int j = 0; j < m; ++j) E.col(j) = eps_of(Vector::Unit(m, j)) - e0;
    const Matrix loop = Matrix::Identity(m, m) + stab_.Keps * E;
    return loop.fullPivLu().solve(base - stab_.Keps * e0);
  }
  Vector u = base;
  for (int it = 0; it < 50; ++it) {
    const Vector g = u - base + stab_.Keps * eps_of(u);
    if (g.norm() <= 1e-13 * (1.0 + u.norm())) break;
    Matrix J(m, m);
    for (int j = 0; j < m; ++j) {
      const double h = 1e-7 * (1.0 + std::abs(u(j)));
      Vector up = u, um = u;
      up(j) += h;
      um(j) -= h;
      J.col(j) = (up - um + stab_.Keps * (eps_of(up) - eps_of(um))) / (2.0 * h);
    }
    u -= J.fullPivLu().solve(g);
  }
  return u;
}

LoopSignals ClosedLoopSystem::signals(const Vector& z) const {
  LoopSignals s;
  s.u = solve_input(z);
  s.y = pm_.output(z.head(pm_.n()), s.u, w_);
  OmState st{z.segment(nu_off_, n_nu()), z.segment(mu_off_, n_mu())};
  s.eps = om_dynamics(om_, s.y, w_, st).eps;
  s.cost = om_.program.objective.value(s.y, w_);
  return s;
}

Vector ClosedLoopSystem::rhs(double /*t*/, const Vector& z) const {
  if (z.size() != dim()) throw std::invalid_argument("closed-loop state has wrong dimension");
  const int n = pm_.n();
  const Vector x = z.head(n);
  const Vector u = solve_input(z);
  const Vector y = pm_.output(x, u, w_);
  OmState st{z.segment(nu_off_, n_nu()), z.segment(mu_off_, n_mu())};
  const OmOutput o = om_dynamics(om_, y, w_, st);
  Vector dz(dim());
  dz.head(n) = pm_.A * x + pm_.B * u + pm_.Bw * w_;
  dz.segment(nu_off_, n_nu()) = o.nu_dot;
  dz.segment(mu_off_, n_mu()) = o.mu_dot;
  dz.segment(eta_off_, n_eta()) = o.eps;
  return dz;
}

ClosedLoopSystem assemble(const UncertainPlant& up, const Vector& delta, const Vector& w,
                          const OptimalityModel& om, const Stabilizer& stab) {
  return ClosedLoopSystem(up.evaluate(delta), om.at(delta), stab, w);
}

Trajectory integrate_rk4(const ClosedLoopSystem& sys, const Vector& z0, double t_end, double h,
                         int stride) {
  if (!(h > 0.0)) throw std::invalid_argument("integration step h must be positive");
  if (!(t_end >= h)) throw std::invalid_argument("t_end must be at least one step");
  if (stride < 1) throw std::invalid_argument("stride must be positive");
  if (z0.size() != sys.dim()) {
    throw std::invalid_argument("initial state has length " + std::to_string(z0.size()) +
                                ", closed loop has " + std::to_string(sys.dim()));
  }
  const long steps = std::lround(t_end / h);
  Trajectory tr;
  Vector z = z0;
  auto record = [&](long k) {
    tr.times.push_back(static_cast<double>(k) * h);
    tr.states.push_back(z);
    tr.signals.push_back(sys.signals(z));
  };
  record(0);
  for (long k = 1; k <= steps; ++k) {
    const double t = static_cast<double>(k - 1) * h;
    const Vector k1 = sys.rhs(t, z);
    const Vector k2 = sys.rhs(t + 0.5 * h, z + 0.5 * h * k1);
    const Vector k3 = sys.rhs(t + 0.5 * h, z + 0.5 * h * k2);
    const Vector k4 = sys.rhs(t + h, z + h * k3);
    z += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!z.allFinite() || z.norm() > 1e12) {
      tr.diverged = true;
      break;
    }
    if (k % stride == 0 || k == steps) record(k);
  }
  return tr;
}

EquilibriumResult equilibrium_solve(const ClosedLoopSystem& sys, const Vector& z_guess,
                                    double tol) {
  const int N = sys.dim();
  if (z_guess.size() != N) throw std::invalid_argument("equilibrium guess has wrong dimension");
  EquilibriumResult res;
  res.z = z_guess;
  Vector F = sys.rhs(0.0, res.z);
  res.residual = F.norm();
  for (int it = 0; it < 100; ++it) {
    if (res.residual <= tol) return res;
    Matrix J(N, N);
    for (int j = 0; j < N; ++j) {
      const double h = 1e-6 * (1.0 + std::abs(res.z(j)));
      Vector zp = res.z, zm = res.z;
      zp(j) += h;
      zm(j) -= h;
      J.col(j) = (sys.rhs(0.0, zp) - sys.rhs(0.0, zm)) / (2.0 * h);
    }
    Eigen::FullPivLU<Matrix> lu(J);
    lu.setThreshold(1e-12);
    if (!lu.isInvertible()) throw NumericalError("closed-loop Jacobian is singular");
    const Vector step = lu.solve(-F);
    double t = 1.0;
    bool accepted = false;
    while (t >= 1.0 / 1024.0) {
      const Vector cand = res.z + t * step;
      const Vector Fc = sys.rhs(0.0, cand);
      if (Fc.norm() < res.residual) {
        res.z = cand;
        F = Fc;
        res.residual = Fc.norm();
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    res.iterations = it + 1;
    if (!accepted) break;
  }
  if (res.residual <= tol) return res;
  throw NumericalError("equilibrium solve did not converge (residual " +
                       std::to_string(res.residual) + ")");
}

EquilibriumPoint equilibrium_point(const ClosedLoopSystem& sys, const Vector& z) {
  EquilibriumPoint eq;
  eq.x = z.head(sys.n());
  eq.state.nu = z.segment(sys.nu_offset(), sys.n_nu());
  eq.state.mu = z.segment(sys.mu_offset(), sys.n_mu());
  eq.u = sys.signals(z).u;
  return eq;
}

int count_extrema(const std::vector<double>& t, const std::vector<double>& v, double guard) {
  size_t start = 0;
  while (start < t.size() && t[start] <= guard) ++start;
  if (start + 1 >= v.size()) return 0;
  double lo = v[start], hi = v[start];
  for (size_t i = start; i < v.size(); ++i) {
    lo = std::min(lo, v[i]);
    hi = std::max(hi, v[i]);
  }
  const double floor = 1e-6 * (hi - lo) + 1e-14 * (1.0 + std::max(std::abs(lo), std::abs(hi)));
  int count = 0;
  int trend = 0;
  const double origin = v[start];
  double running = origin;
  for (size_t i = start + 1; i < v.size(); ++i) {
    const double x = v[i];
    if (trend == 0) {
      if (x - origin > floor) {
        trend = 1;
        running = x;
      } else if (origin - x > floor) {
        trend = -1;
        running = x;
      }
    } else if (trend == 1) {
      if (x > running) {
        running = x;
      } else if (running - x > floor) {
        ++count;
        trend = -1;
        running = x;
      }
    } else {
      if (x < running) {
        running = x;
      } else if (x - running > floor) {
        ++count;
        trend = 1;
        running = x;
      }
    }
  }
  return count;
}

ConvergenceMetrics convergence_metrics(const Trajectory& traj, const Vector& y_star,
                                       double settle_tol) {
  ConvergenceMetrics m;
  const size_t k = traj.times.size();
  if (k == 0) return m;
  std::vector<double> err(k), cost(k);
  for (size_t i = 0; i < k; ++i) {
    err[i] = (traj.signals[i].y - y_star).norm();
    cost[i] = traj.signals[i].cost;
  }
  m.final_err = err.back();
  if (traj.diverged) m.final_err = std::numeric_limits<double>::infinity();
  m.settling_time = traj.times.front();
  if (m.final_err >= settle_tol) {
    m.settling_time = std::numeric_limits<double>::infinity();
  } else {
    for (size_t i = k; i-- > 0;) {
      if (err[i] >= settle_tol) {
        m.settling_time = traj.times[std::min(i + 1, k - 1)];
        break;
      }
    }
  }
  for (size_t i = 1; i < k; ++i) {
    m.ise += 0.5 * (traj.times[i] - traj.times[i - 1]) * (err[i] * err[i] + err[i - 1] * err[i - 1]);
  }
  m.extrema_count = count_extrema(traj.times, cost, 0.05 * traj.times.back());
  return m;
}

void write_csv(std::ostream& os, const ClosedLoopSystem& sys, const Trajectory& traj) {
  const int n = sys.n();
  const int m = sys.plant().m();
  const int p = sys.plant().p();
  const int ne = sys.n_eta();
  os << "t";
  for (int i = 1; i <= n; ++i) os << ",x" << i;
  for (int i = 1; i <= m; ++i) os << ",u" << i;
  for (int i = 1; i <= p; ++i) os << ",y" << i;
  for (int i = 1; i <= ne; ++i) os << ",eps" << i;
  os << ",cost\n";
  char buf[64];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, ",%.15g", v);
    os << buf;
  };
  for (size_t k = 0; k < traj.times.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.15g", traj.times[k]);
    os << buf;
    const Vector& z = traj.states[k];
    const LoopSignals& s = traj.signals[k];
    for (int i = 0; i < n; ++i) put(z(i));
    for (int i = 0; i < m; ++i) put(s.u(i));
    for (int i = 0; i < p; ++i) put(s.y(i));
    for (int i = 0; i < ne; ++i) put(s.eps(i));
    put(s.cost);
    os << '\n';
  }
}

double trajectory_distance(const Trajectory& coarse, const Trajectory& fine) {
  double worst = 0.0;
  size_t j = 0;
  for (size_t i = 0; i < coarse.times.size(); ++i) {
    const double t = coarse.times[i];
    while (j + 1 < fine.times.size() &&
           std::abs(fine.times[j + 1] - t) <= std::abs(fine.times[j] - t)) {
      ++j;
    }
    if (std::abs(fine.times[j] - t) > 1e-9 * (1.0 + std::abs(t))) continue;
    worst = std::max(worst, (coarse.states[i] - fine.states[j]).cwiseAbs().maxCoeff());
  }
  return worst;
}

}  // namespace oss
