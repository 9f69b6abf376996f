// Acceptance criteria, one PASS/FAIL line each. Exit status is nonzero when
// any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <string>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "oss/runner.hpp"
#include "oss/stabilize.hpp"
#include "oss/subspaces.hpp"

namespace {

using namespace oss;
using oss::testing::Defect;
using oss::testing::Rng;

struct Verdict {
  bool pass = true;
  std::ostringstream note;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      note << " [failed: " << what << "]";
    }
  }
};

using Clock = std::chrono::steady_clock;

bool run_criterion(int id, double budget_s, const std::function<void(Verdict&)>& body) {
  Verdict v;
  const auto start = Clock::now();
  try {
    body(v);
  } catch (const std::exception& e) {
    v.pass = false;
    v.note << " [exception: " << e.what() << "]";
  }
  const double secs = std::chrono::duration<double>(Clock::now() - start).count();
  v.require(secs < budget_s, "runtime budget " + std::to_string(budget_s) + " s");
  std::printf("criterion %d: %s (%.2f s)%s\n", id, v.pass ? "PASS" : "FAIL", secs,
              v.note.str().c_str());
  std::fflush(stdout);
  return v.pass;
}

double max_abs(const Vector& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

// 1. Closed-loop equilibria of random QP loops are optimal.
void soundness(Verdict& v) {
  Rng rng(20240501);
  for (OmVariant variant : {OmVariant::kRfs, OmVariant::kRos, OmVariant::kRerfs}) {
    int done = 0, redraws = 0, bad = 0;
    double worst = 0.0;
    while (done < 100) {
      const auto inst = oss::testing::random_qp_instance(rng, variant);
      oss::testing::LoopEquilibrium le;
      try {
        le = oss::testing::solve_loop_equilibrium(inst);
      } catch (const std::invalid_argument&) {
        ++redraws;
        continue;
      }
      ++done;
      const OracleResult o = oracle_optimal_output(inst.program(), inst.pm, inst.w);
      const double err = std::max((le.verification.y_bar - o.y_star).norm(), le.y_error);
      worst = std::max(worst, err);
      if (err > 1e-6 || !le.verification.holds || le.abscissa >= 0.0) ++bad;
    }
    v.note << " " << to_string(variant) << ": max |ybar - y*| = " << worst
           << ", redraws " << redraws << ";";
    v.require(bad == 0, std::to_string(bad) + " " + to_string(variant) + " instances");
  }
}

// 2. Clause verdicts agree with PBH on the augmented plant.
void propositions(Verdict& v) {
  Rng rng(20240502);
  const std::vector<Defect> defects = {
      Defect::kNone,         Defect::kUnstableUncontrollable, Defect::kStableUncontrollable,
      Defect::kUndetectable, Defect::kRedundantConstraint,    Defect::kSingularCost,
      Defect::kDependentBasis, Defect::kExtraConstraintRows};
  for (OmVariant variant : {OmVariant::kRfs, OmVariant::kRos, OmVariant::kRerfs}) {
    int agree = 0, disagree = 0, borderline = 0, rejected = 0, holds = 0;
    for (int i = 0; i < 100; ++i) {
      Defect d = defects[i % defects.size()];
      if (d == Defect::kExtraConstraintRows && variant != OmVariant::kRerfs) d = Defect::kNone;
      const auto inst = oss::testing::random_proposition_instance(rng, variant, d);
      ConditionReport r;
      try {
        r = proposition_check(inst.pm, inst.model());
      } catch (const NumericalError& e) {
        ++disagree;
        v.note << " {" << defect_name(d) << ": " << e.what() << "}";
        continue;
      } catch (const std::invalid_argument&) {
        ++rejected;
        continue;
      }
      if (!r.pbh.has_value() || r.borderline()) {
        ++borderline;
        continue;
      }
      if (r.overall == *r.pbh) {
        ++agree;
        holds += r.overall;
      } else {
        ++disagree;
        v.note << " {" << to_string(variant) << " " << defect_name(d) << " disagrees}";
      }
    }
    v.note << " " << to_string(variant) << ": " << agree << " agree (" << holds << " hold), "
           << borderline << " borderline, " << rejected << " rejected;";
    v.require(disagree == 0, std::to_string(disagree) + " disagreements");
    v.require(agree >= 50, "too few decisive instances");
  }
}

// 3. Equilibrium necessity example.
void equilibrium_necessity(Verdict& v) {
  const ScenarioSet set = oss::testing::bundled_set("equilibrium-necessity");
  const Scenario& s = set.base;
  const OracleResult o = oracle_optimal_output(s.program, s.plant->evaluate(s.delta), s.w);
  v.note << " |y*| = " << o.y_star.norm();
  v.require(o.y_star.norm() <= 1e-14, "oracle output is zero");

  Scenario run = oss::testing::bundled_run("equilibrium-necessity", "w0");
  run.h = 1e-3;
  run.t_end = 30.0;
  const RunResult r = execute_run(run, RunOptions{{}, {}, false, false});
  v.note << ", final error " << r.metrics.final_err << ", settled at t = "
         << r.metrics.settling_time;
  v.require(!r.diverged && r.metrics.final_err <= 1e-3 && r.metrics.settling_time <= 30.0,
            "convergence by t = 30");

  const Scenario kkt = oss::testing::bundled_base("equilibrium-necessity", "kkt-controller");
  const PbhVerdict pbh = augmented_pbh(build_augmented(kkt.plant->evaluate(kkt.delta), kkt.om));
  const ConditionReport rep = proposition_check(kkt.plant->evaluate(kkt.delta), kkt.om);
  v.note << ", kkt-controller stabilizable: " << (pbh.holds ? "yes" : "no");
  v.require(!pbh.holds && !rep.overall, "kkt controller reported not stabilizable");
}

// 4. A model designed at the nominal plant misses the optimizer under perturbation.
void rfs_violation(Verdict& v) {
  const ScenarioSet set = oss::testing::bundled_set("rfs-violation");
  const UncertainPlant& up = *set.base.plant;
  const RobustnessVerdict rfs = check_rfs(up, set.base.program.H);
  v.require(!rfs.holds && rfs.witness.has_value(), "RFS fails with witness");
  if (rfs.witness) v.note << " witness delta = " << rfs.witness->second.transpose();

  const Scenario s = oss::testing::bundled_run("rfs-violation", "delta0.5");
  const ClosedLoopSystem sys = assemble(up, s.delta, s.w, s.om, s.stab);
  const EquilibriumResult eq = equilibrium_solve(sys, Vector::Zero(sys.dim()));
  const Vector y_bar = sys.signals(eq.z).y;
  const Vector y_star = oracle_optimal_output(s.program, up.evaluate(s.delta), s.w).y_star;
  const double gap = (y_bar - y_star).norm();
  v.note << ", Newton residual " << eq.residual << ", gap " << gap;
  v.require(eq.residual <= 1e-10, "equilibrium residual");
  v.require(gap >= 0.01, "gap >= 0.01");
  v.require(std::abs(gap - 0.11094) <= 1e-4, "gap matches frozen 0.11094");
}

// 5. Hand-tuned gains on a plant with eigenvalues {0, 0, 1}.
void no_hurwitz(Verdict& v) {
  const Scenario s = oss::testing::bundled_base("no-hurwitz");
  const PlantMatrices pm = s.plant->evaluate(s.delta);
  const Spectrum sp = closed_loop_matrix(build_augmented(pm, s.om), s.stab);
  std::vector<std::complex<double>> ev = sp.eigenvalues;
  std::sort(ev.begin(), ev.end(), [](auto a, auto b) { return a.real() < b.real(); });
  const std::vector<double> expected = {-3, -2.5, -2, -1.5, -1};
  double err = ev.size() == expected.size() ? 0.0 : INFINITY;
  for (size_t i = 0; i < std::min(ev.size(), expected.size()); ++i) {
    err = std::max(err, std::abs(ev[i] - std::complex<double>(expected[i], 0.0)));
  }
  v.note << " max eigenvalue error " << err;
  v.require(err <= 1e-9, "spectrum");
  const ConditionReport r = prop5_check(pm, s.program, s.om.basis);
  bool all = r.overall;
  for (const Clause& c : r.clauses) all = all && c.holds;
  v.note << ", clauses all true: " << (all ? "yes" : "no");
  v.require(all, "proposition clauses");
}

// 6. Primal-dual against PI on a static plant.
void pd_vs_oss(Verdict& v) {
  std::map<std::string, int> extrema;
  for (const char* label : {"primal-dual", "oss-pi"}) {
    const Scenario s = oss::testing::bundled_run("pd-vs-oss", label);
    const RunResult r = execute_run(s, RunOptions{{}, {}, false, false});
    const double cost = s.program.objective.value(r.y_final, s.w);
    extrema[label] = r.extrema_of("cost");
    v.note << " " << label << ": cost error " << std::abs(cost - r.oracle_cost) << ", extrema "
           << extrema[label] << ";";
    v.require(!r.diverged && std::abs(cost - r.oracle_cost) <= 1e-4,
              std::string(label) + " cost");
    v.require(std::abs(r.oracle_cost - 4.95 / 81.0) <= 1e-9, "oracle cost");
  }
  v.require(extrema["primal-dual"] >= 5, "primal-dual oscillates");
  v.require(extrema["oss-pi"] <= 2, "PI does not oscillate");
  v.require(extrema["primal-dual"] == 50 && extrema["oss-pi"] == 0, "frozen counts 50 / 0");
}

// 7. Frequency regulation on the four-bus line.
void power_network(Verdict& v) {
  const PowerNetwork net = PowerNetwork::default_line4();
  const Vector dispatch = dispatch_oracle(net);
  v.require((dispatch - oss::testing::dispatch_reference(net.a, net.b, net.injection))
                    .cwiseAbs().maxCoeff() <= 1e-12, "dispatch oracle");
  {
    const Scenario s = oss::testing::bundled_run("power-dapi", "nominal");
    const RunResult r = execute_run(s, RunOptions{{}, 100.0, false, false});
    const Vector u = r.y_final.head(net.n);
    const Vector omega = r.y_final.tail(net.n);
    const Vector mc = net.a.cwiseProduct(u) + net.b;
    const double spread = mc.maxCoeff() - mc.minCoeff();
    const double du = max_abs(u - dispatch);
    v.note << " DAPI max|w| " << max_abs(omega) << ", spread " << spread << ", |u - u*| " << du
           << ";";
    v.require(!r.diverged && max_abs(omega) <= 1e-5 && spread <= 1e-4 && du <= 1e-3, "DAPI");
  }
  for (const char* name : {"power-gb", "power-novel"}) {
    const Scenario s = oss::testing::bundled_run(name, "nominal");
    const RunResult r = execute_run(s, RunOptions{{}, {}, false, false});
    const double du = max_abs(r.y_final.head(net.n) - dispatch);
    v.note << " " << name << " |u - u*| " << du << ";";
    v.require(!r.diverged && du <= 1e-3, name);
  }
  const UncertainPlant up = build_swing_plant(net);
  Matrix H = Matrix::Zero(net.n, 2 * net.n);
  H.rightCols(net.n).setIdentity();
  const RobustnessVerdict rfs = check_rfs(up, H);
  Matrix t0 = Matrix::Zero(2 * net.n, net.n);
  t0.topRows(net.n) = net.Lc.transpose();
  const bool basis_ok =
      rfs.basis && subspace_equal(SubspaceBasis::span_of(*rfs.basis), SubspaceBasis::span_of(t0));
  const RobustnessVerdict ros = check_ros(up);
  bool damping_sample = false;
  for (const Vector& d : up.samples()) damping_sample = damping_sample || d(1) != 0.0;
  v.note << " RFS " << (rfs.holds ? "holds" : "fails") << " over " << rfs.samples.size()
         << " samples, ROS " << (ros.holds ? "holds" : "fails");
  v.require(rfs.holds && basis_ok, "RFS with T0 = [Lc^T; 0]");
  v.require(!ros.holds && damping_sample, "ROS fails across damping samples");
}

// 8. Integrator order, gradients and subspace invariants.
void numerics(Verdict& v) {
  int scenarios = 0;
  double worst_ratio = INFINITY;
  for (const std::string& name : bundled_scenarios()) {
    for (const Scenario& s : oss::testing::bundled_set(name).runs) {
      const ClosedLoopSystem sys = assemble(*s.plant, s.delta, s.w, s.om, s.stab);
      const Vector z0 = s.z0 ? *s.z0 : Vector::Zero(sys.dim());
      const double t_end = std::min(s.t_end, 5.0);
      const Trajectory a = integrate_rk4(sys, z0, t_end, 0.02);
      const Trajectory b = integrate_rk4(sys, z0, t_end, 0.01);
      const Trajectory c = integrate_rk4(sys, z0, t_end, 0.005);
      v.require(!a.diverged && !b.diverged && !c.diverged, name + " diverged");
      const double d1 = trajectory_distance(a, b);
      const double d2 = trajectory_distance(b, c);
      double scale = 1.0;
      for (const Vector& z : c.states) scale = std::max(scale, max_abs(z));
      ++scenarios;
      if (d2 <= 1e-12 * scale) continue;  // exact to rounding
      worst_ratio = std::min(worst_ratio, d1 / d2);
      v.require(d1 / d2 >= 8.0, name + "/" + s.label + " step halving ratio " +
                                    std::to_string(d1 / d2));
    }
  }
  v.note << " step halving: " << scenarios << " runs, worst ratio " << worst_ratio << ";";

  Rng rng(20240508);
  double worst_grad = 0.0;
  auto grad_check = [&](const ScalarFn& f, const GradientFn& g, int p, int nw) {
    for (int k = 0; k < 10; ++k) {
      const Vector y = oss::testing::gaussian_vector(rng, p);
      const Vector w = oss::testing::gaussian_vector(rng, nw);
      const double e = std::max(gradient_fd_error(f, g, y, w),
                                oss::testing::fd_gradient_error(f, g, y, w));
      worst_grad = std::max(worst_grad, e);
    }
  };
  for (const std::string& name : bundled_scenarios()) {
    for (const Scenario& s : oss::testing::bundled_set(name).runs) {
      const int nw = static_cast<int>(s.w.size());
      grad_check(s.program.objective.value, s.program.objective.gradient, s.program.p, nw);
      for (const Inequality& q : s.program.inequalities) grad_check(q.value, q.gradient, s.program.p, nw);
    }
  }
  for (SmoothNormKind kind :
       {SmoothNormKind::kL2, SmoothNormKind::kL1LogCosh, SmoothNormKind::kLinfLogSumExp}) {
    grad_check([kind](const Vector& y, const Vector&) { return smooth_norm(kind, y).value; },
               [kind](const Vector& y, const Vector&) { return smooth_norm(kind, y).gradient; },
               5, 1);
  }
  const Objective track = sparse_tracking_objective(3, 2, 0.05, 20.0, 1);
  grad_check(track.value, track.gradient, 5, 4);
  v.note << " worst gradient error " << worst_grad << ";";
  v.require(worst_grad <= 1e-5, "gradients");

  int subspace_failures = 0;
  for (int t = 0; t < 1000; ++t) {
    const int rows = oss::testing::uniform_int(rng, 1, 8);
    const int cols = oss::testing::uniform_int(rng, 1, 8);
    const int r = oss::testing::uniform_int(rng, 0, std::min(rows, cols));
    const Matrix a = oss::testing::random_rank(rng, rows, cols, r);
    const SubspaceBasis nb = null_basis(a);
    const SubspaceBasis rb = range_basis(a);
    bool ok = numerical_rank(a) == r && nb.dim() == cols - r && rb.dim() == r;
    for (const SubspaceBasis* b : {&nb, &rb}) {
      if (b->is_empty()) continue;
      const Matrix gram = b->basis().transpose() * b->basis();
      ok = ok && (gram - Matrix::Identity(b->dim(), b->dim())).cwiseAbs().maxCoeff() <= 1e-12;
    }
    if (!nb.is_empty()) ok = ok && (a * nb.basis()).norm() <= 1e-10;
    const Matrix mix_cols = oss::testing::random_orthogonal(rng, cols) *
                            (Matrix::Identity(cols, cols) * 2.0);
    const Matrix mix_rows = oss::testing::random_orthogonal(rng, rows);
    ok = ok && subspace_equal(range_basis(a * mix_cols), rb);
    ok = ok && subspace_equal(null_basis(mix_rows * a), nb);
    if (!ok) ++subspace_failures;
  }
  v.note << " subspace invariant failures " << subspace_failures << "/1000";
  v.require(subspace_failures == 0, "subspace invariants");
}

}  // namespace

int main() {
  bool ok = true;
  ok &= run_criterion(1, 30.0, soundness);
  ok &= run_criterion(2, 60.0, propositions);
  ok &= run_criterion(3, 5.0, equilibrium_necessity);
  ok &= run_criterion(4, 5.0, rfs_violation);
  ok &= run_criterion(5, 1.0, no_hurwitz);
  ok &= run_criterion(6, 5.0, pd_vs_oss);
  ok &= run_criterion(7, 60.0, power_network);
  ok &= run_criterion(8, 60.0, numerics);
  return ok ? 0 : 1;
}
