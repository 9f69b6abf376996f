#include "oss/runner.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>

#include "oss/subspaces.hpp"

namespace oss {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

std::string fmt(const Vector& v) {
  std::ostringstream os;
  os << "[";
  for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? ", " : "") << fmt(v(i));
  os << "]";
  return os.str();
}

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

bool expected_holds(const Json& check) { return check.value("holds", true); }

Outcome verdict(const std::string& name, bool actual, const Json& check, std::string detail) {
  const bool want = expected_holds(check);
  return {name, actual == want,
          std::string(actual ? "holds" : "fails") + " (expected " + (want ? "holds" : "fails") +
              ")" + (detail.empty() ? "" : "; " + detail)};
}

std::string witness_text(const RobustnessVerdict& v) {
  if (!v.witness) return "";
  return "witness delta pair " + format_delta(v.witness->first) + " / " +
         format_delta(v.witness->second);
}

/// Closed-loop matrix at an equilibrium by central differences of the
/// right-hand side (used for models that are not equality QPs).
Matrix linearize(const ClosedLoopSystem& sys, const Vector& z) {
  const int d = sys.dim();
  Matrix J(d, d);
  for (int i = 0; i < d; ++i) {
    const double step = 1e-6 * (1.0 + std::abs(z(i)));
    Vector zp = z, zm = z;
    zp(i) += step;
    zm(i) -= step;
    J.col(i) = (sys.rhs(0.0, zp) - sys.rhs(0.0, zm)) / (2.0 * step);
  }
  return J;
}

Spectrum closed_loop_spectrum(const Scenario& s, const Vector& delta) {
  const PlantMatrices pm = s.plant->evaluate(delta);
  const OptimalityModel om = s.om.at(delta);
  if (om.program.is_equality_qp()) return closed_loop_matrix(build_augmented(pm, om), s.stab);
  const ClosedLoopSystem sys(pm, om, s.stab, s.w);
  const EquilibriumResult eq = equilibrium_solve(sys, Vector::Zero(sys.dim()));
  Spectrum sp;
  sp.A_cl = linearize(sys, eq.z);
  sp.eigenvalues = eigenvalues(sp.A_cl);
  sp.abscissa = spectral_abscissa(sp.A_cl);
  return sp;
}

std::vector<std::complex<double>> sorted(ComplexVector v) {
  std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  return v;
}

Matrix feasible_basis(const Scenario& s) {
  const PlantMatrices pm = s.plant->evaluate(s.delta);
  return equilibrium_geometry(pm, s.om.program.at(s.delta).H).feasible.basis();
}

const PowerNetwork& require_network(const Scenario& s, const std::string& what) {
  if (!s.network) throw std::invalid_argument(what + " expectation needs a power network");
  return *s.network;
}

int signal_extrema(const Trajectory& traj, const std::string& signal, double guard) {
  std::vector<double> v;
  v.reserve(traj.signals.size());
  for (const auto& sg : traj.signals) {
    if (signal == "cost") {
      v.push_back(sg.cost);
    } else {
      const Vector& src = signal[0] == 'y' ? sg.y : signal[0] == 'u' ? sg.u : sg.eps;
      const int idx = std::stoi(signal.substr(signal[0] == 'e' ? 3 : 1)) - 1;
      if (idx < 0 || idx >= src.size()) throw std::invalid_argument("unknown signal '" + signal + "'");
      v.push_back(src(idx));
    }
  }
  return count_extrema(traj.times, v, guard);
}

}  // namespace

int RunResult::extrema_of(const std::string& signal) const {
  for (const auto& [name, count] : extrema) {
    if (name == signal) return count;
  }
  throw std::invalid_argument("no extrema recorded for signal '" + signal + "'");
}

bool RunReport::passed() const {
  auto ok = [](const std::vector<Outcome>& v) {
    return std::all_of(v.begin(), v.end(), [](const Outcome& o) { return o.pass; });
  };
  if (!ok(checks) || !ok(comparisons)) return false;
  return std::all_of(runs.begin(), runs.end(), [&](const RunResult& r) { return ok(r.expectations); });
}

bool RunReport::diverged() const {
  return std::any_of(runs.begin(), runs.end(), [](const RunResult& r) { return r.diverged; });
}

int RunReport::exit_code() const {
  if (diverged()) return 3;
  return passed() ? 0 : 1;
}

Json RunReport::to_json() const {
  auto outcomes = [](const std::vector<Outcome>& v) {
    Json a = Json::array();
    for (const auto& o : v) a.push_back({{"name", o.name}, {"pass", o.pass}, {"detail", o.detail}});
    return a;
  };
  Json j;
  j["scenario"] = scenario;
  j["variant"] = variant;
  j["diagnostics"] = diagnostics;
  j["checks"] = outcomes(checks);
  Json runs_j = Json::array();
  for (const auto& r : runs) {
    Json rj;
    rj["label"] = r.label;
    rj["delta"] = to_std(r.delta);
    rj["w"] = to_std(r.w);
    rj["diverged"] = r.diverged;
    rj["final_err"] = r.metrics.final_err;
    rj["settling_time"] = std::isfinite(r.metrics.settling_time) ? Json(r.metrics.settling_time) : Json();
    rj["ise"] = r.metrics.ise;
    rj["y_final"] = to_std(r.y_final);
    rj["u_final"] = to_std(r.u_final);
    rj["y_star"] = to_std(r.y_star);
    rj["oracle_cost"] = r.oracle_cost;
    Json ex = Json::object();
    for (const auto& [name, count] : r.extrema) ex[name] = count;
    rj["extrema"] = ex;
    rj["expectations"] = outcomes(r.expectations);
    runs_j.push_back(rj);
  }
  j["runs"] = runs_j;
  j["comparisons"] = outcomes(comparisons);
  j["passed"] = passed();
  j["exit_code"] = exit_code();
  return j;
}

std::string RunReport::to_text() const {
  std::ostringstream os;
  auto line = [&](const Outcome& o) {
    os << "  [" << (o.pass ? "PASS" : "FAIL") << "] " << o.name << ": " << o.detail << "\n";
  };
  os << "scenario " << scenario << (variant.empty() ? "" : " (variant " + variant + ")") << "\n";
  for (const auto& d : diagnostics) os << "  " << d << "\n";
  for (const auto& c : checks) line(c);
  for (const auto& r : runs) {
    os << "run " << r.label << ": delta=" << format_delta(r.delta) << " w=" << fmt(r.w)
       << (r.diverged ? " DIVERGED" : "") << "\n";
    os << "  final_err=" << fmt(r.metrics.final_err) << " settling_time=" << fmt(r.metrics.settling_time)
       << " ise=" << fmt(r.metrics.ise) << " extrema(cost)=" << r.extrema_of("cost") << "\n";
    os << "  y_final=" << fmt(r.y_final) << " y_star=" << fmt(r.y_star) << "\n";
    for (const auto& e : r.expectations) line(e);
  }
  if (!comparisons.empty()) os << "compare\n";
  for (const auto& c : comparisons) line(c);
  os << "result: " << (exit_code() == 0 ? "PASS" : exit_code() == 3 ? "DIVERGED" : "FAIL") << "\n";
  return os.str();
}

Outcome evaluate_check(const Scenario& s, const Json& check) {
  const std::string type = check.at("type").get<std::string>();
  const UncertainPlant& up = *s.plant;
  const ConvexProgram& prog = s.om.program;
  try {
    if (type == "oracle_output") {
      const PlantMatrices pm = up.evaluate(s.delta);
      const OracleResult r = oracle_optimal_output(prog.at(s.delta), pm, s.w);
      const Vector want = json_vector(check, "y");
      if (want.size() != r.y_star.size()) return {type, false, "wrong length of expected y"};
      const double err = (r.y_star - want).cwiseAbs().maxCoeff();
      const double tol = check.value("tol", 1e-9);
      return {type, err <= tol, "y* = " + fmt(r.y_star) + ", max error " + fmt(err)};
    }
    if (type == "ros") {
      const RobustnessVerdict v = check_ros(up);
      return verdict("ros", v.holds, check, witness_text(v));
    }
    if (type == "rfs") {
      const RobustnessVerdict v = check_rfs(up, prog.H);
      Outcome o = verdict("rfs", v.holds, check, witness_text(v));
      if (o.pass && v.holds && check.value("basis_matches_model", false)) {
        const bool same = subspace_equal(range_basis(s.om.basis), range_basis(*v.basis));
        o.pass = same;
        o.detail += same ? "; range of the model basis equals the feasible subspace"
                         : "; model basis does not span the feasible subspace";
      }
      return o;
    }
    if (type == "robust_full_rank") return verdict(type, check_robust_full_rank(up), check, "");
    if (type == "rerfs_range") {
      const RangeConditionVerdict v = check_rerfs_range_condition(up, prog.H, s.om.basis);
      return verdict(type, v.holds, check, v.witness ? "witness " + format_delta(*v.witness) : "");
    }
    if (type == "prop6_detect") {
      return verdict(type, check_prop6_detectability_condition(up, prog.H, s.om.basis), check, "");
    }
    if (type == "unique_optimizer") {
      if (!prog.objective.quadratic) return {type, false, "objective is not quadratic"};
      const Matrix T = feasible_basis(s);
      return verdict(type, unique_optimizer_check(prog.objective.quadratic->M, T), check,
                     "min restricted eigenvalue " +
                         fmt(min_restricted_eigenvalue(prog.objective.quadratic->M, T)));
    }
    if (type == "theorem1") {
      bool all = true;
      for (const Vector& d : up.samples()) all = all && theorem1_check(up.evaluate(d)).overall;
      return verdict(type, all, check, "");
    }
    if (type == "proposition") {
      bool all = true;
      std::string detail;
      for (const Vector& d : up.samples()) {
        const ConditionReport r = proposition_check(up.evaluate(d), s.om.at(d));
        if (!r.overall && all) detail = r.title + " fails at delta " + format_delta(d);
        all = all && r.overall;
        if (detail.empty()) detail = r.title;
      }
      return verdict(type, all, check, detail);
    }
    if (type == "augmented_stabilizable") {
      const PbhVerdict v = augmented_pbh(build_augmented(up.evaluate(s.delta), s.om.at(s.delta)));
      return verdict(type, v.holds, check, std::to_string(v.bad_modes.size()) + " uncontrollable unstable modes");
    }
    if (type == "pbh_stabilizable") {
      const PbhVerdict v = pbh_stabilizable_report(json_matrix(check, "A"), json_matrix(check, "B"));
      return verdict(type, v.holds, check, std::to_string(v.bad_modes.size()) + " uncontrollable unstable modes");
    }
    if (type == "spectrum") {
      const Spectrum sp = closed_loop_spectrum(s, s.delta);
      const Vector want = json_vector(check, "eigenvalues");
      const auto got = sorted(sp.eigenvalues);
      std::vector<std::complex<double>> exp;
      for (Eigen::Index i = 0; i < want.size(); ++i) exp.emplace_back(want(i), 0.0);
      const auto exp_sorted = sorted(exp);
      if (got.size() != exp_sorted.size()) return {type, false, "closed loop has " + std::to_string(got.size()) + " eigenvalues"};
      double err = 0.0;
      std::ostringstream os;
      for (size_t i = 0; i < got.size(); ++i) {
        err = std::max(err, std::abs(got[i] - exp_sorted[i]));
        os << (i ? ", " : "") << fmt(got[i].real());
        if (got[i].imag() != 0.0) os << (got[i].imag() > 0 ? "+" : "") << fmt(got[i].imag()) << "i";
      }
      const double tol = check.value("tol", 1e-9);
      return {type, err <= tol, "eigenvalues {" + os.str() + "}, max error " + fmt(err)};
    }
    if (type == "hurwitz") {
      bool all = true;
      double worst = -std::numeric_limits<double>::infinity();
      for (const Vector& d : up.samples()) {
        const Spectrum sp = closed_loop_spectrum(s, d);
        worst = std::max(worst, sp.abscissa);
        all = all && sp.hurwitz();
      }
      return verdict(type, all, check, "largest spectral abscissa over samples " + fmt(worst));
    }
  } catch (const NumericalError& e) {
    return {type, false, std::string("numerical error: ") + e.what()};
  } catch (const InfeasibleProgram& e) {
    return {type, false, std::string("infeasible: ") + e.what()};
  } catch (const NonuniqueOptimizer& e) {
    return {type, false, std::string("nonunique optimizer: ") + e.what()};
  }
  throw std::invalid_argument("unknown check type '" + type + "'");
}

RunResult execute_run(const Scenario& s, const RunOptions& opts) {
  const UncertainPlant& up = *s.plant;
  const double h = opts.h.value_or(s.h);
  const double t_end = opts.t_end.value_or(s.t_end);
  if (!(h > 0.0) || !(t_end > 0.0)) throw std::invalid_argument("step and horizon must be positive");

  const ClosedLoopSystem sys = assemble(up, s.delta, s.w, s.om, s.stab);
  const Vector z0 = s.z0.value_or(Vector::Zero(sys.dim()));
  if (z0.size() != sys.dim()) throw std::invalid_argument("initial state has wrong length");
  const Trajectory traj = integrate_rk4(sys, z0, t_end, h, s.stride);

  RunResult r;
  r.label = s.label.empty() ? "run" : s.label;
  r.delta = s.delta;
  r.w = s.w;
  r.diverged = traj.diverged;
  const OracleResult oracle =
      oracle_optimal_output(sys.model().program, sys.plant(), s.w);
  r.y_star = oracle.y_star;
  r.oracle_cost = oracle.cost;
  r.metrics = convergence_metrics(traj, r.y_star);
  r.y_final = traj.signals.back().y;
  r.u_final = traj.signals.back().u;
  if (opts.keep_csv) {
    std::ostringstream os;
    write_csv(os, sys, traj);
    r.csv = os.str();
  }
  const double guard = 0.05 * t_end;
  r.extrema.emplace_back("cost", signal_extrema(traj, "cost", guard));
  for (Eigen::Index i = 0; i < r.y_final.size(); ++i) {
    r.extrema.emplace_back("y" + std::to_string(i + 1), signal_extrema(traj, "y" + std::to_string(i + 1), guard));
  }
  for (Eigen::Index i = 0; i < r.u_final.size(); ++i) {
    r.extrema.emplace_back("u" + std::to_string(i + 1), signal_extrema(traj, "u" + std::to_string(i + 1), guard));
  }

  // Lazily computed closed-loop equilibrium near the final state.
  std::optional<EquilibriumResult> eq;
  auto equilibrium = [&]() -> const EquilibriumResult& {
    if (!eq) eq = equilibrium_solve(sys, traj.states.back());
    return *eq;
  };

  for (const Json& e : s.expect) {
    const std::string type = e.at("type").get<std::string>();
    Outcome o{type, false, ""};
    try {
      if (type == "no_divergence") {
        o.pass = !traj.diverged;
        o.detail = traj.diverged ? "trajectory diverged at t = " + fmt(traj.times.back()) : "bounded";
      } else if (traj.diverged) {
        o.detail = "trajectory diverged";
      } else if (type == "converges") {
        const double tol = e.value("tol", 1e-3);
        const double by = e.value("by", t_end);
        if (by > t_end + 0.5 * h) {
          o.detail = "horizon " + fmt(t_end) + " ends before t = " + fmt(by);
        } else {
          size_t k = 0;
          while (k + 1 < traj.times.size() && traj.times[k] < by - 0.5 * h) ++k;
          double worst = 0.0;
          for (size_t i = k; i < traj.times.size(); ++i) {
            worst = std::max(worst, (traj.signals[i].y - r.y_star).norm());
          }
          o.pass = worst <= tol;
          o.detail = "max ||y - y*|| for t >= " + fmt(by) + " is " + fmt(worst) + " (tol " + fmt(tol) + ")";
        }
      } else if (type == "final_output") {
        const Vector want = json_vector(e, "y");
        const double err = (r.y_final - want).cwiseAbs().maxCoeff();
        o.pass = err <= e.value("tol", 1e-3);
        o.detail = "y(t_end) = " + fmt(r.y_final) + ", max error " + fmt(err);
      } else if (type == "equilibrium_gap") {
        const EquilibriumResult& q = equilibrium();
        const Vector y_bar = sys.signals(q.z).y;
        const double gap = (y_bar - r.y_star).norm();
        const double min_gap = e.at("min").get<double>();
        o.pass = q.residual <= 1e-10 && gap >= min_gap;
        o.detail = "equilibrium y = " + fmt(y_bar) + " (residual " + fmt(q.residual) + "), y* = " +
                   fmt(r.y_star) + ", gap " + fmt(gap) + " (min " + fmt(min_gap) + ")";
      } else if (type == "extrema") {
        const std::string signal = e.value("signal", "cost");
        const int count = r.extrema_of(signal);
        o.pass = (!e.contains("min") || count >= e.at("min").get<int>()) &&
                 (!e.contains("max") || count <= e.at("max").get<int>());
        o.detail = "extrema(" + signal + ") = " + std::to_string(count);
      } else if (type == "cost_match") {
        const double cost = traj.signals.back().cost;
        const double err = std::abs(cost - r.oracle_cost);
        o.pass = err <= e.value("tol", 1e-4);
        o.detail = "final cost " + fmt(cost) + ", oracle cost " + fmt(r.oracle_cost);
      } else if (type == "frequency") {
        const PowerNetwork& net = require_network(s, type);
        const double f = traj.states.back().head(net.n).cwiseAbs().maxCoeff();
        o.pass = f <= e.at("max").get<double>();
        o.detail = "max |omega_i| = " + fmt(f);
      } else if (type == "marginal_spread") {
        const PowerNetwork& net = require_network(s, type);
        const Vector mc = net.a.cwiseProduct(r.u_final) + net.b;
        const double spread = mc.maxCoeff() - mc.minCoeff();
        o.pass = spread <= e.at("max").get<double>();
        o.detail = "marginal costs " + fmt(mc) + ", spread " + fmt(spread);
      } else if (type == "dispatch") {
        PowerNetwork net = require_network(s, type);
        net.injection = s.w;
        const Vector u_opt = dispatch_oracle(net);
        const double err = (r.u_final - u_opt).cwiseAbs().maxCoeff();
        o.pass = err <= e.value("tol", 1e-3);
        o.detail = "u = " + fmt(r.u_final) + ", dispatch oracle " + fmt(u_opt) + ", max error " + fmt(err);
      } else if (type == "optimality_model") {
        const EquilibriumResult& q = equilibrium();
        const OmVerification v = verify_optimality_model(s.om, up, s.delta, s.w, equilibrium_point(sys, q.z));
        o.pass = v.holds;
        o.detail = "equilibrium residual " + fmt(q.residual) + ", ||y_bar - y*|| = " + fmt(v.y_error);
      } else {
        throw std::invalid_argument("unknown expectation type '" + type + "'");
      }
    } catch (const NumericalError& ex) {
      o.detail = std::string("numerical error: ") + ex.what();
    }
    r.expectations.push_back(std::move(o));
  }
  return r;
}

RunReport cmd_check(const ScenarioSet& set) {
  RunReport rep;
  rep.scenario = set.name;
  const Scenario& s = set.base;
  const UncertainPlant& up = *s.plant;
  const ConvexProgram& prog = s.om.program;
  try {
    const RobustnessVerdict ros = check_ros(up);
    rep.diagnostics.push_back("ROS property: " + std::string(ros.holds ? "holds" : "fails") +
                              (ros.holds ? "" : "; " + witness_text(ros)));
    const RobustnessVerdict rfs = check_rfs(up, prog.H);
    rep.diagnostics.push_back("RFS property: " + std::string(rfs.holds ? "holds" : "fails") +
                              (rfs.holds ? "" : "; " + witness_text(rfs)));
    rep.diagnostics.push_back(std::string("robust full rank: ") +
                              (check_robust_full_rank(up) ? "holds" : "fails"));
  } catch (const NumericalError& e) {
    rep.diagnostics.push_back(std::string("robustness analysis failed: ") + e.what());
  }
  for (const Vector& d : up.samples()) {
    const std::string at = " at delta " + format_delta(d);
    try {
      const PlantMatrices pm = up.evaluate(d);
      const ConditionReport t1 = theorem1_check(pm);
      rep.diagnostics.push_back(t1.title + at + ": " + (t1.overall ? "holds" : "fails"));
      if (s.om.program.at(d).is_equality_qp()) {
        const ConditionReport pr = proposition_check(pm, s.om.at(d));
        std::string clauses;
        for (const auto& c : pr.clauses) clauses += " " + c.name + "=" + (c.holds ? "T" : "F");
        rep.diagnostics.push_back(pr.title + at + ": " + (pr.overall ? "holds" : "fails") + " [" +
                                  clauses.substr(clauses.empty() ? 0 : 1) + "]" +
                                  (pr.borderline() ? " (borderline)" : ""));
      }
      const Spectrum sp = closed_loop_spectrum(s, d);
      rep.diagnostics.push_back("closed-loop spectral abscissa" + at + ": " + fmt(sp.abscissa));
    } catch (const std::exception& e) {
      rep.diagnostics.push_back("analysis" + at + " failed: " + e.what());
    }
  }
  for (const Json& c : s.checks) rep.checks.push_back(evaluate_check(s, c));
  return rep;
}

RunReport cmd_run(const ScenarioSet& set, const RunOptions& opts) {
  RunReport rep;
  rep.scenario = set.name;
  std::vector<Scenario> jobs;
  for (const Scenario& s : set.runs) jobs.push_back(s);
  if (jobs.empty()) {
    Scenario s = set.base;
    s.label = "base";
    jobs.push_back(s);
  }
  if (opts.sweep) {
    std::vector<Scenario> swept;
    for (const Scenario& s : jobs) {
      swept.push_back(s);
      for (const Vector& d : s.plant->samples()) {
        if (d.size() == s.delta.size() && (d - s.delta).norm() == 0.0) continue;
        Scenario v = s;
        v.delta = d;
        v.label = s.label + "@" + format_delta(d);
        v.expect = Json::array({Json{{"type", "no_divergence"}}});
        swept.push_back(std::move(v));
      }
    }
    jobs = std::move(swept);
  }

  rep.runs.resize(jobs.size());
  std::vector<std::string> errors(jobs.size());
  auto work = [&](size_t i) {
    try {
      rep.runs[i] = execute_run(jobs[i], opts);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  };
  const size_t workers = opts.sweep ? std::max(1u, std::thread::hardware_concurrency()) : 1;
  if (workers <= 1 || jobs.size() <= 1) {
    for (size_t i = 0; i < jobs.size(); ++i) work(i);
  } else {
    std::vector<std::thread> pool;
    for (size_t t = 0; t < std::min(workers, jobs.size()); ++t) {
      pool.emplace_back([&, t] {
        for (size_t i = t; i < jobs.size(); i += workers) work(i);
      });
    }
    for (auto& th : pool) th.join();
  }
  for (size_t i = 0; i < errors.size(); ++i) {
    if (!errors[i].empty()) throw std::invalid_argument("run '" + jobs[i].label + "': " + errors[i]);
  }

  auto find = [&](const std::string& label) -> const RunResult& {
    for (const auto& r : rep.runs) {
      if (r.label == label) return r;
    }
    throw std::invalid_argument("comparison refers to unknown run '" + label + "'");
  };
  for (const Json& c : set.compare) {
    const std::string type = c.at("type").get<std::string>();
    const RunResult& a = find(c.at("a").get<std::string>());
    const RunResult& b = find(c.at("b").get<std::string>());
    if (type == "extrema_greater") {
      const std::string signal = c.value("signal", "cost");
      const int ea = a.extrema_of(signal), eb = b.extrema_of(signal);
      rep.comparisons.push_back({type, ea > eb, a.label + " has " + std::to_string(ea) + " extrema, " +
                                                    b.label + " has " + std::to_string(eb)});
    } else if (type == "input_l1_less") {
      const double la = a.u_final.lpNorm<1>(), lb = b.u_final.lpNorm<1>();
      rep.comparisons.push_back({type, la < lb, "||u||_1: " + a.label + " " + fmt(la) + ", " +
                                                    b.label + " " + fmt(lb)});
    } else {
      throw std::invalid_argument("unknown comparison type '" + type + "'");
    }
  }
  return rep;
}

Json read_scenario_document(const std::string& name_or_path) {
  std::string text;
  std::string origin = name_or_path;
  std::ifstream in(name_or_path);
  if (in) {
    std::ostringstream os;
    os << in.rdbuf();
    text = os.str();
  } else {
    const auto names = bundled_scenarios();
    if (std::find(names.begin(), names.end(), name_or_path) == names.end()) {
      throw std::invalid_argument("'" + name_or_path + "' is neither a file nor a bundled scenario");
    }
    text = bundled_scenario_text(name_or_path);
    origin = "bundled:" + name_or_path;
  }
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw std::invalid_argument(origin + ": " + e.what());
  }
}

}  // namespace oss
