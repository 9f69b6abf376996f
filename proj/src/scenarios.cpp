#include "oss/scenarios.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "oss/subspaces.hpp"

namespace oss {

// Defined in the generated bundled_scenarios.cpp.
const std::vector<std::pair<std::string, std::string>>& bundled_scenario_table();

namespace {

[[noreturn]] void schema_error(const std::string& path, const std::string& what) {
  throw std::invalid_argument("scenario key '" + path + "': " + what);
}

const Json& require(const Json& j, const std::string& key, const std::string& path) {
  if (!j.is_object() || !j.contains(key)) schema_error(path + "." + key, "missing");
  return j.at(key);
}

double number_at(const Json& j, const std::string& key, const std::string& path,
                 std::optional<double> fallback = std::nullopt) {
  if (!j.is_object() || !j.contains(key)) {
    if (fallback) return *fallback;
    schema_error(path + "." + key, "missing");
  }
  const Json& v = j.at(key);
  if (!v.is_number()) schema_error(path + "." + key, "expected a number");
  return v.get<double>();
}

Matrix parse_matrix(const Json& v, const std::string& path) {
  if (v.is_object() && v.contains("identity")) {
    const int n = v.at("identity").get<int>();
    return Matrix::Identity(n, n);
  }
  if (v.is_object() && v.contains("zeros")) {
    const Json& z = v.at("zeros");
    if (!z.is_array() || z.size() != 2) schema_error(path, "zeros needs [rows, cols]");
    return Matrix::Zero(z[0].get<int>(), z[1].get<int>());
  }
  if (!v.is_object() || !v.contains("rows") || !v.contains("cols") || !v.contains("data")) {
    schema_error(path, "matrix needs rows, cols and row-major data");
  }
  const int r = v.at("rows").get<int>();
  const int c = v.at("cols").get<int>();
  const Json& d = v.at("data");
  if (r < 0 || c < 0) schema_error(path, "negative dimension");
  if (!d.is_array() || d.size() != static_cast<size_t>(r) * static_cast<size_t>(c)) {
    std::ostringstream os;
    os << "data has " << (d.is_array() ? d.size() : 0) << " entries, expected " << r << "x" << c;
    schema_error(path, os.str());
  }
  Matrix m(r, c);
  for (int i = 0; i < r; ++i) {
    for (int j = 0; j < c; ++j) {
      const Json& e = d[static_cast<size_t>(i * c + j)];
      if (!e.is_number()) schema_error(path, "non-numeric entry");
      m(i, j) = e.get<double>();
    }
  }
  if (!m.allFinite()) schema_error(path, "non-finite entry");
  return m;
}

Vector parse_vector(const Json& v, const std::string& path) {
  if (!v.is_array()) schema_error(path, "expected an array of numbers");
  Vector out(static_cast<Eigen::Index>(v.size()));
  for (size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) schema_error(path, "non-numeric entry");
    out(static_cast<Eigen::Index>(i)) = v[i].get<double>();
  }
  return out;
}

Matrix optional_matrix(const Json& j, const std::string& key, const std::string& path) {
  if (!j.is_object() || !j.contains(key) || j.at(key).is_null()) return Matrix();
  return parse_matrix(j.at(key), path + "." + key);
}

PlantMatrices parse_plant_matrices(const Json& j, const std::string& path, bool partial) {
  PlantMatrices pm;
  const char* keys[] = {"A", "B", "Bw", "C", "D", "Q", "Cm", "Dm", "Qm"};
  Matrix* slots[] = {&pm.A, &pm.B, &pm.Bw, &pm.C, &pm.D, &pm.Q, &pm.Cm, &pm.Dm, &pm.Qm};
  if (!j.is_object()) schema_error(path, "expected an object of plant blocks");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(std::begin(keys), std::end(keys), it.key()) == std::end(keys)) {
      schema_error(path + "." + it.key(), "unknown plant block");
    }
  }
  for (int k = 0; k < 9; ++k) {
    *slots[k] = optional_matrix(j, keys[k], path);
    if (!partial && k < 6 && !j.contains(keys[k])) schema_error(path + "." + keys[k], "missing");
  }
  return pm;
}

PowerNetwork parse_network(const Json& j, const std::string& path) {
  PowerNetwork net = PowerNetwork::default_line4();
  if (j.is_string() && j.get<std::string>() == "default") return net;
  if (!j.is_object()) schema_error(path, "expected \"default\" or an object");
  bool lc_given = false;
  if (j.contains("n")) net.n = j.at("n").get<int>();
  if (j.contains("edges")) {
    net.edges.clear();
    for (const auto& e : j.at("edges")) net.edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
  } else if (j.contains("n")) {
    net.edges.clear();
    for (int i = 0; i + 1 < net.n; ++i) net.edges.emplace_back(i, i + 1);
  }
  auto vec = [&](const char* key, Vector& dst, double fill) {
    if (j.contains(key)) {
      dst = parse_vector(j.at(key), path + "." + key);
    } else if (dst.size() != (std::string(key) == "susceptance" ? net.n_lines() : net.n)) {
      dst = Vector::Constant(std::string(key) == "susceptance" ? net.n_lines() : net.n, fill);
    }
  };
  vec("inertia", net.inertia, 1.0);
  vec("damping", net.damping, 1.0);
  vec("susceptance", net.susceptance, 1.0);
  vec("injection", net.injection, 0.0);
  vec("a", net.a, 1.0);
  vec("b", net.b, 0.0);
  vec("c", net.c, 1.0 / std::max(net.n, 1));
  if (j.contains("Lc")) {
    net.Lc = parse_matrix(j.at("Lc"), path + ".Lc");
    lc_given = true;
  }
  if (!lc_given && net.Lc.rows() != net.n) net.Lc = line_laplacian(net.n);
  net.validate();
  return net;
}

std::vector<Vector> parse_samples(const Json& j, const std::string& path) {
  std::vector<Vector> out;
  if (!j.is_array()) schema_error(path, "expected a list of delta vectors");
  for (size_t i = 0; i < j.size(); ++i) {
    out.push_back(parse_vector(j[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

UncertainPlant parse_plant(const Json& j, const std::optional<PowerNetwork>& net) {
  const std::string path = "plant";
  if (j.contains("builder")) {
    const std::string b = j.at("builder").get<std::string>();
    if (b != "swing") schema_error(path + ".builder", "unknown builder '" + b + "'");
    if (!net) schema_error("network", "swing builder needs a network");
    std::vector<Vector> samples;
    if (j.contains("delta_samples")) samples = parse_samples(j.at("delta_samples"), path + ".delta_samples");
    return build_swing_plant(*net, samples);
  }
  PlantMatrices nominal = parse_plant_matrices(require(j, "nominal", path), path + ".nominal", false);
  std::vector<PlantMatrices> terms;
  if (j.contains("delta_terms")) {
    const Json& t = j.at("delta_terms");
    for (size_t i = 0; i < t.size(); ++i) {
      terms.push_back(parse_plant_matrices(t[i], path + ".delta_terms[" + std::to_string(i) + "]", true));
    }
  }
  std::vector<Vector> samples;
  if (j.contains("delta_samples")) samples = parse_samples(j.at("delta_samples"), path + ".delta_samples");
  std::optional<std::vector<UncertainPlant::Interval>> box;
  if (j.contains("delta_box")) {
    std::vector<UncertainPlant::Interval> b;
    for (const auto& iv : j.at("delta_box")) b.emplace_back(iv.at(0).get<double>(), iv.at(1).get<double>());
    box = b;
  }
  UncertainPlant up = UncertainPlant::affine(nominal, terms, samples, box);
  if (j.value("box_corners", false)) up.add_box_corners();
  return up;
}

Objective parse_objective(const Json& j, int p, const std::string& path) {
  const std::string type = require(j, "type", path).get<std::string>();
  if (type == "quadratic") {
    QPData qp;
    qp.M = parse_matrix(require(j, "M", path), path + ".M");
    qp.N = optional_matrix(j, "N", path);
    if (j.contains("c")) qp.c = parse_vector(j.at("c"), path + ".c");
    return Objective::from_qp(std::move(qp));
  }
  if (type == "sparse_tracking") {
    return sparse_tracking_objective(
        static_cast<int>(number_at(j, "p_m", path)), static_cast<int>(number_at(j, "m", path)),
        number_at(j, "theta", path), number_at(j, "beta", path, 20.0),
        static_cast<int>(number_at(j, "ref_offset", path, 0.0)));
  }
  (void)p;
  schema_error(path + ".type", "unknown objective type '" + type + "'");
}

ConvexProgram parse_program(const Json& j, int p, int nw) {
  const std::string path = "program";
  ConvexProgram prog;
  prog.p = p;
  prog.objective = parse_objective(require(j, "objective", path), p, path + ".objective");
  if (prog.objective.quadratic && prog.objective.quadratic->N.size() == 0) {
    prog.objective.quadratic->N = Matrix::Zero(p, nw);
    prog.objective = Objective::from_qp(*prog.objective.quadratic);
  }
  prog.H = optional_matrix(j, "H", path);
  prog.L = optional_matrix(j, "L", path);
  if (j.contains("inequalities")) {
    const Json& q = j.at("inequalities");
    for (size_t i = 0; i < q.size(); ++i) {
      const std::string ip = path + ".inequalities[" + std::to_string(i) + "]";
      AffineInequality a;
      a.a = parse_vector(require(q[i], "a", ip), ip + ".a");
      if (q[i].contains("bw")) a.bw = parse_vector(q[i].at("bw"), ip + ".bw");
      a.c = number_at(q[i], "c", ip, 0.0);
      prog.inequalities.push_back(Inequality::from_affine(std::move(a)));
    }
  }
  prog.validate(nw);
  return prog;
}

Matrix resolve_basis(const Json& om, OmVariant v, const UncertainPlant& up,
                     const ConvexProgram& prog) {
  const std::string path = "om.basis";
  const Json b = om.value("basis", Json("auto"));
  const PlantMatrices nominal = up.evaluate(up.nominal_delta());
  if (b.is_string()) {
    const std::string s = b.get<std::string>();
    if (s == "dc_gain") return dc_gain(nominal);
    if (s == "identity") return Matrix::Identity(prog.p, prog.p);
    if (s != "auto") schema_error(path, "expected auto, dc_gain, identity or a matrix");
    if (v == OmVariant::kRos) {
      const RobustnessVerdict r = check_ros(up);
      if (!r.holds) schema_error(path, "auto G0 requested but the ROS property fails");
      return *r.basis;
    }
    const RobustnessVerdict r = check_rfs(up, prog.H);
    if (!r.holds) schema_error(path, "auto T0 requested but the RFS property fails");
    return *r.basis;
  }
  return parse_matrix(b, path);
}

Stabilizer parse_stabilizer(const Json& j, const OptimalityModel& om, const UncertainPlant& up) {
  const std::string path = "stabilizer";
  const std::string type = require(j, "type", path).get<std::string>();
  const PlantMatrices nominal = up.evaluate(up.nominal_delta());
  const int m = nominal.m();
  Stabilizer s;
  if (type == "gains") {
    s.Kx = optional_matrix(j, "Kx", path);
    s.Kmu = optional_matrix(j, "Kmu", path);
    s.Knu = optional_matrix(j, "Knu", path);
    s.Keta = optional_matrix(j, "Keta", path);
    s.Keps = optional_matrix(j, "Keps", path);
    if (j.contains("u0")) s.u0 = parse_vector(j.at("u0"), path + ".u0");
  } else if (type == "integral" || type == "pi") {
    if (om.eps_dim() != m) {
      schema_error(path, "integral/pi stabilizers need eps dimension equal to the input count");
    }
    const double ki = type == "integral" ? number_at(j, "gain", path) : number_at(j, "ki", path);
    s.Keta = ki * Matrix::Identity(m, m);
    if (type == "pi") s.Keps = number_at(j, "kp", path) * Matrix::Identity(m, m);
  } else if (type == "lqr") {
    const AugmentedPlant aug = build_augmented(nominal, om);
    s = synthesize_lqr(aug, optional_matrix(j, "Q", path), optional_matrix(j, "R", path));
  } else {
    schema_error(path + ".type", "unknown stabilizer type '" + type + "'");
  }
  s.conform(m, nominal.n(), om.n_mu(), om.n_nu(), om.eps_dim());
  return s;
}

ControllerDesign parse_design(const Json& j, const PowerNetwork& net) {
  const std::string path = "controller";
  const std::string d = require(j, "design", path).get<std::string>();
  if (d == "dapi") return build_dapi(net, number_at(j, "k", path, 1.0));
  if (d == "gather_broadcast") return build_gather_broadcast(net);
  if (d == "novel") {
    const int n = net.n;
    Matrix lt = net.Lc.bottomRows(n - 1);
    const Matrix K1 = j.contains("K1") ? parse_matrix(j.at("K1"), path + ".K1")
                                       : Matrix(number_at(j, "k1", path, 1.0) * Matrix::Ones(n, 1));
    const Matrix K2 = j.contains("K2") ? parse_matrix(j.at("K2"), path + ".K2")
                                       : Matrix(number_at(j, "k2", path, 1.0) * lt.transpose());
    const Matrix K3 = j.contains("K3") ? parse_matrix(j.at("K3"), path + ".K3") : Matrix::Zero(n, n);
    return build_novel_freq_controller(net, K1, K2, K3);
  }
  schema_error(path + ".design", "unknown design '" + d + "'");
}

}  // namespace

Matrix json_matrix(const Json& j, const std::string& key) {
  return parse_matrix(require(j, key, "$"), key);
}

Vector json_vector(const Json& j, const std::string& key) {
  return parse_vector(require(j, key, "$"), key);
}

Json merge_json(Json base, const Json& patch) {
  if (!patch.is_object() || !base.is_object()) return patch;
  for (auto it = patch.begin(); it != patch.end(); ++it) {
    if (base.contains(it.key())) {
      base[it.key()] = merge_json(base[it.key()], it.value());
    } else {
      base[it.key()] = it.value();
    }
  }
  return base;
}

Matrix PowerNetwork::incidence() const {
  Matrix inc = Matrix::Zero(n, n_lines());
  for (int e = 0; e < n_lines(); ++e) {
    inc(edges[static_cast<size_t>(e)].first, e) = 1.0;
    inc(edges[static_cast<size_t>(e)].second, e) = -1.0;
  }
  return inc;
}

void PowerNetwork::validate() const {
  if (n < 1) throw std::invalid_argument("power network needs at least one bus");
  if (n_lines() != n - 1) {
    throw std::invalid_argument("power network must be an acyclic connected graph (n - 1 lines)");
  }
  std::vector<int> parent(static_cast<size_t>(n));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int i) {
    while (parent[static_cast<size_t>(i)] != i) i = parent[static_cast<size_t>(i)];
    return i;
  };
  for (const auto& [u, v] : edges) {
    if (u < 0 || v < 0 || u >= n || v >= n || u == v) {
      throw std::invalid_argument("power network edge has an invalid endpoint");
    }
    const int ru = find(u), rv = find(v);
    if (ru == rv) throw std::invalid_argument("power network graph has a cycle");
    parent[static_cast<size_t>(ru)] = rv;
  }
  auto positive = [](const Vector& v, Eigen::Index len, const char* name) {
    if (v.size() != len) throw std::invalid_argument(std::string("power network ") + name + " has wrong length");
    if ((v.array() <= 0.0).any()) throw std::invalid_argument(std::string("power network ") + name + " must be positive");
  };
  positive(inertia, n, "inertia");
  positive(damping, n, "damping");
  positive(susceptance, n_lines(), "susceptance");
  positive(a, n, "cost curvature a");
  if (injection.size() != n || b.size() != n || c.size() != n) {
    throw std::invalid_argument("power network injection, b or c has wrong length");
  }
  if ((c.array() < 0.0).any() || std::abs(c.sum() - 1.0) > 1e-12) {
    throw std::invalid_argument("convex weights c must be nonnegative and sum to one");
  }
  if (Lc.rows() != n || Lc.cols() != n) throw std::invalid_argument("Laplacian Lc has wrong shape");
  if ((Lc * Vector::Ones(n)).cwiseAbs().maxCoeff() > 1e-12) {
    throw std::invalid_argument("Laplacian Lc rows must sum to zero");
  }
  if (n > 1 && numerical_rank(Lc) != n - 1) {
    throw std::invalid_argument("communication graph needs a globally reachable node");
  }
}

PowerNetwork PowerNetwork::default_line4() {
  PowerNetwork net;
  net.n = 4;
  net.edges = {{0, 1}, {1, 2}, {2, 3}};
  net.inertia = Eigen::Vector4d(1.0, 1.2, 0.8, 1.0);
  net.damping = Vector::Ones(4);
  net.susceptance = Vector::Ones(3);
  net.injection = Eigen::Vector4d(0.3, -0.5, 0.1, -0.4);
  net.a = Eigen::Vector4d(1.0, 2.0, 3.0, 4.0);
  net.b = Vector::Zero(4);
  net.Lc = line_laplacian(4);
  net.c = Vector::Constant(4, 0.25);
  return net;
}

Matrix line_laplacian(int n) {
  Matrix L = Matrix::Zero(n, n);
  for (int i = 0; i + 1 < n; ++i) {
    L(i, i) += 1.0;
    L(i + 1, i + 1) += 1.0;
    L(i, i + 1) -= 1.0;
    L(i + 1, i) -= 1.0;
  }
  return L;
}

std::vector<Vector> default_swing_samples() {
  return {Eigen::Vector3d(0.0, 0.0, 0.0), Eigen::Vector3d(0.0, 0.25, 0.0),
          Eigen::Vector3d(0.0, -0.25, 0.0), Eigen::Vector3d(0.2, 0.1, -0.2),
          Eigen::Vector3d(-0.2, -0.1, 0.2)};
}

UncertainPlant build_swing_plant(const PowerNetwork& net, std::vector<Vector> samples) {
  net.validate();
  if (samples.empty()) samples = default_swing_samples();
  const int n = net.n;
  const int nt = net.n_lines();
  const Matrix inc = net.incidence();
  auto eval = [net, inc, n, nt](const Vector& d) {
    const Vector minv = ((1.0 + d(0)) * net.inertia).cwiseInverse();
    const Vector damp = (1.0 + d(1)) * net.damping;
    const Vector sus = (1.0 + d(2)) * net.susceptance;
    PlantMatrices pm;
    pm.A = Matrix::Zero(n + nt, n + nt);
    pm.A.topLeftCorner(n, n) = Matrix((-minv.cwiseProduct(damp)).asDiagonal());
    pm.A.topRightCorner(n, nt) = -(minv.asDiagonal() * inc);
    pm.A.bottomLeftCorner(nt, n) = sus.asDiagonal() * inc.transpose();
    pm.B = Matrix::Zero(n + nt, n);
    pm.B.topRows(n) = minv.asDiagonal();
    pm.Bw = pm.B;
    pm.C = Matrix::Zero(2 * n, n + nt);
    pm.C.block(n, 0, n, n) = Matrix::Identity(n, n);
    pm.D = Matrix::Zero(2 * n, n);
    pm.D.topRows(n) = Matrix::Identity(n, n);
    pm.Q = Matrix::Zero(2 * n, n);
    return pm;
  };
  std::vector<UncertainPlant::Interval> box(3, {-0.5, 0.5});
  return UncertainPlant(eval, 3, std::move(samples), box);
}

ConvexProgram build_dispatch_program(const PowerNetwork& net, const Matrix& F) {
  const int n = net.n;
  if (F.cols() != n) throw std::invalid_argument("frequency constraint F must have n columns");
  QPData qp;
  qp.M = Matrix::Zero(2 * n, 2 * n);
  qp.M.topLeftCorner(n, n) = net.a.asDiagonal();
  qp.N = Matrix::Zero(2 * n, n);
  qp.c = Vector::Zero(2 * n);
  qp.c.head(n) = net.b;
  Matrix H = Matrix::Zero(F.rows(), 2 * n);
  H.rightCols(n) = F;
  return make_qp_program(std::move(qp), H, Matrix::Zero(F.rows(), n));
}

Vector dispatch_oracle(const PowerNetwork& net) {
  const Vector inv = net.a.cwiseInverse();
  const double alpha = (-net.injection.sum() + net.b.cwiseProduct(inv).sum()) / inv.sum();
  return (Vector::Constant(net.n, alpha) - net.b).cwiseProduct(inv);
}

ControllerDesign build_dapi(const PowerNetwork& net, double k) {
  net.validate();
  if (!(k > 0.0)) throw std::invalid_argument("DAPI gain k must be positive");
  const int n = net.n;
  Matrix T0 = Matrix::Zero(2 * n, n);
  T0.topRows(n) = net.Lc.transpose();
  ControllerDesign d;
  d.om = make_rerfs(build_dispatch_program(net, Matrix::Identity(n, n)), T0);
  d.stab.Keta = Matrix::Identity(n, n) / k;
  return d;
}

ControllerDesign build_novel_freq_controller(const PowerNetwork& net, const Matrix& K1,
                                             const Matrix& K2, const Matrix& K3) {
  net.validate();
  const int n = net.n;
  if (n < 2) throw std::invalid_argument("novel controller needs at least two buses");
  if (K1.rows() != n || K1.cols() != 1 || K2.rows() != n || K2.cols() != n - 1 ||
      K3.rows() != n || K3.cols() != n) {
    throw std::invalid_argument("novel controller gains have wrong shapes");
  }
  Matrix T0 = Matrix::Zero(2 * n, n - 1);
  T0.topRows(n) = net.Lc.bottomRows(n - 1).transpose();
  ControllerDesign d;
  d.om = make_rfs(build_dispatch_program(net, net.c.transpose()), T0);
  d.stab.Kx = Matrix::Zero(n, n + net.n_lines());
  d.stab.Kx.leftCols(n) = K3;
  d.stab.Keta = hstack({K1, K2});
  return d;
}

ControllerDesign build_gather_broadcast(const PowerNetwork& net) {
  net.validate();
  const int n = net.n;
  ControllerDesign d;
  d.om = make_rfs(build_dispatch_program(net, net.c.transpose()), Matrix::Zero(2 * n, 0));
  d.stab.Keta = net.a.cwiseInverse();
  d.stab.u0 = -net.b.cwiseQuotient(net.a);
  return d;
}

Scenario load_scenario(const Json& doc) {
  if (!doc.is_object()) schema_error("$", "scenario must be a JSON object");
  Scenario s;
  s.name = require(doc, "name", "$").get<std::string>();
  s.description = doc.value("description", "");
  if (doc.contains("network")) s.network = parse_network(doc.at("network"), "network");
  s.plant.emplace(parse_plant(require(doc, "plant", "$"), s.network));
  const UncertainPlant& up = *s.plant;
  const PlantMatrices nominal = up.evaluate(up.nominal_delta());

  if (doc.contains("controller")) {
    if (!s.network) schema_error("controller", "controller designs need a network");
    ControllerDesign d = parse_design(doc.at("controller"), *s.network);
    s.program = d.om.program;
    s.program.validate(nominal.nw());
    s.om = d.om;
    s.om.program = s.program;
    s.stab = d.stab;
  } else {
    s.program = parse_program(require(doc, "program", "$"), nominal.p(), nominal.nw());
    const Json& om = require(doc, "om", "$");
    const OmVariant v = parse_om_variant(require(om, "variant", "om").get<std::string>());
    PhiNu phi;
    if (om.contains("phi")) phi.kind = parse_phi_kind(om.at("phi").get<std::string>());
    s.om = make_model(v, s.program, resolve_basis(om, v, up, s.program), phi);
  }
  if (doc.contains("stabilizer")) {
    s.stab = parse_stabilizer(doc.at("stabilizer"), s.om, up);
  }
  s.stab.conform(nominal.m(), nominal.n(), s.om.n_mu(), s.om.n_nu(), s.om.eps_dim());

  const Json sim = doc.value("sim", Json::object());
  s.w = sim.contains("w") ? parse_vector(sim.at("w"), "sim.w") : Vector::Zero(nominal.nw());
  if (s.network && !sim.contains("w")) s.w = s.network->injection;
  s.delta = sim.contains("delta") ? parse_vector(sim.at("delta"), "sim.delta") : up.nominal_delta();
  s.h = number_at(sim, "h", "sim", 1e-3);
  s.t_end = number_at(sim, "t_end", "sim", 10.0);
  s.stride = static_cast<int>(number_at(sim, "stride", "sim", 1.0));
  if (sim.contains("z0")) {
    const Json& z = sim.at("z0");
    const int n = nominal.n();
    const int dim = n + s.om.n_nu() + s.om.n_mu() + s.om.eps_dim();
    Vector z0 = Vector::Zero(dim);
    if (z.is_array()) {
      z0 = parse_vector(z, "sim.z0");
      if (z0.size() != dim) schema_error("sim.z0", "expected " + std::to_string(dim) + " entries");
    } else {
      auto put = [&](const char* key, int off, int len) {
        if (!z.contains(key)) return;
        const Vector v = parse_vector(z.at(key), std::string("sim.z0.") + key);
        if (v.size() != len) schema_error(std::string("sim.z0.") + key, "wrong length");
        z0.segment(off, len) = v;
      };
      put("x", 0, n);
      put("nu", n, s.om.n_nu());
      put("mu", n + s.om.n_nu(), s.om.n_mu());
      put("eta", n + s.om.n_nu() + s.om.n_mu(), s.om.eps_dim());
    }
    s.z0 = z0;
  }
  if (s.w.size() != nominal.nw()) schema_error("sim.w", "wrong length");
  s.checks = doc.value("checks", Json::array());
  return s;
}

ScenarioSet load_scenario_set(const Json& doc_in, const std::string& variant) {
  Json doc = doc_in;
  if (!variant.empty()) {
    if (!doc.contains("variants") || !doc.at("variants").contains(variant)) {
      schema_error("variants." + variant, "unknown variant");
    }
    const Json v = doc.at("variants").at(variant);
    doc = merge_json(doc, v.value("set", Json::object()));
    doc["checks"] = v.value("checks", Json::array());
    doc["runs"] = v.value("runs", Json::array());
    doc["compare"] = v.value("compare", Json::array());
  }
  ScenarioSet set;
  set.base = load_scenario(doc);
  set.name = set.base.name;
  set.compare = doc.value("compare", Json::array());
  const Json runs = doc.value("runs", Json::array());
  for (size_t i = 0; i < runs.size(); ++i) {
    Json rdoc = merge_json(doc, runs[i].value("set", Json::object()));
    Scenario s = load_scenario(rdoc);
    s.label = runs[i].value("label", "run" + std::to_string(i + 1));
    s.expect = runs[i].value("expect", Json::array());
    s.checks = Json::array();
    set.runs.push_back(std::move(s));
  }
  return set;
}

std::vector<std::string> bundled_scenarios() {
  std::vector<std::string> names;
  for (const auto& [name, text] : bundled_scenario_table()) names.push_back(name);
  return names;
}

std::string bundled_scenario_text(const std::string& name) {
  for (const auto& [n, text] : bundled_scenario_table()) {
    if (n == name) return text;
  }
  throw std::invalid_argument("unknown bundled scenario '" + name + "'");
}

}  // namespace oss
