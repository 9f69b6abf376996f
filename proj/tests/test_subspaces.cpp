#include <algorithm>
#include <numeric>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "oss/subspaces.hpp"

namespace {

using namespace oss;
using oss::testing::Rng;

Matrix mat(int r, int c, std::initializer_list<double> v) {
  Matrix m(r, c);
  auto it = v.begin();
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = *it++;
  return m;
}

double max_abs(const Matrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

SubspaceBasis span(const Matrix& m) { return SubspaceBasis::span_of(m); }

// Feasible directions of the dispatch problem: col(v, 0) with 1^T v = 0.
Matrix zero_sum_inputs(int n) {
  Matrix m = Matrix::Zero(2 * n, n - 1);
  for (int i = 0; i + 1 < n; ++i) {
    m(i, i) = 1.0;
    m(i + 1, i) = -1.0;
  }
  return m;
}

TEST(EquilibriumGeometry, PerturbedPlantDirections) {
  const Scenario s = oss::testing::bundled_base("rfs-violation");
  for (double d : {-0.5, 0.0, 0.5}) {
    const EquilibriumGeometry geo =
        equilibrium_geometry(s.plant->evaluate(Vector::Constant(1, d)), s.program.H);
    EXPECT_TRUE(subspace_equal(geo.range_g, span(mat(2, 1, {1, 1 + d})))) << d;
  }
}

TEST(EquilibriumGeometry, Invariants) {
  Rng rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    const auto inst = oss::testing::random_proposition_instance(rng, OmVariant::kRfs,
                                                                oss::testing::Defect::kNone);
    const PlantMatrices& pm = inst.pm;
    const EquilibriumGeometry geo = equilibrium_geometry(pm, inst.H);
    const Matrix ab = hstack({pm.A, pm.B});
    EXPECT_LE(max_abs(ab * geo.null_ab), 1e-8 * (1.0 + ab.norm()));
    EXPECT_LE(max_abs(geo.gperp * geo.G), 1e-8 * (1.0 + geo.G.norm()));
    EXPECT_EQ(geo.gperp.rows() + geo.range_g.dim(), pm.p());
    const SubspaceBasis expect = subspace_intersection(geo.range_g, null_basis(inst.H));
    EXPECT_TRUE(subspace_equal(geo.feasible, expect));
  }
}

TEST(EquilibriumGeometry, DcGainForInvertibleA) {
  Rng rng(37);
  for (int trial = 0; trial < 50; ++trial) {
    const auto inst = oss::testing::random_qp_instance(rng, OmVariant::kRos);
    const EquilibriumGeometry geo = equilibrium_geometry(inst.pm, Matrix::Zero(0, inst.pm.p()));
    const Matrix dc = inst.pm.D - inst.pm.C * inst.pm.A.inverse() * inst.pm.B;
    EXPECT_LE(max_abs(geo.G - dc * geo.null_ab.bottomRows(inst.pm.m())), 1e-8);
    EXPECT_TRUE(subspace_equal(geo.range_g, range_basis(dc)));
  }
}

TEST(EquilibriumGeometry, EquilibriumOutputsFormAffineSet) {
  Rng rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    const auto inst = oss::testing::random_proposition_instance(rng, OmVariant::kRfs,
                                                                oss::testing::Defect::kNone);
    const PlantMatrices& pm = inst.pm;
    const EquilibriumGeometry geo = equilibrium_geometry(pm, Matrix::Zero(0, pm.p()));
    const Vector b = equilibrium_offset(pm, geo, inst.w);
    const Matrix ab = hstack({pm.A, pm.B});
    const Vector xu0 = ab.completeOrthogonalDecomposition().solve(-pm.Bw * inst.w);
    ASSERT_LE((ab * xu0 + pm.Bw * inst.w).norm(), 1e-9);
    for (int k = 0; k < 10; ++k) {
      const Vector xu = xu0 + geo.null_ab * oss::testing::gaussian_vector(rng, geo.null_ab.cols());
      const Vector y = pm.output(xu.head(pm.n()), xu.tail(pm.m()), inst.w);
      EXPECT_LE((geo.gperp * y - b).norm(), 1e-8 * (1.0 + y.norm()));
    }
  }
}

TEST(EquilibriumGeometry, IndependentOfStateCoordinates) {
  Rng rng(43);
  for (int trial = 0; trial < 30; ++trial) {
    const auto inst = oss::testing::random_proposition_instance(rng, OmVariant::kRfs,
                                                                oss::testing::Defect::kNone);
    const int n = inst.pm.n();
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    Eigen::PermutationMatrix<Eigen::Dynamic> P(n);
    for (int i = 0; i < n; ++i) P.indices()(i) = perm[i];
    PlantMatrices moved = inst.pm;
    moved.A = P.transpose() * inst.pm.A * P;
    moved.B = P.transpose() * inst.pm.B;
    moved.Bw = P.transpose() * inst.pm.Bw;
    moved.C = inst.pm.C * P;
    moved.Cm = inst.pm.Cm * P;
    const EquilibriumGeometry g1 = equilibrium_geometry(inst.pm, inst.H);
    const EquilibriumGeometry g2 = equilibrium_geometry(moved, inst.H);
    EXPECT_TRUE(subspace_equal(g1.range_g, g2.range_g));
    EXPECT_TRUE(subspace_equal(g1.feasible, g2.feasible));
  }
}

TEST(CheckRos, Examples) {
  const Scenario b = oss::testing::bundled_base("equilibrium-necessity");
  const RobustnessVerdict vb = check_ros(*b.plant);
  ASSERT_TRUE(vb.holds);
  EXPECT_TRUE(subspace_equal(span(*vb.basis), span(mat(2, 1, {1, 1}))));

  const Scenario c = oss::testing::bundled_base("rfs-violation");
  const RobustnessVerdict vc = check_ros(*c.plant);
  EXPECT_FALSE(vc.holds);
  ASSERT_TRUE(vc.witness.has_value());
  EXPECT_EQ(vc.witness->first(0), 0.0);
  EXPECT_EQ(vc.witness->second(0), 0.5);
  EXPECT_EQ(vc.samples.size(), 3u);

  Rng rng(47);
  for (int trial = 0; trial < 20; ++trial) {
    const auto inst = oss::testing::random_qp_instance(rng, OmVariant::kRfs);
    EXPECT_TRUE(check_ros(UncertainPlant::nominal(inst.pm)).holds);
  }
}

TEST(CheckRfs, PowerNetwork) {
  const PowerNetwork net = PowerNetwork::default_line4();
  const UncertainPlant up = build_swing_plant(net);
  EXPECT_FALSE(check_ros(up).holds);
  const Matrix expect = zero_sum_inputs(4);
  for (const Matrix& F : {Matrix(Matrix::Identity(4, 4)), Matrix(net.c.transpose())}) {
    const Matrix H = hstack({Matrix::Zero(F.rows(), 4), F});
    const RobustnessVerdict v = check_rfs(up, H);
    ASSERT_TRUE(v.holds);
    EXPECT_TRUE(subspace_equal(span(*v.basis), span(expect)));
  }
}

TEST(CheckRfs, PerturbedPlantFails) {
  const Scenario c = oss::testing::bundled_base("rfs-violation");
  const RobustnessVerdict v = check_rfs(*c.plant, c.program.H);
  EXPECT_FALSE(v.holds);
  EXPECT_TRUE(v.witness.has_value());
}

TEST(CheckRfs, DeltaDependentConstraint) {
  const Scenario c = oss::testing::bundled_base("rfs-violation");
  // range G(delta) = span (1, 1 + delta). H(delta) = [2 + delta, -1] never
  // vanishes on it, so only y = 0 remains feasible at every sample.
  DeltaMatrix pins = [](const Vector& d) { return mat(1, 2, {2 + d(0), -1}); };
  const RobustnessVerdict v = check_rfs(*c.plant, pins);
  ASSERT_TRUE(v.holds);
  EXPECT_EQ(v.basis->cols(), 0);
  // H(delta) = [1 + delta, -1] vanishes on range G(delta), which moves.
  DeltaMatrix follows = [](const Vector& d) { return mat(1, 2, {1 + d(0), -1}); };
  EXPECT_FALSE(check_rfs(*c.plant, follows).holds);
}

// Random affine families: disturbance-only terms keep range G fixed.
UncertainPlant random_family(Rng& rng, bool move_a) {
  const auto inst = oss::testing::random_qp_instance(rng, OmVariant::kRfs);
  PlantMatrices term;
  term.Bw = oss::testing::gaussian(rng, inst.pm.n(), inst.pm.nw());
  if (move_a) term.A = 0.1 * oss::testing::gaussian(rng, inst.pm.n(), inst.pm.n());
  return UncertainPlant::affine(inst.pm, {term},
                                {Vector::Zero(1), Vector::Constant(1, 0.5), Vector::Constant(1, -0.5)});
}

TEST(CheckRfs, RosImpliesRfs) {
  Rng rng(53);
  int ros_count = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const UncertainPlant up = random_family(rng, trial % 2 == 1);
    const int p = up.evaluate(Vector::Zero(1)).p();
    const Matrix H = oss::testing::gaussian(rng, oss::testing::uniform_int(rng, 0, 1), p);
    const bool ros = check_ros(up).holds;
    ros_count += ros;
    if (ros) EXPECT_TRUE(check_rfs(up, H).holds) << "trial " << trial;
  }
  EXPECT_GE(ros_count, 25);
}

TEST(RobustFullRank, Examples) {
  const Scenario d = oss::testing::bundled_base("no-hurwitz");
  const PlantMatrices pd = d.plant->evaluate(Vector::Zero(0));
  const Matrix sys = vstack({hstack({pd.A, pd.B}), hstack({pd.C, pd.D})});
  const bool rank_oracle = Eigen::FullPivLU<Matrix>(sys).rank() == sys.rows();
  EXPECT_EQ(check_robust_full_rank(*d.plant), rank_oracle);

  EXPECT_FALSE(check_robust_full_rank(build_swing_plant(PowerNetwork::default_line4())));

  PlantMatrices integrator;
  integrator.A = Matrix::Zero(1, 1);
  integrator.B = Matrix::Ones(1, 1);
  integrator.Bw = Matrix::Zero(1, 1);
  integrator.C = Matrix::Ones(1, 1);
  integrator.D = Matrix::Zero(1, 1);
  integrator.Q = Matrix::Zero(1, 1);
  EXPECT_TRUE(check_robust_full_rank(UncertainPlant::nominal(integrator)));
}

TEST(RobustFullRank, ImpliesRosWithIdentity) {
  Rng rng(59);
  int full = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const UncertainPlant up = random_family(rng, true);
    if (!check_robust_full_rank(up)) continue;
    ++full;
    const RobustnessVerdict v = check_ros(up);
    ASSERT_TRUE(v.holds);
    const int p = up.evaluate(Vector::Zero(1)).p();
    EXPECT_TRUE(subspace_equal(span(*v.basis), SubspaceBasis::full(p)));
  }
  EXPECT_GT(full, 5);
}

TEST(RerfsRange, Examples) {
  const Scenario dapi = oss::testing::bundled_base("power-dapi");
  const Matrix& H = dapi.program.H;
  const Matrix& T0 = dapi.om.basis;
  EXPECT_TRUE(check_rerfs_range_condition(*dapi.plant, H, T0).holds);
  EXPECT_TRUE(check_prop6_detectability_condition(*dapi.plant, H, T0));

  const Scenario c = oss::testing::bundled_base("rfs-violation");
  const PlantMatrices pc = c.plant->evaluate(Vector::Zero(1));
  // No engineering constraints: both conditions hold vacuously.
  EXPECT_TRUE(check_rerfs_range_condition(*c.plant, Matrix::Zero(0, 2), Matrix::Zero(2, 0)).holds);
  EXPECT_TRUE(rerfs_detectability_condition_at(pc, Matrix::Zero(0, 2), Matrix::Zero(2, 0)));
  // Square invertible T0^T with H G != 0 forces a common direction.
  const RangeConditionVerdict bad =
      check_rerfs_range_condition(*c.plant, Matrix::Identity(2, 2), Matrix::Identity(2, 2));
  EXPECT_FALSE(bad.holds);
  EXPECT_TRUE(bad.witness.has_value());
  EXPECT_TRUE(rerfs_detectability_condition_at(pc, Matrix::Identity(2, 2), Matrix::Identity(2, 2)));
  // H G = 0 with a rank-deficient T0^T leaves a common complement direction.
  const Matrix h0 = mat(2, 2, {0, 0, 0, 0});
  const Matrix t_def = mat(2, 2, {1, 1, 0, 0});
  EXPECT_TRUE(rerfs_range_condition_at(pc, h0, t_def));
  EXPECT_FALSE(rerfs_detectability_condition_at(pc, h0, t_def));
}

TEST(RerfsRange, MatchesIntersectionOracle) {
  Rng rng(61);
  for (int trial = 0; trial < 60; ++trial) {
    const auto defect = trial % 2 ? oss::testing::Defect::kExtraConstraintRows
                                  : oss::testing::Defect::kNone;
    const auto inst = oss::testing::random_proposition_instance(rng, OmVariant::kRerfs, defect);
    const Matrix hg = inst.H * equilibrium_geometry(inst.pm, inst.H).G;
    const Matrix t = inst.basis.transpose();
    const int k = static_cast<int>(inst.H.rows());
    auto rank = [](const Matrix& m) {
      return m.size() ? static_cast<int>(Eigen::JacobiSVD<Matrix>(m).singularValues().unaryExpr(
                                             [&](double s) { return s > 1e-9 ? 1.0 : 0.0; }).sum())
                      : 0;
    };
    // dim(U ∩ V) = dim U + dim V - dim(U + V).
    const int inter = rank(hg) + rank(t) - rank(hstack({hg, t}));
    EXPECT_EQ(rerfs_range_condition_at(inst.pm, inst.H, inst.basis), inter == 0);
    // Complements meet trivially iff U + V is everything.
    EXPECT_EQ(rerfs_detectability_condition_at(inst.pm, inst.H, inst.basis),
              rank(hstack({hg, t})) == k);
  }
}

}  // namespace
