#include <algorithm>
#include <complex>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "oss/matlib.hpp"
#include "oss/scenarios.hpp"
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

std::vector<double> sorted_real(const ComplexVector& ev) {
  std::vector<double> out;
  for (const auto& z : ev) out.push_back(z.real());
  std::sort(out.begin(), out.end());
  return out;
}

// Swing plant on a 4-bus line with unit parameters and its block null basis.
struct UnitSwing {
  PowerNetwork net;
  PlantMatrices pm;
  Matrix nab;
  UnitSwing() {
    net = PowerNetwork::default_line4();
    net.inertia = Vector::Ones(4);
    net.damping = Vector::Ones(4);
    net.susceptance = Vector::Ones(3);
    pm = build_swing_plant(net).evaluate(Vector::Zero(3));
    const Matrix inc = net.incidence();
    nab = Matrix::Zero(11, 4);
    nab.block(0, 0, 4, 1) = Vector::Ones(4);
    nab.block(4, 1, 3, 3) = Matrix::Identity(3, 3);
    nab.block(7, 0, 4, 1) = net.damping;
    nab.block(7, 1, 4, 3) = inc;
  }
};

TEST(NumericalRank, Examples) {
  EXPECT_EQ(numerical_rank(Matrix::Identity(3, 3), 1e-12), 3);
  EXPECT_EQ(numerical_rank(mat(2, 2, {1, 2, 2, 4}), 1e-12), 1);
  EXPECT_EQ(numerical_rank(Matrix::Zero(3, 2)), 0);
  EXPECT_EQ(numerical_rank(Matrix(0, 0)), 0);
}

TEST(NumericalRank, SwingPlantMatchesBlockNullBasis) {
  UnitSwing s;
  const Matrix ab = hstack({s.pm.A, s.pm.B});
  EXPECT_EQ(ab.cols(), 11);
  EXPECT_EQ(numerical_rank(ab), ab.cols() - s.nab.cols());
  EXPECT_LE((ab * s.nab).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(NullBasis, Examples) {
  EXPECT_TRUE(null_basis(Matrix::Identity(2, 2)).is_empty());
  const SubspaceBasis n = null_basis(mat(1, 2, {1, 1}));
  ASSERT_EQ(n.dim(), 1);
  EXPECT_NEAR(std::abs(n.basis()(0, 0)), 1.0 / std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(n.basis()(0, 0), -n.basis()(1, 0), 1e-12);
}

TEST(NullBasis, SwingPlantEqualsBlockBasis) {
  UnitSwing s;
  const SubspaceBasis n = null_basis(hstack({s.pm.A, s.pm.B}));
  EXPECT_TRUE(subspace_equal(n, SubspaceBasis::span_of(s.nab)));
}

TEST(RangeBasis, Examples) {
  EXPECT_TRUE(range_basis(Matrix::Zero(3, 2)).is_empty());
  const SubspaceBasis r = range_basis(mat(2, 1, {1, 1}));
  ASSERT_EQ(r.dim(), 1);
  EXPECT_NEAR(std::abs(r.basis()(0, 0)), 1.0 / std::sqrt(2.0), 1e-12);
  const SubspaceBasis g = range_basis(mat(2, 1, {1, 0.5}));
  const Vector expect = Vector(mat(2, 1, {1, 0.5}).col(0)).normalized();
  EXPECT_NEAR(std::abs(g.basis().col(0).dot(expect)), 1.0, 1e-12);
}

TEST(LeftNullBasis, Examples) {
  EXPECT_TRUE(left_null_basis(Matrix::Identity(3, 3)).is_empty());
  const SubspaceBasis l = left_null_basis(mat(2, 1, {1, 1}));
  ASSERT_EQ(l.dim(), 1);
  EXPECT_NEAR(l.basis()(0, 0), -l.basis()(1, 0), 1e-12);
}

TEST(LeftNullBasis, SwingOutputMatrixMatchesBlockGperp) {
  UnitSwing s;
  const Matrix G = hstack({s.pm.C, s.pm.D}) * s.nab;
  const SubspaceBasis l = left_null_basis(G);
  EXPECT_EQ(l.dim(), 4);
  Matrix gperp(4, 8);
  gperp << Matrix::Ones(4, 4), -s.net.damping.sum() * Matrix::Identity(4, 4);
  EXPECT_LE((gperp * G).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_TRUE(subspace_equal(l, SubspaceBasis::span_of(gperp.transpose())));
}

TEST(SubspaceEqual, Examples) {
  const SubspaceBasis e1 = SubspaceBasis::span_of(mat(2, 1, {1, 0}));
  const SubspaceBasis e2 = SubspaceBasis::span_of(mat(2, 1, {0, 1}));
  EXPECT_TRUE(subspace_equal(e1, e1));
  EXPECT_FALSE(subspace_equal(e1, e2));
  const SubspaceBasis g0 = SubspaceBasis::span_of(mat(2, 1, {1, 1}));
  const SubspaceBasis g5 = SubspaceBasis::span_of(mat(2, 1, {1, 1.5}));
  EXPECT_FALSE(subspace_equal(g0, g5));
  EXPECT_THROW(subspace_equal(e1, SubspaceBasis::full(3)), std::invalid_argument);
}

TEST(SubspaceIntersection, Examples) {
  const SubspaceBasis plane = SubspaceBasis::span_of(mat(3, 2, {1, 0, 0, 1, 0, 0}));
  EXPECT_TRUE(subspace_equal(subspace_intersection(plane, plane), plane));
  const SubspaceBasis e1 = SubspaceBasis::span_of(mat(2, 1, {1, 0}));
  const SubspaceBasis e2 = SubspaceBasis::span_of(mat(2, 1, {0, 1}));
  EXPECT_TRUE(subspace_intersection(e1, e2).is_empty());
}

TEST(SubspaceIntersection, SwingFeasibleDirections) {
  UnitSwing s;
  const SubspaceBasis rg = range_basis(hstack({s.pm.C, s.pm.D}) * s.nab);
  const Matrix H = hstack({Matrix::Zero(4, 4), Matrix::Identity(4, 4)});
  const SubspaceBasis feasible = subspace_intersection(rg, null_basis(H));
  Matrix expect = Matrix::Zero(8, 3);
  expect.topRows(4) = s.net.incidence();
  EXPECT_TRUE(subspace_equal(feasible, SubspaceBasis::span_of(expect)));
}

TEST(Eigenvalues, Examples) {
  EXPECT_EQ(sorted_real(eigenvalues(mat(2, 2, {1, 0, 0, 2}))), (std::vector<double>{1, 2}));
  const ComplexVector rot = eigenvalues(mat(2, 2, {0, 1, -1, 0}));
  ASSERT_EQ(rot.size(), 2);
  for (const auto& z : rot) {
    EXPECT_NEAR(z.real(), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(z.imag()), 1.0, 1e-12);
  }
  EXPECT_THROW(eigenvalues(Matrix::Zero(2, 3)), std::invalid_argument);
}

TEST(SolveLinear, Examples) {
  const Matrix b = mat(3, 1, {1, 2, 3});
  EXPECT_LE((solve_linear(Matrix::Identity(3, 3), b) - b).norm(), 1e-14);
  const Matrix a = mat(3, 2, {1, 0, 0, 1, 1, 1});
  const Matrix x = mat(2, 1, {2, -1});
  EXPECT_LE((solve_linear(a, a * x) - x).norm(), 1e-12);
  // Minimum norm among minimizers.
  const Matrix under = mat(1, 2, {1, 1});
  EXPECT_LE((solve_linear(under, mat(1, 1, {2})) - mat(2, 1, {1, 1})).norm(), 1e-12);
}

TEST(Concatenation, Shapes) {
  const Matrix d = blkdiag(Matrix::Ones(2, 1), Matrix::Ones(1, 3));
  EXPECT_EQ(d.rows(), 3);
  EXPECT_EQ(d.cols(), 4);
  EXPECT_EQ(d(2, 0), 0.0);
  EXPECT_THROW(vstack({Matrix::Ones(1, 2), Matrix::Ones(1, 3)}), std::invalid_argument);
  EXPECT_THROW(hstack({Matrix::Ones(2, 1), Matrix::Ones(3, 1)}), std::invalid_argument);
}

// Random matrices with a prescribed rank.
class RandomMatrices : public ::testing::Test {
 protected:
  Rng rng{2024};
  Matrix next() {
    const int r = oss::testing::uniform_int(rng, 1, 6);
    const int c = oss::testing::uniform_int(rng, 1, 6);
    const int k = oss::testing::uniform_int(rng, 0, std::min(r, c));
    return oss::testing::random_rank(rng, r, c, k);
  }
};

TEST_F(RandomMatrices, RankNullityAndResiduals) {
  for (int trial = 0; trial < 200; ++trial) {
    const Matrix m = next();
    const SubspaceBasis n = null_basis(m);
    const SubspaceBasis r = range_basis(m);
    const SubspaceBasis l = left_null_basis(m);
    const int rank = numerical_rank(m);
    EXPECT_EQ(rank + n.dim(), m.cols());
    EXPECT_EQ(rank, r.dim());
    EXPECT_EQ(r.dim() + l.dim(), m.rows());
    const double scale = 1.0 + (m.size() ? m.norm() : 0.0);
    for (const SubspaceBasis* b : {&n, &r, &l}) {
      if (b->is_empty()) continue;
      const Matrix gram = b->basis().transpose() * b->basis();
      EXPECT_LE((gram - Matrix::Identity(b->dim(), b->dim())).cwiseAbs().maxCoeff(), 1e-10);
    }
    if (n.dim()) {
      EXPECT_LE((m * n.basis()).cwiseAbs().maxCoeff(), 1e-8 * scale);
    }
    if (l.dim()) {
      EXPECT_LE((l.basis().transpose() * m).cwiseAbs().maxCoeff(), 1e-8 * scale);
    }
    if (r.dim()) {
      const Matrix resid = m - r.projector() * m;
      EXPECT_LE(resid.cwiseAbs().maxCoeff(), 1e-8 * scale);
    }
  }
}

TEST_F(RandomMatrices, SubspaceEqualityInvariances) {
  for (int trial = 0; trial < 200; ++trial) {
    const Matrix m = next();
    const SubspaceBasis u = range_basis(m);
    if (u.is_empty()) continue;
    const SubspaceBasis v(u.basis() * oss::testing::random_orthogonal(rng, u.dim()), 1e-10);
    EXPECT_TRUE(subspace_equal(u, u));
    EXPECT_TRUE(subspace_equal(u, v));
    EXPECT_TRUE(subspace_equal(v, u));
    const SubspaceBasis other = SubspaceBasis::span_of(
        oss::testing::gaussian(rng, static_cast<int>(m.rows()), u.dim()));
    EXPECT_EQ(subspace_equal(u, other), subspace_equal(other, u));
  }
}

TEST_F(RandomMatrices, EigenvaluesSimilarityInvariant) {
  for (int trial = 0; trial < 100; ++trial) {
    const int n = oss::testing::uniform_int(rng, 1, 6);
    const Matrix a = oss::testing::gaussian(rng, n, n);
    const Matrix p = oss::testing::random_orthogonal(rng, n) +
                     0.2 * oss::testing::gaussian(rng, n, n) / std::sqrt(double(n));
    if (p.jacobiSvd().singularValues().minCoeff() < 0.3) continue;
    ComplexVector e1 = eigenvalues(a);
    ComplexVector e2 = eigenvalues(p * a * p.inverse());
    ASSERT_EQ(e1.size(), e2.size());
    std::vector<bool> used(e2.size(), false);
    for (size_t i = 0; i < e1.size(); ++i) {
      double best = 1e300;
      size_t arg = 0;
      for (size_t j = 0; j < e2.size(); ++j) {
        if (used[j]) continue;
        const double d = std::abs(e1[i] - e2[j]);
        if (d < best) best = d, arg = j;
      }
      used[arg] = true;
      EXPECT_LE(best, 1e-8 * (1.0 + std::abs(e1[i])));
    }
  }
}

}  // namespace
