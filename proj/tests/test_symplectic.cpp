#include <gtest/gtest.h>

#include <random>

#include "slspec/symplectic.hpp"
#include "test_support.hpp"

using namespace slspec;
using slspec::testing::random_frame_pair;
using slspec::testing::random_mat;

TEST(StandardJ, Examples) {
  EXPECT_EQ(standard_J(1), (Mat{{0, -1}, {1, 0}}));
  for (std::size_t n = 1; n <= 4; ++n) {
    const Mat J = standard_J(n);
    EXPECT_EQ(J * J, -Mat::identity(2 * n));
    EXPECT_EQ(J.transpose(), -J);
  }
  EXPECT_THROW(standard_J(0), DimensionError);
}

TEST(Presets, Examples) {
  const LagFrame r90 = preset_robin(M_PI / 2);
  EXPECT_NEAR(r90.X()(0, 0), 0.0, 1e-16);
  EXPECT_EQ(r90.Y()(0, 0), -1.0);
  EXPECT_EQ(intersection(r90, preset_neumann(1)).k0, 1u);

  const LagFrame r0 = preset_robin(0.0);
  EXPECT_EQ(r0.stacked(), preset_dirichlet(1).stacked());

  const double th = 0.7;
  const LagFrame r = preset_robin(th);
  EXPECT_EQ(r.X()(0, 0), std::cos(th));
  EXPECT_EQ(r.Y()(0, 0), -std::sin(th));

  EXPECT_THROW(preset_robin(-0.1), DomainError);
  EXPECT_THROW(preset_robin(2.0), DomainError);
}

TEST(LagFrame, RejectsNonLagrangianAndDeficient) {
  // columns (1,0;0,1) and (0,1;1,0)... X = I, Y = [[0,1],[0,0]] is not symmetric
  EXPECT_THROW(LagFrame(Mat::identity(2), Mat{{0, 1}, {0, 0}}), InvariantError);
  EXPECT_THROW(LagFrame(Mat{{1, 1}, {1, 1}}, Mat(2, 2)), InvariantError);
  EXPECT_THROW(LagFrame(Mat::identity(2), Mat::identity(3)), DimensionError);
}

TEST(LagFrame, RandomFramesAreLagrangian) {
  std::mt19937 rng(2);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 1 + trial % 4;
    const auto [z0, z1] = random_frame_pair(rng, n, trial % (n + 1));
    for (const LagFrame* z : {&z0, &z1})
      EXPECT_LE(norm_fro(z->X().transpose() * z->Y() - z->Y().transpose() * z->X()), 1e-10);
  }
}

TEST(Intersection, Examples) {
  for (std::size_t n = 1; n <= 3; ++n) {
    EXPECT_EQ(intersection(preset_dirichlet(n), preset_dirichlet(n)).k0, n);
    EXPECT_EQ(intersection(preset_dirichlet(n), preset_neumann(n)).k0, 0u);
  }
  EXPECT_EQ(intersection(preset_dirichlet(1), preset_robin(M_PI / 4)).k0, 0u);
}

TEST(Intersection, RecoversPlantedDimension) {
  std::mt19937 rng(9);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 1 + trial % 4;
    const std::size_t k = trial % (n + 1);
    const auto [z0, z1] = random_frame_pair(rng, n, k);
    const Intersection x = intersection(z0, z1);
    ASSERT_EQ(x.k0, k) << "n=" << n;
    if (k == 0) continue;
    EXPECT_LE(max_abs(x.basis.transpose() * x.basis - Mat::identity(k)), 1e-12);
    // basis lies in both subspaces
    const Mat q0 = orthonormalize(z0.stacked()), q1 = orthonormalize(z1.stacked());
    EXPECT_LE(norm_fro(x.basis - q0 * (q0.transpose() * x.basis)), 1e-10);
    EXPECT_LE(norm_fro(x.basis - q1 * (q1.transpose() * x.basis)), 1e-10);
  }
}

TEST(Normalizer, DirichletPairExtractsLowerLeft) {
  const Normalizer nrm = build_normalizer(preset_dirichlet(2), preset_dirichlet(2));
  EXPECT_EQ(nrm.k0, 2u);
  EXPECT_LE(max_abs(nrm.M3 - nrm.M1), 1e-15);
  std::mt19937 rng(4);
  const Mat m = random_mat(rng, 4, 4);
  EXPECT_LE(max_abs(project(nrm, m) - m.block(2, 0, 2, 2)), 1e-14);
}

TEST(Normalizer, TransversalPairExtractsUpperLeft) {
  const Normalizer nrm = build_normalizer(preset_dirichlet(2), preset_neumann(2));
  EXPECT_EQ(nrm.k0, 0u);
  std::mt19937 rng(5);
  const Mat m = random_mat(rng, 4, 4);
  EXPECT_LE(max_abs(project(nrm, m) - m.block(0, 0, 2, 2)), 1e-14);
}

TEST(Normalizer, ScalarRobinShear) {
  for (double th : {0.3, M_PI / 4, 1.2}) {
    const Normalizer nrm = build_normalizer(preset_dirichlet(1), preset_robin(th));
    EXPECT_EQ(nrm.k0, 0u);
    EXPECT_LE(max_abs(nrm.M1 - Mat::identity(2)), 1e-15);
    const Mat m2{{1.0, 1.0 / std::tan(th)}, {0.0, 1.0}};
    EXPECT_LE(max_abs(nrm.M3 - m2), 1e-14);
  }
}

TEST(Project, DirichletGammaZero) {
  const Normalizer nrm = build_normalizer(preset_dirichlet(1), preset_dirichlet(1));
  for (double T : {0.5, 1.0, M_PI}) EXPECT_NEAR(project(nrm, Mat{{1, 0}, {T, 1}})(0, 0), T, 1e-15);
}

TEST(Project, RobinFormula) {
  std::mt19937 rng(12);
  std::uniform_real_distribution<double> u(-5.0, 5.0), ang(0.05, M_PI / 2 - 0.05);
  for (int trial = 0; trial < 200; ++trial) {
    const double th = ang(rng);
    const Normalizer nrm = build_normalizer(preset_dirichlet(1), preset_robin(th));
    const double a = u(rng), b = u(rng), c = u(rng), d = u(rng);
    const double expect = a + c / std::tan(th);
    EXPECT_NEAR(project(nrm, Mat{{a, b}, {c, d}})(0, 0), expect, 1e-13 * (1.0 + std::abs(a) + std::abs(c / std::tan(th))));
  }
}

TEST(Project, ZeroAndLinearity) {
  std::mt19937 rng(13);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 1 + trial % 3;
    const auto [z0, z1] = random_frame_pair(rng, n, trial % (n + 1));
    const Normalizer nrm = build_normalizer(z0, z1);
    EXPECT_EQ(max_abs(project(nrm, Mat(2 * n, 2 * n))), 0.0);
    const Mat a = random_mat(rng, 2 * n, 2 * n), b = random_mat(rng, 2 * n, 2 * n);
    const double al = 1.7, be = -0.4;
    const Mat lhs = project(nrm, al * a + be * b);
    const Mat rhs = al * project(nrm, a) + be * project(nrm, b);
    EXPECT_LE(max_abs(lhs - rhs), 1e-12 * (1.0 + max_abs(lhs)));
  }
}

TEST(Normalizer, RandomPairsSatisfyInvariants) {
  std::mt19937 rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + trial % 4;
    const std::size_t k = (trial / 4) % (n + 1);
    const auto [z0, z1] = random_frame_pair(rng, n, k);
    const Normalizer nrm = build_normalizer(z0, z1);
    ASSERT_EQ(nrm.k0, k);
    const Mat I = Mat::identity(2 * n);
    EXPECT_LE(max_abs(nrm.M1.transpose() * nrm.M1 - I), 1e-9);
    EXPECT_LE(symplectic_defect(nrm.M1), 1e-9);
    EXPECT_LE(symplectic_defect(nrm.M3), 1e-9);
    EXPECT_NEAR(det(nrm.M3), 1.0, 1e-9);
    EXPECT_LE(max_abs(nrm.M3 * nrm.M3inv - I), 1e-9);
    // M3 carries Lambda0 into span(e_1..e_n) and Lambda1 into
    // span(e_1..e_k0, e_{n+k0+1}..e_2n)
    const Mat a0 = nrm.M3 * z0.stacked();
    EXPECT_LE(norm_fro(a0.block(n, 0, n, n)), 1e-10 * norm_fro(a0));
    const Mat a1 = nrm.M3 * z1.stacked();
    EXPECT_LE(norm_fro(a1.block(k, 0, n, n)), 1e-10 * norm_fro(a1));
    if (n > k) { EXPECT_GT(std::abs(det(nrm.tildeY1)), 1e-10); }
  }
}
