#include "helpers.hpp"
#include "jmgt/spectral/checks.hpp"

#include <gtest/gtest.h>

using namespace jmgt;
using namespace testing_support;

namespace {

// two cells on [0,1], Robin at x = 0, damping at x = 1, hand assembled
struct HandMatrices {
  Mat M{3, 3}, K{3, 3}, B{3, 3};
  HandMatrices() {
    M << 2, 1, 0, 1, 4, 1, 0, 1, 2;
    M /= 12.0;
    K << 2, -2, 0, -2, 4, -2, 0, -2, 2;
    K(0, 0) += 1.0;
    B.setZero();
    B(2, 2) = 1.0;
  }
};

}  // namespace

TEST(Assembly, TwoCellMatrices) {
  const auto m = interval(2);
  const HandMatrices hand;
  EXPECT_NEAR(Mat(m->ops.K)(0, 0), 3.0, 1e-14);
  EXPECT_NEAR((Mat(m->ops.mass) - hand.M).norm(), 0.0, 1e-14);
  EXPECT_NEAR((Mat(m->ops.K) - hand.K).norm(), 0.0, 1e-14);
  EXPECT_NEAR((Mat(m->ops.damping) - hand.B).norm(), 0.0, 1e-14);
  EXPECT_NEAR(Mat(m->ops.stiffness).rowwise().sum().norm(), 0.0, 1e-14);
}

TEST(Assembly, GeneratorMatchesHandBlocks) {
  const auto m = interval(2);
  const HandMatrices hand;
  const PhysicalParams& p = m->params;
  const double b = p.b(), c2 = p.c * p.c, alpha = p.alpha(Point::Zero());
  Mat G = Mat::Zero(9, 9);
  G.block(0, 3, 3, 3).setIdentity();
  G.block(3, 6, 3, 3).setIdentity();
  const Mat Minv = hand.M.inverse() / p.tau;
  G.block(6, 0, 3, 3) = -c2 * Minv * hand.K;
  G.block(6, 3, 3, 3) = -Minv * (b * hand.K + c2 * hand.B);
  G.block(6, 6, 3, 3) = -Minv * (alpha * hand.M + b * hand.B);
  EXPECT_NEAR((m->generator.to_dense() - G).norm() / G.norm(), 0.0, 1e-13);
}

TEST(Assembly, ZFormIsSimilarToUForm) {
  const auto m = square(4);
  const ZGenerators z = build_generator_z(m->ops, m->params);
  const Mat T = build_transform_M(m->params, m->n()).to_dense();
  const Mat Tinv = build_transform_M_inverse(m->params, m->n()).to_dense();
  EXPECT_NEAR((T * Tinv - Mat::Identity(T.rows(), T.cols())).norm(), 0.0, 1e-13);
  const Mat Au = m->generator.to_dense();
  const Mat Az = z.A.to_dense();
  EXPECT_NEAR((Az - T * Au * Tinv).norm() / Az.norm(), 0.0, 1e-12);
  EXPECT_NEAR((z.Ad.to_dense() + z.P.to_dense() - Az).norm() / Az.norm(), 0.0, 1e-13);
}

TEST(Assembly, NeumannMapReproducesLinearSolution) {
  // -psi'' = 0, -psi'(0) + psi(0) = 0, psi'(1) = g  gives  psi = g (1 + x)
  const auto m = interval(16);
  const double g = 0.7;
  const Vec psi = solve_neumann_map(m->ops, Vec::Constant(m->n(), g));
  for (Index i = 0; i < m->n(); ++i) EXPECT_NEAR(psi[i], g * (1.0 + m->mesh->nodes[i].x()), 1e-12);
}

TEST(Assembly, EmptyGammaZeroNeedsFlag) {
  PhysicalParams p;
  const Mesh mesh = build_rect_mesh(1.0, 1.0, 3, 3);
  const auto part = partition_boundary(mesh, "none", true);
  EXPECT_THROW(build_model(mesh, part, p), ConfigurationError);
  EXPECT_NO_THROW(build_model(mesh, part, p, true));
}

TEST(Assembly, ParameterValidation) {
  PhysicalParams p;
  p.tau = 0.0;
  EXPECT_THROW(validate(p), ParameterError);
  p.tau = 1.0;
  p.k = -1.0;
  EXPECT_THROW(validate(p), ParameterError);
}

TEST(Checks, DissipativityAndResolvent) {
  for (const auto& m : {interval(40), square(6)}) {
    const ZGenerators z = build_generator_z(m->ops, m->params);
    const DissipativityReport d = dissipativity_check(m->ops, m->params, z.Ad, 20);
    EXPECT_LE(d.max_mismatch, 1e-12);
    EXPECT_LT(d.max_form, 0.0);
    const Vec L = Vec::LinSpaced(3 * m->n(), -1.0, 2.0);
    for (double s : {0.5, 1.0, 2.0}) {
      const ResolventReport r = resolvent_check(m->ops, m->params, z.Ad, s, L);
      EXPECT_LE(r.discrepancy, 1e-10);
      EXPECT_GT(r.min_ks_form, 0.0);
    }
  }
}
