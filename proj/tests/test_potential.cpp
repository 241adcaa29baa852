#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "bridgelab/potential.hpp"
#include "test_util.hpp"

using namespace bridgelab;
using testutil::vec;

TEST(Potential, ValuesOfBuiltins) {
  EXPECT_DOUBLE_EQ(Potential::quadratic_isotropic(2).value(vec({3, 4})), 12.5);
  EXPECT_NEAR(Potential::neg_log(1).value(vec({std::exp(1.0)})), -1.0, 1e-15);
  Matrix a(2, 2);
  a << 2, 1, 1, 3;
  // (1, -1) A (1, -1)^T / 2 = (2 - 2 + 3) / 2.
  EXPECT_DOUBLE_EQ(Potential::quadratic_matrix(a).value(vec({1, -1})), 1.5);
}

TEST(Potential, NegLogRejectsBoundaryAndOutside) {
  const auto p = Potential::neg_log(2);
  EXPECT_ERROR_CODE(p.value(vec({0.0})), ErrorCode::InvalidArgument);
  EXPECT_ERROR_CODE(Potential::neg_log(1).value(vec({0.0})), ErrorCode::Domain);
  EXPECT_ERROR_CODE(p.gradient(vec({1.0, -2.0})), ErrorCode::Domain);
  EXPECT_ERROR_CODE(p.hessian_apply(vec({1.0, 0.0}), vec({1, 1})), ErrorCode::Domain);
  EXPECT_FALSE(p.in_domain(vec({1.0, 0.0})));
  EXPECT_TRUE(p.in_domain(vec({1.0, 1e-300})));
}

TEST(Potential, Gradients) {
  const Vector g = Potential::quadratic_isotropic(2).gradient(vec({3, 4}));
  EXPECT_EQ(g, vec({3, 4}));
  EXPECT_DOUBLE_EQ(Potential::neg_log(1).gradient(vec({2}))[0], -0.5);
  const Vector h = Potential::neg_log(2).gradient(vec({1, 4}));
  EXPECT_DOUBLE_EQ(h[0], -1.0);
  EXPECT_DOUBLE_EQ(h[1], -0.25);
}

TEST(Potential, HessianActions) {
  EXPECT_EQ(Potential::quadratic_isotropic(2).hessian_apply(vec({-7, 0.3}), vec({1, 2})),
            vec({1, 2}));
  EXPECT_DOUBLE_EQ(Potential::neg_log(1).hessian_apply(vec({2}), vec({1}))[0], 0.25);
}

TEST(Potential, CustomFallsBackToFiniteDifferences) {
  CustomFunctions fns;
  fns.value = [](const Vector& x) { return 0.5 * x.squaredNorm(); };
  const auto p = Potential::custom(2, fns, ConvexityClass{1.0, std::nullopt});
  const Vector hv = p.hessian_apply(vec({0.4, -1.3}), vec({1, 2}));
  EXPECT_NEAR(hv[0], 1.0, 1e-6);
  EXPECT_NEAR(hv[1], 2.0, 1e-6);
  const Vector g = p.gradient(vec({0.4, -1.3}));
  EXPECT_NEAR(g[0], 0.4, 1e-7);
  EXPECT_NEAR(g[1], -1.3, 1e-7);
}

TEST(Potential, CustomMinimizerIsLocated) {
  CustomFunctions fns;
  fns.value = [](const Vector& x) { return (x - vec({1.0, -2.0})).squaredNorm(); };
  fns.gradient = [](const Vector& x) -> Vector { return 2.0 * (x - vec({1.0, -2.0})); };
  const auto p = Potential::custom(2, fns, ConvexityClass{2.0, std::nullopt});
  ASSERT_TRUE(p.minimizer().has_value());
  EXPECT_NEAR((*p.minimizer() - vec({1.0, -2.0})).norm(), 0.0, 1e-9);
}

TEST(Potential, ConvexityCertificates) {
  const auto q = Potential::quadratic_isotropic(3);
  EXPECT_EQ(q.rho(), 1.0);
  EXPECT_FALSE(q.n_dim().has_value());
  EXPECT_EQ(q.domain(), Domain::AllSpace);
  ASSERT_TRUE(q.minimizer().has_value());
  EXPECT_EQ(q.minimizer()->norm(), 0.0);

  const auto nl = Potential::neg_log(3);
  EXPECT_FALSE(nl.has_positive_rho());
  EXPECT_EQ(nl.n_dim(), 3.0);
  EXPECT_EQ(nl.domain(), Domain::PositiveOrthant);

  Matrix a(2, 2);
  a << 2, 0.5, 0.5, 1;
  const auto m = Potential::quadratic_matrix(a);
  const double lmin = 1.5 - std::sqrt(0.25 + 0.25);
  ASSERT_TRUE(m.rho().has_value());
  EXPECT_NEAR(*m.rho(), lmin, 1e-14);
}

TEST(Potential, ConvexityDefectExamples) {
  const Vector u = vec({0.6, 0.8});
  EXPECT_NEAR(Potential::quadratic_isotropic(2).convexity_defect(vec({5, -1}), u), 0.0, 1e-15);
  // F'' = (F')^2 makes the (0, 1) certificate an identity.
  EXPECT_NEAR(Potential::neg_log(1).convexity_defect(vec({0.37}), vec({1})), 0.0, 1e-12);
  EXPECT_NEAR(Potential::neg_log(2).convexity_defect(vec({1, 2}), vec({1, 0})), 0.5, 1e-15);
}

TEST(Potential, InvalidConstruction) {
  EXPECT_ERROR_CODE(Potential::neg_log(0), ErrorCode::InvalidArgument);
  Matrix a(2, 2);
  a << 1, 2, 0, 1;
  EXPECT_ERROR_CODE(Potential::quadratic_matrix(a), ErrorCode::InvalidArgument);
}

namespace {

Vector random_point(const Potential& p, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> pos(0.2, 4.0), any(-3.0, 3.0);
  Vector x(p.dim());
  for (int i = 0; i < p.dim(); ++i)
    x[i] = p.domain() == Domain::PositiveOrthant ? pos(rng) : any(rng);
  return x;
}

std::vector<Potential> builtin_potentials() {
  Matrix a(3, 3);
  a << 2, 0.5, 0, 0.5, 1, 0.2, 0, 0.2, 3;
  return {Potential::quadratic_isotropic(3), Potential::quadratic_matrix(a),
          Potential::neg_log(1), Potential::neg_log(3)};
}

}  // namespace

TEST(PotentialProperty, GradientMatchesCentralDifferences) {
  std::mt19937_64 rng(20241);
  for (const auto& p : builtin_potentials()) {
    for (int s = 0; s < 100; ++s) {
      const Vector x = random_point(p, rng);
      const Vector g = p.gradient(x);
      for (int i = 0; i < p.dim(); ++i) {
        const double h = 1e-5 * (1.0 + std::abs(x[i]));
        Vector xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        const double fd = (p.value(xp) - p.value(xm)) / (2.0 * h);
        EXPECT_LE(std::abs(fd - g[i]), 1e-6 * std::max(1.0, std::abs(g[i])))
            << p.describe() << " coordinate " << i;
      }
    }
  }
}

TEST(PotentialProperty, NegLogDefectIsNonNegative) {
  std::mt19937_64 rng(77);
  std::normal_distribution<double> n01;
  for (int d = 1; d <= 4; ++d) {
    const auto p = Potential::neg_log(d);
    for (int s = 0; s < 1000; ++s) {
      const Vector x = random_point(p, rng);
      Vector v(d);
      for (int i = 0; i < d; ++i) v[i] = n01(rng);
      EXPECT_GE(p.convexity_defect(x, v), -1e-12);
    }
  }
}

TEST(PotentialProperty, MatrixDefectIsNonNegative) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n01;
  Matrix a(3, 3);
  a << 2, 0.5, 0, 0.5, 1, 0.2, 0, 0.2, 3;
  const auto p = Potential::quadratic_matrix(a);
  for (int s = 0; s < 1000; ++s) {
    Vector x(3), v(3);
    for (int i = 0; i < 3; ++i) {
      x[i] = n01(rng);
      v[i] = n01(rng);
    }
    EXPECT_GE(p.convexity_defect(x, v), -1e-10);
  }
}

TEST(PotentialProperty, NewtonAccelerationIsHessianTimesGradient) {
  std::mt19937_64 rng(11);
  for (const auto& p : builtin_potentials()) {
    for (int s = 0; s < 20; ++s) {
      const Vector x = random_point(p, rng);
      const Vector want = p.hessian_apply(x, p.gradient(x));
      Vector out(p.dim());
      p.newton_acceleration_into(x, out);
      EXPECT_LE((p.newton_acceleration(x) - want).norm(), 1e-12 * (1.0 + want.norm()));
      EXPECT_LE((out - want).norm(), 1e-12 * (1.0 + want.norm()));
    }
  }
}
