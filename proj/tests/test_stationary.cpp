#include <cmath>
#include <cstring>
#include <numbers>

#include <gtest/gtest.h>

#include "dampedwave/analysis.hpp"
#include "dampedwave/stationary.hpp"
#include "support/dense_oracle.hpp"

using namespace dampedwave;
using oracle::MatrixXd;
using oracle::VectorXd;

namespace {

constexpr double kPi = std::numbers::pi;

struct Manufactured {
  DiscreteOperators ops;
  Vector f;
  Vector g;
};

// u = cos(pi x), p = sin(pi x).
Manufactured manufactured(std::size_t n, int k, double a) {
  Manufactured m{assemble_operators(n, k, DampingField::constant(a)), {}, {}};
  m.f = assemble_load(m.ops.disc, [&](double x) { return (kPi + a) * std::cos(kPi * x); }, SpaceKind::v);
  m.g = assemble_load(m.ops.disc, [](double x) { return -kPi * std::sin(kPi * x); }, SpaceKind::q);
  return m;
}

VectorXd dense_solve(const DiscreteOperators& ops, const Vector& f, const Vector& g) {
  const auto d = oracle::dense(ops);
  const auto nv = d.mv.rows();
  const auto nq = d.mq.rows();
  MatrixXd k(nv + nq, nv + nq);
  k << d.a, -d.b.transpose(), d.b, MatrixXd::Zero(nq, nq);
  return k.fullPivLu().solve(oracle::stack(f, g));
}

}  // namespace

TEST(Stationary, ZeroLoadGivesZeroSolution) {
  const DiscreteOperators ops = assemble_operators(8, 1, DampingField::constant(2.0));
  for (auto method : {StationaryMethod::monolithic, StationaryMethod::schur}) {
    const auto s = solve_stationary(ops, Vector(ops.dim_v(), 0.0), Vector(ops.dim_q(), 0.0), method);
    for (double c : s.u_bar.coefficients()) EXPECT_EQ(c, 0.0);
    for (double c : s.p_bar.coefficients()) EXPECT_EQ(c, 0.0);
  }
}

TEST(Stationary, ManufacturedSolutionConvergesAtSecondOrder) {
  auto errors = [](std::size_t n) {
    const Manufactured m = manufactured(n, 1, 1.0);
    const auto s = solve_stationary(m.ops, m.f, m.g);
    return std::pair{l2_distance(m.ops, s.u_bar.coefficients(), SpaceKind::v, [](double x) { return std::cos(kPi * x); }),
                     l2_distance(m.ops, s.p_bar.coefficients(), SpaceKind::q, [](double x) { return std::sin(kPi * x); })};
  };
  const auto [eu64, ep64] = errors(64);
  const auto [eu32, ep32] = errors(32);
  const double h = 1.0 / 64.0;
  EXPECT_LE(eu64, h * h);
  EXPECT_LE(ep64, h * h);
  EXPECT_GT(std::log2(ep32 / ep64), 1.9);
  EXPECT_GT(std::log2(eu32 / eu64), 1.9);
}

TEST(Stationary, CosineLoadWithLargeDampingHasSmallResidual) {
  const DiscreteOperators ops = assemble_operators(40, 0, DampingField::constant(10.0));
  const Vector f = assemble_load(ops.disc, [](double x) { return std::cos(kPi * x); }, SpaceKind::v);
  const auto s = solve_stationary(ops, f, Vector(ops.dim_q(), 0.0));
  EXPECT_LE(s.residual_v, 1e-10);
  EXPECT_LE(s.residual_q, 1e-10);
}

TEST(Stationary, RoutesAgreeAndMatchDenseSolve) {
  for (int k = 0; k <= 2; ++k) {
    for (std::size_t n : {3u, 6u}) {
      const auto field = DampingField::callable([](double x) { return 1.0 + 3.0 * x; }, 1.0, 4.0);
      const DiscreteOperators ops = assemble_operators(n, k, field);
      const Vector f = assemble_load(ops.disc, [](double x) { return std::exp(x); }, SpaceKind::v);
      const Vector g = assemble_load(ops.disc, [](double x) { return x * x - 0.3; }, SpaceKind::q);
      const auto mono = solve_stationary(ops, f, g, StationaryMethod::monolithic);
      const auto schur = solve_stationary(ops, f, g, StationaryMethod::schur);
      const VectorXd ref = dense_solve(ops, f, g);
      const VectorXd zm = oracle::stack(mono.u_bar.coefficients(), mono.p_bar.coefficients());
      const VectorXd zs = oracle::stack(schur.u_bar.coefficients(), schur.p_bar.coefficients());
      EXPECT_LT((zm - zs).norm(), 1e-10 * ref.norm()) << "k=" << k << " n=" << n;
      EXPECT_LT((zm - ref).norm(), 1e-10 * ref.norm()) << "k=" << k << " n=" << n;
    }
  }
}

TEST(Stationary, BitwiseDeterministic) {
  const Manufactured m = manufactured(50, 2, 3.0);
  const auto a = solve_stationary(m.ops, m.f, m.g);
  const auto b = solve_stationary(m.ops, m.f, m.g);
  const auto& ca = a.u_bar.coefficients();
  const auto& cb = b.u_bar.coefficients();
  EXPECT_EQ(std::memcmp(ca.data(), cb.data(), ca.size() * sizeof(double)), 0);
  EXPECT_EQ(a.p_bar.coefficients(), b.p_bar.coefficients());
}

TEST(Stationary, NonPositiveDampingRejected) {
  const DiscreteOperators ops = assemble_operators(4, 0, DampingField::constant(0.0));
  EXPECT_THROW(solve_stationary(ops, Vector(ops.dim_v(), 1.0), Vector(ops.dim_q(), 0.0)), SingularMatrix);
  const DiscreteOperators neg = assemble_operators(4, 0, DampingField::constant(-1.0));
  EXPECT_THROW(solve_stationary(neg, Vector(neg.dim_v(), 1.0), Vector(neg.dim_q(), 0.0)), SingularMatrix);
}

TEST(Stationary, LoadDimensionAndFinitenessChecked) {
  const DiscreteOperators ops = assemble_operators(4, 0, DampingField::constant(1.0));
  EXPECT_THROW(solve_stationary(ops, Vector(3, 0.0), Vector(ops.dim_q(), 0.0)), InvalidArgument);
  Vector f(ops.dim_v(), 0.0);
  f[1] = std::nan("");
  EXPECT_THROW(solve_stationary(ops, f, Vector(ops.dim_q(), 0.0)), InvalidArgument);
}

// The discrete solution stays bounded by the data uniformly in h for several a0.
TEST(Stationary, StableAcrossDampingLevels) {
  for (double a0 : {0.1, 1.0, 10.0}) {
    double previous = -1.0;
    for (std::size_t n : {16u, 64u, 256u}) {
      const Manufactured m = manufactured(n, 0, a0);
      const auto s = solve_stationary(m.ops, m.f, m.g);
      const double nu = l2_norm(m.ops, s.u_bar.coefficients(), SpaceKind::v);
      const double np = l2_norm(m.ops, s.p_bar.coefficients(), SpaceKind::q);
      EXPECT_NEAR(nu, std::sqrt(0.5), 0.05) << "a0=" << a0 << " n=" << n;
      EXPECT_NEAR(np, std::sqrt(0.5), 0.05) << "a0=" << a0 << " n=" << n;
      if (previous >= 0.0) {
        EXPECT_NEAR(nu, previous, 0.01);
      }
      previous = nu;
    }
  }
}
