#include <cmath>
#include <memory>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "dampedwave/analysis.hpp"
#include "support/dense_oracle.hpp"

using namespace dampedwave;
using oracle::MatrixXd;
using oracle::VectorXd;

TEST(Constants, ExamplesForEqualBounds) {
  const StabilityConstants c = stability_constants(10.0, 10.0, 1.0);
  EXPECT_NEAR(c.alpha_cont, 0.08889, 5e-6);
  EXPECT_NEAR(c.alpha_disc, 0.014782, 5e-7);
  EXPECT_NEAR(c.eps0, 0.044346, 5e-7);
  ASSERT_TRUE(c.tau0.has_value());
  EXPECT_NEAR(*c.tau0, 6.443, 5e-4);
  EXPECT_NEAR(modified_energy_eps_bound(10.0, 10.0), 10.0 / 24.0, 1e-15);
}

TEST(Constants, PositiveAndOrdered) {
  for (double a0 : {0.01, 0.5, 1.0, 7.0}) {
    for (double ratio : {1.0, 2.0, 10.0}) {
      for (double theta : {0.51, 0.75, 1.0}) {
        const StabilityConstants c = stability_constants(a0, a0 * ratio, theta);
        EXPECT_GT(c.alpha_cont, 0.0);
        EXPECT_GT(c.alpha_disc, 0.0);
        EXPECT_GT(c.eps0, 0.0);
        EXPECT_GT(*c.tau0, 0.0);
        EXPECT_LT(c.alpha_disc, c.alpha_cont);
      }
    }
  }
}

TEST(Constants, RejectsInvalidInput) {
  EXPECT_THROW(stability_constants(0.0, 1.0), InvalidArgument);
  EXPECT_THROW(stability_constants(2.0, 1.0), InvalidArgument);
  EXPECT_THROW(stability_constants(1.0, 1.0, 0.5), InvalidArgument);
  EXPECT_THROW(stability_constants(1.0, 1.0, 1.1), InvalidArgument);
}

// Increasing in a0 only while the a0^2 terms dominate the denominators (a0 <= 1/8 for these ratios).
TEST(Constants, MonotoneForSmallDampingAndBoundedBelow) {
  std::vector<double> grid;
  for (int e = -5; e <= 10; ++e) grid.push_back(std::ldexp(1.0, e));
  for (double ratio : {1.0, 4.0}) {
    auto cont = [&](double a) { return stability_constants(a, ratio * a).alpha_cont; };
    auto disc = [&](double a) { return stability_constants(a, ratio * a).alpha_disc; };
    for (std::size_t i = 1; i < grid.size() && grid[i] <= 0.125; ++i) {
      EXPECT_GT(cont(grid[i]), cont(grid[i - 1]));
      EXPECT_GT(disc(grid[i]), disc(grid[i - 1]));
    }
    for (auto alpha : {std::function<double(double)>(cont), std::function<double(double)>(disc)}) {
      const double c_lo = 0.25 * alpha(grid.front()) / grid.front();
      const double c_hi = 0.25 * alpha(grid.back()) * ratio * grid.back();
      for (double a : grid) EXPECT_GE(alpha(a), std::min(c_lo * a, c_hi / (ratio * a))) << "a=" << a;
    }
  }
}

TEST(Analytic, RateExamples) {
  EXPECT_NEAR(exact_rate_constant_a(1.0), 0.5, 1e-15);
  EXPECT_NEAR(exact_rate_constant_a(2.0 * pi), pi, 1e-12);
  EXPECT_NEAR(exact_rate_constant_a(20.0), 10.0 - std::sqrt(100.0 - pi * pi), 1e-12);
  EXPECT_THROW(exact_rate_constant_a(0.0), InvalidArgument);
}

TEST(Analytic, ModeSolvesCharacteristicEquation) {
  for (double a : {2.0 * pi, 7.0, 10.0, 100.0}) {
    const AnalyticMode m = analytic_mode(a);
    EXPECT_NEAR(m.lambda * m.lambda + a * m.lambda + pi * pi, 0.0, 1e-9 * a * a);
    // u_t + p_x + a u = 0 and p_t + u_x = 0 for the single mode.
    EXPECT_NEAR(m.lambda + pi * m.p_amplitude + a, 0.0, 1e-12 * a);
    EXPECT_NEAR(m.lambda * m.p_amplitude - pi, 0.0, 1e-12 * a);
  }
}

TEST(Analytic, TenDampingExamples) {
  const AnalyticMode m = analytic_mode(10.0);
  EXPECT_NEAR(m.p_amplitude, -(5.0 + std::sqrt(25.0 - pi * pi)) / pi, 1e-14);
  EXPECT_NEAR(m.p_amplitude, -2.829705, 5e-7);
  EXPECT_NEAR(m.energy(0.0), 2.25, 0.01);
  EXPECT_NEAR(m.energy(2.0), 2.65e-2, 0.005 * 2.65e-2);
  EXPECT_THROW(analytic_mode(6.0), RegimeError);
  const auto [u, p] = analytic_solution(10.0, 0.0, 0.0);
  EXPECT_DOUBLE_EQ(u, 1.0);
  EXPECT_DOUBLE_EQ(p, 0.0);
}

TEST(Fit, ExactExponential) {
  std::vector<double> t;
  std::vector<double> e;
  for (int i = 0; i <= 50; ++i) {
    t.push_back(0.1 * i);
    e.push_back(3.0 * std::exp(-2.0 * t.back()));
  }
  const RateFit f = fit_decay_rate(t, e);
  EXPECT_NEAR(f.alpha, 2.0, 1e-12);
  EXPECT_NEAR(f.intercept, std::log(3.0), 1e-12);
  EXPECT_NEAR(f.residual, 0.0, 1e-12);
  EXPECT_EQ(f.n_lo, 5u);
  const RateFit w = fit_decay_rate(t, e, {1.0, 2.0});
  EXPECT_EQ(w.n_lo, 10u);
  EXPECT_EQ(w.n_hi, 20u);
  EXPECT_NEAR(w.alpha, 2.0, 1e-12);
}

TEST(Fit, ConstantHasZeroRate) {
  const std::vector<double> t{0, 1, 2, 3};
  const std::vector<double> e{5, 5, 5, 5};
  EXPECT_NEAR(fit_decay_rate(t, e, {0.0, {}}).alpha, 0.0, 1e-15);
}

TEST(Fit, RejectsNonPositiveAndTinyWindows) {
  const std::vector<double> t{0, 1, 2, 3};
  EXPECT_THROW(fit_decay_rate(t, std::vector<double>{1, 0, 1, 1}, {0.0, {}}), InvalidArgument);
  EXPECT_THROW(fit_decay_rate(t, std::vector<double>{1, 1, 1, 1}, {2.5, 2.9}), InvalidArgument);
  EXPECT_THROW(fit_decay_rate(std::vector<double>{0}, std::vector<double>{1}), InvalidArgument);
}

TEST(OperatorNorm, ZeroStepsIsIdentity) {
  auto ops = std::make_shared<const DiscreteOperators>(assemble_operators(4, 0, DampingField::constant(10.0)));
  const Stepper st(ops, SchemeParams::fixed(1.0, 0.5, 0));
  EXPECT_EQ(operator_norm(st, 0).norm, 1.0);
}

TEST(OperatorNorm, MatchesDenseSvd) {
  for (int k : {0, 1}) {
    for (double theta : {0.5, 1.0}) {
      auto ops = std::make_shared<const DiscreteOperators>(assemble_operators(4, k, DampingField::constant(10.0)));
      const Stepper st(ops, SchemeParams::fixed(theta, 0.5, 2));
      const auto d = oracle::assemble(4, k, [](double) { return 10.0; });
      const double ref = oracle::gram_norm(oracle::propagator(d, theta, 0.5, 2), oracle::gram(d));
      const OperatorNormResult r = operator_norm(st, 2, {1e-14, 5000, 7});
      EXPECT_NEAR(r.norm, ref, 1e-8) << "k=" << k << " theta=" << theta;
      EXPECT_LE(r.norm, 1.0 + 1e-12);
    }
  }
}

TEST(OperatorNorm, NonConvergenceIsReported) {
  auto ops = std::make_shared<const DiscreteOperators>(assemble_operators(16, 0, DampingField::constant(1.0)));
  const Stepper st(ops, SchemeParams::fixed(0.5, 0.1, 1));
  EXPECT_THROW(operator_norm(st, 1, {1e-16, 2, 1}), ConvergenceFailure);
}

TEST(TransposedStep, MatchesDenseTranspose) {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  auto ops = std::make_shared<const DiscreteOperators>(assemble_operators(5, 1, DampingField::constant(3.0)));
  const Stepper st(ops, SchemeParams::fixed(0.7, 0.2, 1));
  const auto [l, r] = oracle::step_matrices(oracle::assemble(5, 1, [](double) { return 3.0; }), 0.7, 0.2);
  const MatrixXd t = l.fullPivLu().solve(r);
  Vector u(ops->dim_v());
  Vector p(ops->dim_q());
  for (auto& v : u) v = dist(rng);
  for (auto& v : p) v = dist(rng);
  Vector ou(u.size());
  Vector op(p.size());
  st.apply_transposed_step(u, p, ou, op);
  const VectorXd ref = t.transpose() * oracle::stack(u, p);
  EXPECT_LT((oracle::stack(ou, op) - ref).norm(), 1e-12 * ref.norm());
}

TEST(ErrorNorms, ReferenceStateHasZeroDiscreteError) {
  auto ops = std::make_shared<const DiscreteOperators>(assemble_operators(20, 1, DampingField::constant(10.0)));
  const AnalyticMode m = analytic_mode(10.0);
  for (auto map : {ReferenceMap::l2_projection, ReferenceMap::interpolation}) {
    auto [u, p] = reference_state(*ops, [&](double x) { return m.u(x, 0.3); }, [&](double x) { return m.p(x, 0.3); }, map);
    const ErrorRow row = error_norms(*ops, State{u, p, 0}, 0.3, 10.0, map);
    EXPECT_EQ(row.discrete_error, 0.0);
    EXPECT_LT(row.l2_error_u, 1e-3);
    EXPECT_LT(row.l2_error_p, 1e-2);
  }
}

TEST(Convergence, StepsForChecksDivisibility) {
  EXPECT_EQ(steps_for(1.0, 0.0625), 16u);
  EXPECT_EQ(steps_for(10.0, 1e-3), 10000u);
  EXPECT_THROW(steps_for(1.0, 0.3), InvalidArgument);
}

TEST(Convergence, RatesFromTwoPoints) {
  std::vector<ErrorRow> rows(2);
  rows[0].h = 0.5;
  rows[1].h = 0.25;
  rows[0].discrete_error = 1.0;
  rows[1].discrete_error = 0.25;
  fill_rates(rows, SweepKind::h);
  EXPECT_FALSE(rows[0].rate.has_value());
  EXPECT_NEAR(*rows[1].rate, 2.0, 1e-14);
}

TEST(Poincare, LinearFunctionExample) {
  const Discretization d = make_discretization(4, 0);
  const FEFunction u(d.v_space, {0.0, 0.25, 0.5, 0.75, 1.0});
  const PoincareTerms t = poincare_check(u, DampingField::constant(1.0));
  EXPECT_NEAR(t.lhs, std::sqrt(1.0 / 3.0), 1e-14);
  EXPECT_NEAR(t.rhs, 1.0 / pi + 0.5, 1e-14);
}

TEST(Poincare, HoldsForRandomSamples) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::uniform_real_distribution<double> pos(0.1, 10.0);
  for (int trial = 0; trial < 100; ++trial) {
    const int k = trial % 3;
    const Discretization d = make_discretization(8 + trial % 5, k);
    Vector c(d.dim_v());
    for (auto& v : c) v = dist(rng);
    std::vector<double> pieces(1 + trial % 4);
    for (auto& a : pieces) a = pos(rng);
    const PoincareTerms t = poincare_check(FEFunction(d.v_space, c), DampingField::piecewise(pieces));
    EXPECT_LE(t.lhs, t.rhs * (1 + 1e-12)) << "trial " << trial;
  }
}
