#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "dampedwave/error.hpp"

namespace dampedwave {

/// Quadrature rule on the reference cell [0,1]; weights sum to one.
struct QuadRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const noexcept { return nodes.size(); }
};

namespace detail {

/// Returns {P_n(x), P_n'(x)} via the three-term recurrence.
inline std::pair<double, double> legendre_with_derivative(int n, double x) {
  double p_prev = 1.0;
  double p = x;
  for (int m = 2; m <= n; ++m) {
    const double next = ((2.0 * m - 1.0) * x * p - (m - 1.0) * p_prev) / m;
    p_prev = p;
    p = next;
  }
  return {p, n * (x * p - p_prev) / (x * x - 1.0)};
}

}  // namespace detail

/// Gauss-Legendre rule with `n_points` nodes mapped to [0,1].
/// Exact for polynomials up to degree 2*n_points-1.
inline QuadRule gauss_rule(int n_points) {
  if (n_points < 1 || n_points > 10) {
    throw InvalidArgument("gauss_rule: n_points must lie in [1,10], got " +
                          std::to_string(n_points));
  }
  const int n = n_points;
  QuadRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      const auto [p, dp] = detail::legendre_with_derivative(n, x);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double dp = detail::legendre_with_derivative(n, x).second;
    const double w = 1.0 / ((1.0 - x * x) * dp * dp);  // half of the [-1,1] weight
    rule.nodes[i] = 0.5 * (1.0 - x);
    rule.nodes[n - 1 - i] = 0.5 * (1.0 + x);
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.5;
  return rule;
}

}  // namespace dampedwave
