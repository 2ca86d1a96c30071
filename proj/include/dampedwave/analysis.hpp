#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dampedwave/assembly.hpp"
#include "dampedwave/error.hpp"
#include "dampedwave/timestepper.hpp"

namespace dampedwave {

inline constexpr double pi = std::numbers::pi;

// --- analytic single-mode solution -----------------------------------------

struct AnalyticMode {
  double a = 0.0;
  double lambda = 0.0;       ///< decay exponent, -a/2 + sqrt(a^2/4 - pi^2)
  double p_amplitude = 0.0;  ///< (1/pi)(-a/2 - sqrt(a^2/4 - pi^2))

  double u(double x, double t) const { return std::exp(lambda * t) * std::cos(pi * x); }
  double p(double x, double t) const { return p_amplitude * std::exp(lambda * t) * std::sin(pi * x); }
  /// E^0(t) = 1/2 (||u||^2 + ||p||^2) in closed form.
  double energy(double t) const { return 0.25 * std::exp(2.0 * lambda * t) * (1.0 + p_amplitude * p_amplitude); }
};

/// Overdamped single Fourier mode; only defined for a >= 2 pi.
inline AnalyticMode analytic_mode(double a) {
  if (!std::isfinite(a) || a < 2.0 * pi) {
    throw RegimeError("analytic solution requires a >= 2*pi (got a = " + std::to_string(a) + ")");
  }
  const double root = std::sqrt(std::max(0.0, 0.25 * a * a - pi * pi));
  return {a, -0.5 * a + root, (-0.5 * a - root) / pi};
}

inline std::pair<double, double> analytic_solution(double a, double x, double t) {
  const AnalyticMode m = analytic_mode(a);
  return {m.u(x, t), m.p(x, t)};
}

inline double analytic_energy(double a, double t) { return analytic_mode(a).energy(t); }

/// g(a) = a/2 - Re sqrt(a^2/4 - pi^2).
inline double exact_rate_constant_a(double a) {
  if (!(a > 0.0) || !std::isfinite(a)) throw InvalidArgument("exact_rate_constant_a: a must be positive");
  const std::complex<double> root = std::sqrt(std::complex<double>(0.25 * a * a - pi * pi, 0.0));
  return 0.5 * a - root.real();
}

// --- stability constants ------------------------------------------------------

struct StabilityConstants {
  double a0 = 0.0;
  double a1 = 0.0;
  double alpha_cont = 0.0;
  double alpha_disc = 0.0;
  double eps0 = 0.0;
  std::optional<double> theta;
  std::optional<double> tau0;
};

inline StabilityConstants stability_constants(double a0, double a1, std::optional<double> theta = std::nullopt) {
  if (!(a0 > 0.0) || !(a1 >= a0) || !std::isfinite(a1)) {
    throw InvalidArgument("stability_constants: need 0 < a0 <= a1");
  }
  StabilityConstants s;
  s.a0 = a0;
  s.a1 = a1;
  const double a03 = a0 * a0 * a0;
  const double a14 = a1 * a1 * a1 * a1;
  const double d_disc = 8.0 * a0 * a0 + 4.0 * a0 * a0 * a1 + 3.0 * a0 * a1 + 4.0 * a14;
  s.alpha_cont = (4.0 / 3.0) * a03 / (8.0 * a0 * a0 + 4.0 * a0 * a0 * a1 + 2.0 * a0 * a1 + a14);
  s.alpha_disc = (2.0 / 3.0) * a03 / d_disc;
  s.eps0 = 2.0 * a03 / d_disc;
  if (theta) {
    const double th = *theta;
    if (!(th > 0.5 && th <= 1.0)) throw InvalidArgument("stability_constants: tau0 needs 1/2 < theta <= 1");
    const double c = 1.25 * th * th + (a1 / (2.0 * a0)) * th * th + 0.25 * (1.0 - th) * (1.0 - th) +
                     0.5 * th * (1.0 - th);
    s.theta = th;
    s.tau0 = (th - 0.5) / (s.eps0 * c);
  }
  return s;
}

/// Upper bound on |eps| for which the modified energy is equivalent to E^1.
inline double modified_energy_eps_bound(double a0, double a1) { return a0 / (4.0 + 2.0 * a1); }

// --- decay-rate fitting -------------------------------------------------------

struct RateFit {
  double alpha = 0.0;
  double intercept = 0.0;
  std::size_t n_lo = 0;  ///< first sample index used
  std::size_t n_hi = 0;  ///< last sample index used
  double residual = 0.0; ///< root-mean-square residual of ln E
};

/// Time window [t_lo, t_hi]; unset ends default to dropping the first 10% of samples / the end.
struct FitWindow {
  std::optional<double> t_lo;
  std::optional<double> t_hi;
};

inline RateFit fit_decay_rate(std::span<const double> times, std::span<const double> values, FitWindow window = {}) {
  if (times.size() != values.size()) throw InvalidArgument("fit_decay_rate: size mismatch");
  const std::size_t n = times.size();
  if (n < 2) throw InvalidArgument("fit_decay_rate: need at least two samples");
  std::size_t lo = 0;
  std::size_t hi = n - 1;
  if (window.t_lo) {
    while (lo < n && times[lo] < *window.t_lo - 1e-12) ++lo;
  } else {
    lo = n / 10;
  }
  if (window.t_hi) {
    while (hi > 0 && times[hi] > *window.t_hi + 1e-12) --hi;
  }
  if (lo >= n || hi <= lo) throw InvalidArgument("fit_decay_rate: window contains fewer than two samples");

  const double m = static_cast<double>(hi - lo + 1);
  double st = 0.0;
  double sy = 0.0;
  for (std::size_t i = lo; i <= hi; ++i) {
    if (!(values[i] > 0.0)) {
      throw InvalidArgument("fit_decay_rate: non-positive energy at sample " + std::to_string(i));
    }
    st += times[i];
    sy += std::log(values[i]);
  }
  const double tm = st / m;
  const double ym = sy / m;
  double stt = 0.0;
  double sty = 0.0;
  for (std::size_t i = lo; i <= hi; ++i) {
    const double dt = times[i] - tm;
    stt += dt * dt;
    sty += dt * (std::log(values[i]) - ym);
  }
  if (!(stt > 0.0)) throw InvalidArgument("fit_decay_rate: degenerate time window");
  const double slope = sty / stt;
  RateFit fit;
  fit.alpha = -slope;
  fit.intercept = ym - slope * tm;
  fit.n_lo = lo;
  fit.n_hi = hi;
  double ss = 0.0;
  for (std::size_t i = lo; i <= hi; ++i) {
    const double r = std::log(values[i]) - (fit.intercept + slope * times[i]);
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / m);
  return fit;
}

inline RateFit fit_decay_rate(const EnergySeries& series, FitWindow window = {}) {
  std::vector<double> t(series.size());
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = series.time(i);
  return fit_decay_rate(t, series.values, window);
}

// --- operator norm of the discrete propagator ----------------------------------

struct OperatorNormOptions {
  double tol = 1e-8;
  std::size_t max_iterations = 5000;
  std::uint64_t seed = 12345;
};

struct OperatorNormResult {
  double norm = 1.0;
  std::size_t iterations = 0;
};

/// ||S||, S = (one step)^n_steps, in the norm (||u||^2 + ||p||^2)^{1/2} induced by M_V, M_Q.
/// Power iteration on G^{-1} S^T G S with G = diag(M_V, M_Q).
inline OperatorNormResult operator_norm(const Stepper& stepper, std::size_t n_steps, OperatorNormOptions opts = {}) {
  if (!(opts.tol > 0.0)) throw InvalidArgument("operator_norm: tol must be positive");
  if (n_steps == 0) return {1.0, 0};
  const auto& ops = stepper.ops();
  const std::size_t nv = ops.dim_v();
  const std::size_t nq = ops.dim_q();

  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  State x{Vector(nv), Vector(nq), 0};
  for (auto& v : x.u) v = dist(rng);
  for (auto& v : x.p) v = dist(rng);

  auto g_norm = [&](const Vector& u, const Vector& p) {
    return std::sqrt(ops.mass_v.quadratic_form(u) + ops.mass_q.quadratic_form(p));
  };
  auto normalize = [&](State& s) {
    const double nrm = g_norm(s.u, s.p);
    if (!(nrm > 0.0) || !std::isfinite(nrm)) throw NumericalError("operator_norm: degenerate iterate");
    for (auto& v : s.u) v /= nrm;
    for (auto& v : s.p) v /= nrm;
  };
  normalize(x);

  double rho = 0.0;
  double gap = 0.0;
  for (std::size_t it = 1; it <= opts.max_iterations; ++it) {
    State y = x;
    y.time_index = 0;
    for (std::size_t n = 0; n < n_steps; ++n) y = stepper.step(y);
    const double sx = g_norm(y.u, y.p);
    const double rho_new = sx * sx;

    Vector zu = ops.mass_v.multiply(y.u);
    Vector zp = ops.mass_q.multiply(y.p);
    Vector wu(nv);
    Vector wp(nq);
    for (std::size_t n = 0; n < n_steps; ++n) {
      stepper.apply_transposed_step(zu, zp, wu, wp);
      std::swap(zu, wu);
      std::swap(zp, wp);
    }
    ops.mass_v_factor.solve_in_place(zu);
    ops.mass_q_factor.solve_in_place(zp);
    x.u = std::move(zu);
    x.p = std::move(zp);
    if (rho_new == 0.0) return {0.0, it};
    normalize(x);

    gap = std::abs(rho_new - rho);
    if (it > 1 && gap <= opts.tol * rho_new) return {std::sqrt(rho_new), it};
    rho = rho_new;
  }
  throw ConvergenceFailure("operator_norm: power iteration did not converge", std::sqrt(rho), gap);
}

// --- error norms ----------------------------------------------------------------

struct ErrorRow {
  double h = 0.0;
  double tau = 0.0;
  double theta = 0.0;
  double discrete_error = 0.0;  ///< (||u_h - pi_h u||^2 + ||p_h - rho_h p||^2)^{1/2}
  double l2_error_u = 0.0;
  double l2_error_p = 0.0;
  std::optional<double> rate;
};

/// L2 distance between an FE coefficient vector and a function, with k+4 Gauss points per cell.
inline double l2_distance(const DiscreteOperators& ops, std::span<const double> coeffs, SpaceKind space,
                          const ScalarFunction& f) {
  const auto& disc = ops.disc;
  const auto& fs = space == SpaceKind::v ? *disc.v_space : *disc.q_space;
  const QuadRule quad = gauss_rule(std::min(10, disc.k + 4));
  const BasisTable table = fs.tabulate(quad);
  double s = 0.0;
  for (std::size_t c = 0; c < disc.mesh->n_cells(); ++c) {
    for (std::size_t q = 0; q < quad.size(); ++q) {
      double v = 0.0;
      for (std::size_t j = 0; j < fs.n_local(); ++j) v += coeffs[fs.global_index(c, j)] * table.values[q][j];
      const double d = v - f(disc.mesh->to_global(c, quad.nodes[q]));
      s += quad.weights[q] * disc.h() * d * d;
    }
  }
  return std::sqrt(s);
}

/// How the exact solution is mapped into V_h x Q_h for initial data and the discrete error.
enum class ReferenceMap {
  l2_projection,  ///< (pi_h u, rho_h p)
  interpolation,  ///< Lagrange interpolation at the element nodes
};

inline std::pair<Vector, Vector> reference_state(const DiscreteOperators& ops, const ScalarFunction& u,
                                                 const ScalarFunction& p, ReferenceMap map) {
  if (map == ReferenceMap::interpolation) {
    return {interpolate(ops.disc.v_space, u).coefficients(), interpolate(ops.disc.q_space, p).coefficients()};
  }
  return {project_v(ops, u).coefficients(), project_q(ops, p).coefficients()};
}

inline ErrorRow error_norms(const DiscreteOperators& ops, const State& state, double t, double a_const,
                            ReferenceMap map = ReferenceMap::l2_projection) {
  const AnalyticMode m = analytic_mode(a_const);
  const auto uf = [&](double x) { return m.u(x, t); };
  const auto pf = [&](double x) { return m.p(x, t); };
  auto [du, dp] = reference_state(ops, uf, pf, map);
  for (std::size_t i = 0; i < du.size(); ++i) du[i] = state.u[i] - du[i];
  for (std::size_t i = 0; i < dp.size(); ++i) dp[i] = state.p[i] - dp[i];
  ErrorRow row;
  row.h = ops.disc.h();
  row.discrete_error = std::sqrt(ops.mass_v.quadratic_form(du) + ops.mass_q.quadratic_form(dp));
  row.l2_error_u = l2_distance(ops, state.u, SpaceKind::v, uf);
  row.l2_error_p = l2_distance(ops, state.p, SpaceKind::q, pf);
  return row;
}

// --- convergence study ----------------------------------------------------------

enum class SweepKind { h, tau };

struct ConvergencePoint {
  std::size_t n_cells = 0;
  double tau = 0.0;
};

struct ConvergenceSpec {
  double a_const = 10.0;
  int k = 0;
  double t_final = 1.0;
  bool adaptive = false;  ///< theta = 1/2 + lambda*tau instead of fixed theta
  double theta = 1.0;
  double lambda = 1.0;
  SweepKind sweep = SweepKind::h;
  ReferenceMap reference = ReferenceMap::l2_projection;
  std::vector<ConvergencePoint> points;
};

inline std::size_t steps_for(double t_final, double tau) {
  const double n = std::round(t_final / tau);
  if (n < 1.0 || std::abs(n * tau - t_final) > 1e-9 * std::max(1.0, t_final)) {
    throw InvalidArgument("t_final is not an integer multiple of tau");
  }
  return static_cast<std::size_t>(n);
}

/// One row of a convergence table: run to t_final from the projected analytic data.
inline ErrorRow convergence_point(const ConvergenceSpec& spec, const ConvergencePoint& pt) {
  const AnalyticMode m = analytic_mode(spec.a_const);
  auto ops = std::make_shared<const DiscreteOperators>(
      assemble_operators(pt.n_cells, spec.k, DampingField::constant(spec.a_const)));
  const std::size_t n_steps = steps_for(spec.t_final, pt.tau);
  const SchemeParams scheme = spec.adaptive ? SchemeParams::adaptive_theta(spec.lambda, pt.tau, n_steps)
                                            : SchemeParams::fixed(spec.theta, pt.tau, n_steps);
  const Stepper stepper(ops, scheme);
  auto [u0, p0] = reference_state(*ops, [&](double x) { return m.u(x, 0.0); }, [&](double x) { return m.p(x, 0.0); },
                                  spec.reference);
  State s{std::move(u0), std::move(p0), 0};
  for (std::size_t n = 0; n < n_steps; ++n) s = stepper.step(s);
  ErrorRow row = error_norms(*ops, s, spec.t_final, spec.a_const, spec.reference);
  row.tau = pt.tau;
  row.theta = scheme.effective_theta();
  return row;
}

/// Observed rates log(e_prev/e)/log(x_prev/x) with x = h or tau, filled in place.
inline void fill_rates(std::vector<ErrorRow>& rows, SweepKind sweep) {
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double x0 = sweep == SweepKind::h ? rows[i - 1].h : rows[i - 1].tau;
    const double x1 = sweep == SweepKind::h ? rows[i].h : rows[i].tau;
    rows[i].rate = std::log(rows[i - 1].discrete_error / rows[i].discrete_error) / std::log(x0 / x1);
  }
}

inline std::vector<ErrorRow> convergence_study(const ConvergenceSpec& spec) {
  if (spec.points.size() < 2) throw InvalidArgument("convergence_study: need at least two sweep points");
  std::vector<ErrorRow> rows;
  rows.reserve(spec.points.size());
  for (const auto& pt : spec.points) rows.push_back(convergence_point(spec, pt));
  fill_rates(rows, spec.sweep);
  return rows;
}

// --- generalized Poincare inequality --------------------------------------------

struct PoincareTerms {
  double lhs = 0.0;  ///< ||u||
  double rhs = 0.0;  ///< (1/pi)(1 + ||a - abar||/abar) ||u'|| + |int a u| / abar
};

/// Both sides of the generalized Poincare inequality for u in V_h, evaluated by quadrature.
inline PoincareTerms poincare_check(const FEFunction& u, const DampingField& a) {
  const FESpace& fs = u.space();
  const Mesh1D& mesh = fs.mesh();
  const QuadRule quad = gauss_rule(std::min(10, fs.degree() + 4));
  const BasisTable table = fs.tabulate(quad);
  const auto& c = u.coefficients();
  const double h = mesh.h();
  double abar = 0.0;
  for (std::size_t cell = 0; cell < mesh.n_cells(); ++cell) {
    for (std::size_t q = 0; q < quad.size(); ++q) abar += quad.weights[q] * h * a(mesh.to_global(cell, quad.nodes[q]));
  }
  if (abar == 0.0) throw InvalidArgument("poincare_check: mean of a vanishes");
  double uu = 0.0;
  double dd = 0.0;
  double au = 0.0;
  double aa = 0.0;
  for (std::size_t cell = 0; cell < mesh.n_cells(); ++cell) {
    for (std::size_t q = 0; q < quad.size(); ++q) {
      double v = 0.0;
      double dv = 0.0;
      for (std::size_t j = 0; j < fs.n_local(); ++j) {
        v += c[fs.global_index(cell, j)] * table.values[q][j];
        dv += c[fs.global_index(cell, j)] * table.derivatives[q][j] / h;
      }
      const double w = quad.weights[q] * h;
      const double ax = a(mesh.to_global(cell, quad.nodes[q]));
      uu += w * v * v;
      dd += w * dv * dv;
      au += w * ax * v;
      aa += w * (ax - abar) * (ax - abar);
    }
  }
  PoincareTerms t;
  t.lhs = std::sqrt(uu);
  t.rhs = (1.0 / pi) * (1.0 + std::sqrt(aa) / std::abs(abar)) * std::sqrt(dd) + std::abs(au) / std::abs(abar);
  return t;
}

}  // namespace dampedwave
