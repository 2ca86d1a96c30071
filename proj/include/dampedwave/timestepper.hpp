#pragma once

#include <cmath>
#include <cstddef>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dampedwave/assembly.hpp"
#include "dampedwave/error.hpp"
#include "dampedwave/linalg.hpp"
#include "dampedwave/mixed_system.hpp"

namespace dampedwave {

/// Parameters of the theta-scheme.  In adaptive mode the weight is 1/2 + lambda*tau.
struct SchemeParams {
  double theta = 1.0;
  double tau = 0.0;
  double lambda = 0.0;
  bool adaptive = false;
  std::size_t n_steps = 0;

  static SchemeParams fixed(double theta, double tau, std::size_t n_steps) {
    SchemeParams s;
    s.theta = theta;
    s.tau = tau;
    s.n_steps = n_steps;
    return s;
  }

  static SchemeParams adaptive_theta(double lambda, double tau, std::size_t n_steps) {
    SchemeParams s;
    s.lambda = lambda;
    s.tau = tau;
    s.adaptive = true;
    s.n_steps = n_steps;
    s.theta = 0.5 + lambda * tau;
    return s;
  }

  double effective_theta() const noexcept { return adaptive ? 0.5 + lambda * tau : theta; }

  void validate() const {
    if (!(tau > 0.0) || !std::isfinite(tau)) throw InvalidArgument("SchemeParams: tau must be positive");
    if (adaptive) {
      if (!(lambda >= 0.0)) throw InvalidArgument("SchemeParams: lambda must be non-negative");
      if (0.5 + lambda * tau > 1.0) throw InvalidArgument("SchemeParams: adaptive theta 1/2 + lambda*tau exceeds 1");
    } else if (!(theta >= 0.0 && theta <= 1.0)) {
      throw InvalidArgument("SchemeParams: theta must lie in [0,1]");
    }
  }
};

/// Coefficients (u_h^n, p_h^n) at time level n.
struct State {
  Vector u;
  Vector p;
  std::size_t time_index = 0;
};

/// The most recent states, newest first, with contiguous time indices.
class StateHistory {
 public:
  StateHistory(std::size_t depth, double tau) : depth_(depth), tau_(tau) {
    if (depth == 0) throw InvalidArgument("StateHistory: depth must be positive");
  }

  void push(State s) {
    if (!states_.empty() && s.time_index != states_.front().time_index + 1) {
      throw InvalidArgument("StateHistory: non-contiguous time index " + std::to_string(s.time_index));
    }
    states_.push_front(std::move(s));
    if (states_.size() > depth_) states_.pop_back();
  }

  /// State `lag` levels back from the newest (lag 0 = newest).
  const State& at(std::size_t lag) const { return states_.at(lag); }
  const State& newest() const { return states_.front(); }
  std::size_t size() const noexcept { return states_.size(); }
  std::size_t depth() const noexcept { return depth_; }
  double tau() const noexcept { return tau_; }

 private:
  std::size_t depth_;
  double tau_;
  std::deque<State> states_;
};

/// k-th backward difference quotient of u and p at the state `lag` levels back.
inline std::pair<Vector, Vector> difference_quotient(const StateHistory& hist, int k, std::size_t lag = 0) {
  if (k < 0) throw InvalidArgument("difference_quotient: negative order");
  const auto order = static_cast<std::size_t>(k);
  if (hist.size() < lag + order + 1) {
    throw InvalidArgument("difference_quotient: history holds " + std::to_string(hist.size()) +
                          " states, order " + std::to_string(k) + " needs " + std::to_string(lag + order + 1));
  }
  Vector du(hist.at(lag).u.size(), 0.0);
  Vector dp(hist.at(lag).p.size(), 0.0);
  double binom = 1.0;
  const double scale = std::pow(hist.tau(), -k);
  for (std::size_t j = 0; j <= order; ++j) {
    const double w = ((j % 2 == 0) ? 1.0 : -1.0) * binom * scale;
    axpy(w, hist.at(lag + j).u, du);
    axpy(w, hist.at(lag + j).p, dp);
    binom = binom * static_cast<double>(order - j) / static_cast<double>(j + 1);
  }
  return {std::move(du), std::move(dp)};
}

/// Discrete energy E_h^{k,n} = 1/2 (||d^k u^n||^2 + ||d^k p^n||^2) with mass-weighted norms.
inline double energy(const StateHistory& hist, int k, const DiscreteOperators& ops) {
  const auto [du, dp] = difference_quotient(hist, k);
  return 0.5 * (ops.mass_v.quadratic_form(du) + ops.mass_q.quadratic_form(dp));
}

/// Modified energy E_h^{1,n} + eps (d u^n, u^{n,theta}).
inline double modified_energy(const StateHistory& hist, double eps, double theta, const DiscreteOperators& ops) {
  const auto [du, dp] = difference_quotient(hist, 1);
  const double e1 = 0.5 * (ops.mass_v.quadratic_form(du) + ops.mass_q.quadratic_form(dp));
  Vector u_theta(hist.at(0).u.size(), 0.0);
  axpy(theta, hist.at(0).u, u_theta);
  axpy(1.0 - theta, hist.at(1).u, u_theta);
  const Vector mu = ops.mass_v.multiply(u_theta);
  return e1 + eps * dot(du, mu);
}

struct BalanceTerms {
  double lhs = 0.0;
  double rhs = 0.0;
};

/// Both sides of the discrete energy balance at the newest level:
///   lhs = (E^{k,n} - E^{k,n-1}) / tau
///   rhs = -(theta - 1/2) tau (||d^{k+1} u^n||^2 + ||d^{k+1} p^n||^2) - (a d^k u^{n,theta}, d^k u^{n,theta})
/// Needs k+2 states.
inline BalanceTerms energy_balance(const StateHistory& hist, int k, double theta, const DiscreteOperators& ops) {
  const auto [du_n, dp_n] = difference_quotient(hist, k, 0);
  const auto [du_m, dp_m] = difference_quotient(hist, k, 1);
  const auto [ddu, ddp] = difference_quotient(hist, k + 1, 0);
  const double e_n = 0.5 * (ops.mass_v.quadratic_form(du_n) + ops.mass_q.quadratic_form(dp_n));
  const double e_m = 0.5 * (ops.mass_v.quadratic_form(du_m) + ops.mass_q.quadratic_form(dp_m));
  Vector blend(du_n.size(), 0.0);
  axpy(theta, du_n, blend);
  axpy(1.0 - theta, du_m, blend);
  BalanceTerms t;
  t.lhs = (e_n - e_m) / hist.tau();
  t.rhs = -(theta - 0.5) * hist.tau() * (ops.mass_v.quadratic_form(ddu) + ops.mass_q.quadratic_form(ddp)) -
          ops.damping.quadratic_form(blend);
  return t;
}

/// ||u^{n,theta}|| and the bound (1/a0)||d u^n|| + (a1/a0)||d p^n|| at the newest level.
inline BalanceTerms poincare_trajectory_bound(const StateHistory& hist, double theta, const DiscreteOperators& ops) {
  const double a0 = ops.damping_field.a0();
  const double a1 = ops.damping_field.a1();
  const auto [du, dp] = difference_quotient(hist, 1);
  Vector u_theta(hist.at(0).u.size(), 0.0);
  axpy(theta, hist.at(0).u, u_theta);
  axpy(1.0 - theta, hist.at(1).u, u_theta);
  BalanceTerms t;
  t.lhs = l2_norm(ops, u_theta, SpaceKind::v);
  t.rhs = l2_norm(ops, du, SpaceKind::v) / a0 + (a1 / a0) * l2_norm(ops, dp, SpaceKind::q);
  return t;
}

enum class StepSolver {
  monolithic,  ///< banded LU of the interleaved (u, p) system
  schur,       ///< eliminate p^n through the block-diagonal M_Q, Cholesky on u
};

/// Load vectors (f^n, v) and (g^n, q) added to the right-hand side of one step.
struct StepLoads {
  Vector f;
  Vector g;
};

/// Factor-once theta-scheme integrator for the mixed semi-discretization.
class Stepper {
 public:
  Stepper(std::shared_ptr<const DiscreteOperators> ops, SchemeParams scheme,
          StepSolver solver = StepSolver::monolithic)
      : ops_(std::move(ops)), scheme_(scheme), solver_(solver), order_(ops_->disc) {
    scheme_.validate();
    theta_ = scheme_.effective_theta();
    const double tau = scheme_.tau;
    lhs_ = {1.0 / tau, theta_, -theta_, theta_, 1.0 / tau};
    rhs_ = {1.0 / tau, -(1.0 - theta_), 1.0 - theta_, -(1.0 - theta_), 1.0 / tau};
    if (solver_ == StepSolver::monolithic) {
      lhs_matrix_ = assemble_mixed_banded(*ops_, order_, lhs_);
      lu_ = BandedLU(lhs_matrix_);
    } else {
      build_schur();
    }
  }

  const DiscreteOperators& ops() const noexcept { return *ops_; }
  const std::shared_ptr<const DiscreteOperators>& ops_ptr() const noexcept { return ops_; }
  const SchemeParams& scheme() const noexcept { return scheme_; }
  double theta() const noexcept { return theta_; }
  double tau() const noexcept { return scheme_.tau; }
  StepSolver solver() const noexcept { return solver_; }
  const MixedOrdering& ordering() const noexcept { return order_; }
  const BlockCoefficients& lhs_coefficients() const noexcept { return lhs_; }
  const BlockCoefficients& rhs_coefficients() const noexcept { return rhs_; }

  /// Left-hand step matrix in the interleaved ordering (monolithic solver only).
  const BandedMatrix& lhs_matrix() const {
    if (solver_ != StepSolver::monolithic) throw InvalidArgument("Stepper::lhs_matrix: not a monolithic stepper");
    return lhs_matrix_;
  }

  /// Advances one level.  Throws BlowUp if the new state is not finite.
  State step(const State& s, const StepLoads* loads = nullptr) const {
    const std::size_t nv = ops_->dim_v();
    const std::size_t nq = ops_->dim_q();
    if (s.u.size() != nv || s.p.size() != nq) throw InvalidArgument("Stepper::step: state dimension mismatch");
    Vector ru(nv);
    Vector rq(nq);
    apply_block(*ops_, rhs_, s.u, s.p, ru, rq);
    if (loads != nullptr) {
      if (loads->f.size() != nv || loads->g.size() != nq) throw InvalidArgument("Stepper::step: load dimension mismatch");
      axpy(1.0, loads->f, ru);
      axpy(1.0, loads->g, rq);
    }
    State next{Vector(nv), Vector(nq), s.time_index + 1};
    solve(ru, rq, next.u, next.p);
    if (!all_finite(next.u) || !all_finite(next.p)) throw BlowUp(next.time_index, "non-finite state");
    return next;
  }

  /// Applies the transpose of the one-step map x -> L^{-1} R x, i.e. R^T L^{-T}.
  void apply_transposed_step(std::span<const double> u, std::span<const double> p, std::span<double> out_u,
                             std::span<double> out_p) const {
    if (solver_ != StepSolver::monolithic) {
      throw InvalidArgument("Stepper::apply_transposed_step: requires the monolithic solver");
    }
    Vector z(order_.size());
    order_.pack(u, p, z);
    lu_.solve_transposed_in_place(z);
    Vector zu(ops_->dim_v());
    Vector zp(ops_->dim_q());
    order_.unpack(z, zu, zp);
    // R^T swaps the roles of the two off-diagonal coefficients.
    const BlockCoefficients rt{rhs_.mass_v_scale, rhs_.damping_scale, rhs_.coupling_scale, rhs_.coupling_t_scale,
                               rhs_.mass_q_scale};
    apply_block(*ops_, rt, zu, zp, out_u, out_p);
  }

 private:
  void solve(std::span<const double> ru, std::span<const double> rq, std::span<double> u, std::span<double> p) const {
    if (solver_ == StepSolver::monolithic) {
      Vector z(order_.size());
      order_.pack(ru, rq, z);
      lu_.solve_in_place(z);
      order_.unpack(z, u, p);
      return;
    }
    const double tau = scheme_.tau;
    Vector w(rq.begin(), rq.end());
    ops_->mass_q_factor.solve_in_place(w);  // M_Q^{-1} rq
    Vector rhs_u = ops_->coupling.multiply_transposed(w);
    for (std::size_t i = 0; i < rhs_u.size(); ++i) rhs_u[i] = ru[i] + theta_ * tau * rhs_u[i];
    schur_factor_.solve_in_place(rhs_u);
    std::copy(rhs_u.begin(), rhs_u.end(), u.begin());
    Vector bu = ops_->coupling.multiply(u);
    for (std::size_t i = 0; i < bu.size(); ++i) bu[i] = rq[i] - theta_ * bu[i];
    ops_->mass_q_factor.solve_in_place(bu);
    for (std::size_t i = 0; i < bu.size(); ++i) p[i] = tau * bu[i];
  }

  // K = M_V/tau + theta A + theta^2 tau B^T M_Q^{-1} B, assembled cell by cell.
  void build_schur() {
    const auto& ops = *ops_;
    const double tau = scheme_.tau;
    SymmetricBandedMatrix k(ops.dim_v(), ops.mass_v.bandwidth());
    k.combine(0.0, ops.mass_v, 1.0 / tau);
    k.combine(1.0, ops.damping, theta_);
    const auto& vs = *ops.disc.v_space;
    const auto& qs = *ops.disc.q_space;
    const std::size_t nv = vs.n_local();
    const std::size_t nq = qs.n_local();
    std::vector<Vector> b_cols(nv, Vector(nq));
    std::vector<Vector> minv_b(nv);
    for (std::size_t c = 0; c < ops.disc.mesh->n_cells(); ++c) {
      BlockDiagonalMatrix local(1, nq);
      for (std::size_t i = 0; i < nq; ++i) {
        for (std::size_t j = 0; j < nq; ++j) local.block_entry(0, i, j) = ops.mass_q.block_entry(c, i, j);
      }
      const BlockDiagonalCholesky local_factor(local);
      for (std::size_t j = 0; j < nv; ++j) {
        for (std::size_t i = 0; i < nq; ++i) b_cols[j][i] = ops.coupling(qs.global_index(c, i), vs.global_index(c, j));
        minv_b[j] = local_factor.solve(b_cols[j]);
      }
      for (std::size_t i = 0; i < nv; ++i) {
        for (std::size_t j = 0; j < nv; ++j) {
          const std::size_t gi = vs.global_index(c, i);
          const std::size_t gj = vs.global_index(c, j);
          if (gj > gi) continue;
          k.add_lower(gi, gj, theta_ * theta_ * tau * dot(b_cols[i], minv_b[j]));
        }
      }
    }
    schur_factor_ = BandedCholesky(k);
  }

  std::shared_ptr<const DiscreteOperators> ops_;
  SchemeParams scheme_;
  StepSolver solver_;
  MixedOrdering order_;
  double theta_ = 1.0;
  BlockCoefficients lhs_;
  BlockCoefficients rhs_;
  BandedMatrix lhs_matrix_;
  BandedLU lu_;
  BandedCholesky schur_factor_;
};

inline Stepper build_stepper(std::shared_ptr<const DiscreteOperators> ops, const SchemeParams& scheme,
                             StepSolver solver = StepSolver::monolithic) {
  return Stepper(std::move(ops), scheme, solver);
}

/// Discrete energies E^{k,n} for n >= k at spacing tau.
struct EnergySeries {
  int order = 0;
  double tau = 0.0;
  std::vector<std::size_t> indices;
  Vector values;

  double time(std::size_t i) const { return static_cast<double>(indices[i]) * tau; }
  std::size_t size() const noexcept { return values.size(); }
};

struct RunOptions {
  std::set<int> energy_orders{0};
  std::size_t snapshot_stride = 0;  ///< 0 disables snapshots
  std::size_t history_depth = 3;
  double blowup_factor = 1e12;
  /// Called after every pushed state (including the initial one).
  std::function<void(const StateHistory&)> observer;
  /// Optional loads for step n (1-based); return std::nullopt for a homogeneous step.
  std::function<std::optional<StepLoads>(std::size_t)> loads;
};

struct RunResult {
  StateHistory history;
  std::map<int, EnergySeries> energies;
  std::vector<State> snapshots;
};

/// Advances `init` by scheme.n_steps levels, recording energies and snapshots.
/// Aborts with BlowUp when the state turns non-finite or E^0 exceeds
/// blowup_factor times its initial value.
inline RunResult run(const Stepper& stepper, State init, const RunOptions& opts = {}) {
  const auto& ops = stepper.ops();
  std::size_t depth = opts.history_depth;
  for (int k : opts.energy_orders) {
    if (k < 0) throw InvalidArgument("run: negative energy order");
    depth = std::max(depth, static_cast<std::size_t>(k) + 1);
  }
  RunResult result{StateHistory(depth, stepper.tau()), {}, {}};
  for (int k : opts.energy_orders) result.energies[k] = EnergySeries{k, stepper.tau(), {}, {}};

  const double e0_init = 0.5 * (ops.mass_v.quadratic_form(init.u) + ops.mass_q.quadratic_form(init.p));
  auto record = [&](const State& s) {
    const auto& hist = result.history;
    for (auto& [k, series] : result.energies) {
      if (hist.size() >= static_cast<std::size_t>(k) + 1) {
        series.indices.push_back(s.time_index);
        series.values.push_back(energy(hist, k, ops));
      }
    }
    if (opts.snapshot_stride > 0 && s.time_index % opts.snapshot_stride == 0) result.snapshots.push_back(s);
    if (opts.observer) opts.observer(hist);
  };

  result.history.push(init);
  record(result.history.newest());
  const std::size_t n_steps = stepper.scheme().n_steps;
  for (std::size_t n = 1; n <= n_steps; ++n) {
    std::optional<StepLoads> loads;
    if (opts.loads) loads = opts.loads(n);
    State next = stepper.step(result.history.newest(), loads ? &*loads : nullptr);
    const double e0 = 0.5 * (ops.mass_v.quadratic_form(next.u) + ops.mass_q.quadratic_form(next.p));
    if (!std::isfinite(e0)) throw BlowUp(n, "non-finite energy");
    if (e0_init > 0.0 && e0 > opts.blowup_factor * e0_init) throw BlowUp(n, "energy exceeded blow-up threshold");
    result.history.push(std::move(next));
    record(result.history.newest());
  }
  return result;
}

/// Initial state (pi_h u0, rho_h p0).
inline State project_initial_state(const DiscreteOperators& ops, const ScalarFunction& u0, const ScalarFunction& p0) {
  return State{project_v(ops, u0).coefficients(), project_q(ops, p0).coefficients(), 0};
}

}  // namespace dampedwave
