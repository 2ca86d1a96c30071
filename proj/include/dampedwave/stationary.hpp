#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "dampedwave/assembly.hpp"
#include "dampedwave/error.hpp"
#include "dampedwave/linalg.hpp"
#include "dampedwave/mixed_system.hpp"

namespace dampedwave {

enum class StationaryMethod {
  monolithic,  ///< banded LU of the full symmetric indefinite block system
  schur,       ///< eliminate u through A, dense Cholesky on B A^{-1} B^T
};

struct StationarySolution {
  FEFunction u_bar;
  FEFunction p_bar;
  double residual_v = 0.0;  ///< ||A u - B^T p - f||
  double residual_q = 0.0;  ///< ||B u - g||
};

namespace detail {

inline void require_finite_load(std::span<const double> v, const char* what) {
  if (!all_finite(v)) throw InvalidArgument(std::string("solve_stationary: non-finite ") + what);
}

/// Dense in-place Cholesky solve; `m` is row-major n x n and is overwritten.
inline void dense_cholesky_solve(std::vector<double>& m, std::size_t n, std::span<double> b) {
  for (std::size_t j = 0; j < n; ++j) {
    double d = m[j * n + j];
    for (std::size_t k = 0; k < j; ++k) d -= m[j * n + k] * m[j * n + k];
    if (!(d > 0.0)) throw SingularMatrix("solve_stationary: Schur complement not positive definite");
    d = std::sqrt(d);
    m[j * n + j] = d;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = m[i * n + j];
      for (std::size_t k = 0; k < j; ++k) s -= m[i * n + k] * m[j * n + k];
      m[i * n + j] = s / d;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= m[i * n + k] * b[k];
    b[i] = s / m[i * n + i];
  }
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= m[k * n + i] * b[k];
    b[i] = s / m[i * n + i];
  }
}

}  // namespace detail

/// Residuals of the discrete stationary system for given coefficients.
inline std::pair<double, double> stationary_residuals(const DiscreteOperators& ops, std::span<const double> u,
                                                      std::span<const double> p, std::span<const double> f,
                                                      std::span<const double> g) {
  const BlockCoefficients c{0.0, 1.0, -1.0, 1.0, 0.0};
  std::vector<double> ru(ops.dim_v());
  std::vector<double> rq(ops.dim_q());
  apply_block(ops, c, u, p, ru, rq);
  axpy(-1.0, f, ru);
  axpy(-1.0, g, rq);
  return {norm2(ru), norm2(rq)};
}

/// Solves  A u - B^T p = f,  B u = g  for load vectors f on V_h and g on Q_h.
/// Requires a0 > 0; the pressure boundary condition is carried by the weak form.
inline StationarySolution solve_stationary(const DiscreteOperators& ops, std::span<const double> f,
                                           std::span<const double> g,
                                           StationaryMethod method = StationaryMethod::monolithic) {
  const std::size_t nv = ops.dim_v();
  const std::size_t nq = ops.dim_q();
  if (f.size() != nv || g.size() != nq) throw InvalidArgument("solve_stationary: load dimension mismatch");
  detail::require_finite_load(f, "load f");
  detail::require_finite_load(g, "load g");
  if (!(ops.damping_field.a0() > 0.0)) {
    throw SingularMatrix("solve_stationary: damping lower bound a0 must be positive");
  }

  std::vector<double> u(nv);
  std::vector<double> p(nq);
  if (method == StationaryMethod::monolithic) {
    const MixedOrdering order(ops.disc);
    const BandedLU lu(assemble_mixed_banded(ops, order, {0.0, 1.0, -1.0, 1.0, 0.0}));
    std::vector<double> z(order.size());
    order.pack(f, g, z);
    lu.solve_in_place(z);
    order.unpack(z, u, p);
  } else {
    const BandedCholesky a_factor(ops.damping);
    std::vector<double> schur(nq * nq, 0.0);
    std::vector<double> e(nq, 0.0);
    std::vector<double> col(nv);
    std::vector<double> bcol(nq);
    for (std::size_t j = 0; j < nq; ++j) {
      e[j] = 1.0;
      ops.coupling.multiply_transposed(e, col);
      a_factor.solve_in_place(col);
      ops.coupling.multiply(col, bcol);
      for (std::size_t i = 0; i < nq; ++i) schur[i * nq + j] = bcol[i];
      e[j] = 0.0;
    }
    std::vector<double> ainv_f = a_factor.solve(f);
    std::vector<double> rhs = ops.coupling.multiply(ainv_f);
    for (std::size_t i = 0; i < nq; ++i) rhs[i] = g[i] - rhs[i];
    detail::dense_cholesky_solve(schur, nq, rhs);
    p = rhs;
    std::vector<double> w = ops.coupling.multiply_transposed(p);
    for (std::size_t i = 0; i < nv; ++i) w[i] += f[i];
    u = a_factor.solve(w);
  }
  if (!all_finite(u) || !all_finite(p)) throw SingularMatrix("solve_stationary: non-finite solution");

  const auto [rv, rq] = stationary_residuals(ops, u, p, f, g);
  return {FEFunction(ops.disc.v_space, std::move(u)), FEFunction(ops.disc.q_space, std::move(p)), rv, rq};
}

}  // namespace dampedwave
