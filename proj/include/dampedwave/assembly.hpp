#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "dampedwave/error.hpp"
#include "dampedwave/fe_space.hpp"
#include "dampedwave/linalg.hpp"

namespace dampedwave {

/// Damping coefficient a(x) together with its declared bounds a0 <= a(x) <= a1.
class DampingField {
 public:
  enum class Kind { constant, piecewise_constant, callable };

  static DampingField constant(double value) {
    require_finite(value);
    DampingField d;
    d.kind_ = Kind::constant;
    d.values_ = {value};
    d.a0_ = d.a1_ = value;
    return d;
  }

  /// Piecewise constant on `values.size()` equal subintervals of [0,1].
  /// Exact in assembly whenever the pieces align with mesh cells.
  static DampingField piecewise(std::vector<double> values) {
    if (values.empty()) throw InvalidArgument("DampingField::piecewise: no values");
    for (double v : values) require_finite(v);
    DampingField d;
    d.kind_ = Kind::piecewise_constant;
    d.a0_ = *std::min_element(values.begin(), values.end());
    d.a1_ = *std::max_element(values.begin(), values.end());
    d.values_ = std::move(values);
    return d;
  }

  /// Arbitrary coefficient sampled at quadrature nodes.  The bounds are taken
  /// as declared; they cannot be recovered from samples.
  static DampingField callable(ScalarFunction f, double a0, double a1) {
    require_finite(a0);
    require_finite(a1);
    if (a1 < a0) throw InvalidArgument("DampingField::callable: declared a1 < a0");
    DampingField d;
    d.kind_ = Kind::callable;
    d.function_ = std::move(f);
    d.a0_ = a0;
    d.a1_ = a1;
    return d;
  }

  Kind kind() const noexcept { return kind_; }
  double a0() const noexcept { return a0_; }
  double a1() const noexcept { return a1_; }
  const std::vector<double>& values() const noexcept { return values_; }

  double operator()(double x) const {
    switch (kind_) {
      case Kind::constant:
        return values_.front();
      case Kind::piecewise_constant: {
        const auto m = values_.size();
        auto i = static_cast<std::size_t>(std::floor(std::clamp(x, 0.0, 1.0) * static_cast<double>(m)));
        return values_[std::min(i, m - 1)];
      }
      case Kind::callable:
        return function_(x);
    }
    return 0.0;
  }

  /// Whether the field is a single constant value.
  bool is_constant() const noexcept { return kind_ == Kind::constant; }

 private:
  static void require_finite(double v) {
    if (!std::isfinite(v)) throw InvalidArgument("DampingField: non-finite damping value");
  }

  Kind kind_ = Kind::constant;
  std::vector<double> values_{0.0};
  ScalarFunction function_;
  double a0_ = 0.0;
  double a1_ = 0.0;
};

enum class SpaceKind { v, q };

/// The assembled pairings of the mixed weak form:
///   mass_v   (u, v)       on V_h x V_h
///   mass_q   (p, q)       on Q_h x Q_h, block diagonal per cell
///   damping  (a u, v)     on V_h x V_h
///   coupling (d/dx v, q)  dim Q x dim V
/// plus cached factorizations of the two mass matrices.
struct DiscreteOperators {
  Discretization disc;
  DampingField damping_field;
  SymmetricBandedMatrix mass_v;
  SymmetricBandedMatrix damping;
  BlockDiagonalMatrix mass_q;
  SparseMatrix coupling;
  BandedCholesky mass_v_factor;
  BlockDiagonalCholesky mass_q_factor;

  std::size_t dim_v() const noexcept { return disc.dim_v(); }
  std::size_t dim_q() const noexcept { return disc.dim_q(); }
};

inline DiscreteOperators assemble_operators(const Discretization& disc, const DampingField& a) {
  if (!disc.mesh || !disc.v_space || !disc.q_space) {
    throw InvalidArgument("assemble_operators: incomplete discretization");
  }
  if (&disc.v_space->mesh() != &disc.q_space->mesh() || disc.v_space->degree() != disc.q_space->degree() + 1) {
    throw InvalidArgument("assemble_operators: V_h and Q_h must share the mesh and satisfy deg V = deg Q + 1");
  }
  const auto& mesh = *disc.mesh;
  const auto& vs = *disc.v_space;
  const auto& qs = *disc.q_space;
  const auto& quad = disc.quad;
  const double h = mesh.h();
  const std::size_t nv = vs.n_local();
  const std::size_t nq = qs.n_local();
  const BasisTable vt = vs.tabulate(quad);
  const BasisTable qt = qs.tabulate(quad);

  DiscreteOperators ops;
  ops.disc = disc;
  ops.damping_field = a;
  ops.mass_v = SymmetricBandedMatrix(vs.dim(), nv - 1);
  ops.damping = SymmetricBandedMatrix(vs.dim(), nv - 1);
  ops.mass_q = BlockDiagonalMatrix(mesh.n_cells(), nq);
  std::vector<Triplet> b_entries;
  b_entries.reserve(mesh.n_cells() * nv * nq);

  std::vector<double> a_at(quad.size());
  for (std::size_t c = 0; c < mesh.n_cells(); ++c) {
    for (std::size_t q = 0; q < quad.size(); ++q) {
      a_at[q] = a(mesh.to_global(c, quad.nodes[q]));
      if (!std::isfinite(a_at[q])) {
        throw InvalidArgument("assemble_operators: non-finite damping sample in cell " + std::to_string(c));
      }
    }
    for (std::size_t i = 0; i < nv; ++i) {
      for (std::size_t j = 0; j <= i; ++j) {
        double m = 0.0;
        double d = 0.0;
        for (std::size_t q = 0; q < quad.size(); ++q) {
          const double phi = quad.weights[q] * vt.values[q][i] * vt.values[q][j];
          m += phi;
          d += a_at[q] * phi;
        }
        const std::size_t gi = vs.global_index(c, i);
        const std::size_t gj = vs.global_index(c, j);
        ops.mass_v.add_lower(std::max(gi, gj), std::min(gi, gj), h * m);
        ops.damping.add_lower(std::max(gi, gj), std::min(gi, gj), h * d);
      }
    }
    for (std::size_t i = 0; i < nq; ++i) {
      for (std::size_t j = 0; j < nq; ++j) {
        double m = 0.0;
        for (std::size_t q = 0; q < quad.size(); ++q) m += quad.weights[q] * qt.values[q][i] * qt.values[q][j];
        ops.mass_q.block_entry(c, i, j) = h * m;
      }
      // (d/dx phi_j, psi_i): the 1/h of the derivative cancels the cell Jacobian.
      for (std::size_t j = 0; j < nv; ++j) {
        double b = 0.0;
        for (std::size_t q = 0; q < quad.size(); ++q) b += quad.weights[q] * vt.derivatives[q][j] * qt.values[q][i];
        b_entries.push_back({qs.global_index(c, i), vs.global_index(c, j), b});
      }
    }
  }
  ops.coupling = SparseMatrix(qs.dim(), vs.dim(), std::move(b_entries));
  ops.mass_v_factor = BandedCholesky(ops.mass_v);
  ops.mass_q_factor = BlockDiagonalCholesky(ops.mass_q);
  return ops;
}

inline DiscreteOperators assemble_operators(std::size_t n_cells, int k, const DampingField& a) {
  return assemble_operators(make_discretization(n_cells, k), a);
}

/// Number of Gauss points used for right-hand-side pairings (f, phi).
inline int load_quadrature_points(int k) { return std::min(10, k + 4); }

/// Pairings (f, phi_i) with every basis function of the chosen space.
inline Vector assemble_load(const Discretization& disc, const ScalarFunction& f, SpaceKind space) {
  const FESpace& fs = space == SpaceKind::v ? *disc.v_space : *disc.q_space;
  const auto& mesh = *disc.mesh;
  const QuadRule quad = gauss_rule(load_quadrature_points(disc.k));
  const BasisTable table = fs.tabulate(quad);
  Vector load(fs.dim(), 0.0);
  for (std::size_t c = 0; c < mesh.n_cells(); ++c) {
    for (std::size_t q = 0; q < quad.size(); ++q) {
      const double fx = f(mesh.to_global(c, quad.nodes[q]));
      if (!std::isfinite(fx)) throw InvalidArgument("assemble_load: non-finite sample of f");
      const double w = quad.weights[q] * mesh.h() * fx;
      for (std::size_t j = 0; j < fs.n_local(); ++j) load[fs.global_index(c, j)] += w * table.values[q][j];
    }
  }
  return load;
}

/// L2 projection onto V_h: solves mass_v c = (f, phi).
inline FEFunction project_v(const DiscreteOperators& ops, const ScalarFunction& f) {
  Vector c = assemble_load(ops.disc, f, SpaceKind::v);
  ops.mass_v_factor.solve_in_place(c);
  return FEFunction(ops.disc.v_space, std::move(c));
}

/// L2 projection onto Q_h: solves mass_q c = (f, psi), cell by cell.
inline FEFunction project_q(const DiscreteOperators& ops, const ScalarFunction& f) {
  Vector c = assemble_load(ops.disc, f, SpaceKind::q);
  ops.mass_q_factor.solve_in_place(c);
  return FEFunction(ops.disc.q_space, std::move(c));
}

/// Lagrange interpolant: every dof takes the value of f at its node.
inline FEFunction interpolate(const std::shared_ptr<const FESpace>& space, const ScalarFunction& f) {
  const auto& fs = *space;
  Vector c(fs.dim(), 0.0);
  const auto& nodes = fs.basis().nodes();
  for (std::size_t cell = 0; cell < fs.mesh().n_cells(); ++cell) {
    for (std::size_t j = 0; j < fs.n_local(); ++j) c[fs.global_index(cell, j)] = f(fs.mesh().to_global(cell, nodes[j]));
  }
  return FEFunction(space, std::move(c));
}

/// Mass-weighted L2 norm of a coefficient vector in V_h or Q_h.
inline double l2_norm(const DiscreteOperators& ops, std::span<const double> c, SpaceKind space) {
  const double s = space == SpaceKind::v ? ops.mass_v.quadratic_form(c) : ops.mass_q.quadratic_form(c);
  return std::sqrt(std::max(s, 0.0));
}

}  // namespace dampedwave
