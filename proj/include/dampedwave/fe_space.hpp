#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "dampedwave/error.hpp"
#include "dampedwave/mesh.hpp"
#include "dampedwave/quadrature.hpp"

namespace dampedwave {

using Vector = std::vector<double>;
using ScalarFunction = std::function<double(double)>;

/// Lagrange basis on equispaced nodes of the reference cell [0,1].
/// Degree 0 uses the single midpoint node.
class LagrangeBasis {
 public:
  explicit LagrangeBasis(int degree) : degree_(degree) {
    if (degree < 0) throw InvalidArgument("LagrangeBasis: negative degree");
    if (degree == 0) {
      nodes_ = {0.5};
    } else {
      for (int j = 0; j <= degree; ++j) nodes_.push_back(static_cast<double>(j) / degree);
    }
  }

  int degree() const noexcept { return degree_; }
  std::size_t size() const noexcept { return nodes_.size(); }
  const std::vector<double>& nodes() const noexcept { return nodes_; }

  double value(std::size_t j, double xi) const {
    double v = 1.0;
    for (std::size_t m = 0; m < nodes_.size(); ++m) {
      if (m != j) v *= (xi - nodes_[m]) / (nodes_[j] - nodes_[m]);
    }
    return v;
  }

  /// Derivative with respect to the reference coordinate.
  double derivative(std::size_t j, double xi) const {
    double d = 0.0;
    for (std::size_t l = 0; l < nodes_.size(); ++l) {
      if (l == j) continue;
      double term = 1.0 / (nodes_[j] - nodes_[l]);
      for (std::size_t m = 0; m < nodes_.size(); ++m) {
        if (m != j && m != l) term *= (xi - nodes_[m]) / (nodes_[j] - nodes_[m]);
      }
      d += term;
    }
    return d;
  }

 private:
  int degree_;
  std::vector<double> nodes_;
};

/// Basis values and reference derivatives tabulated at quadrature nodes: [q][j].
struct BasisTable {
  std::vector<std::vector<double>> values;
  std::vector<std::vector<double>> derivatives;
};

enum class Continuity { continuous, discontinuous };

/// Piecewise polynomial space on a uniform mesh.  The continuous variant is
/// P_d(T_h) ∩ H^1 with shared vertex dofs, the discontinuous one is P_d(T_h).
class FESpace {
 public:
  FESpace(std::shared_ptr<const Mesh1D> mesh, int degree, Continuity continuity)
      : mesh_(std::move(mesh)), basis_(degree), continuity_(continuity) {
    if (!mesh_) throw InvalidArgument("FESpace: null mesh");
    if (continuity == Continuity::continuous && degree < 1) {
      throw InvalidArgument("FESpace: continuous spaces need degree >= 1");
    }
    const std::size_t n = mesh_->n_cells();
    const auto d = static_cast<std::size_t>(degree);
    dim_ = continuity == Continuity::continuous ? n * d + 1 : n * (d + 1);
  }

  const Mesh1D& mesh() const noexcept { return *mesh_; }
  const std::shared_ptr<const Mesh1D>& mesh_ptr() const noexcept { return mesh_; }
  const LagrangeBasis& basis() const noexcept { return basis_; }
  int degree() const noexcept { return basis_.degree(); }
  Continuity continuity() const noexcept { return continuity_; }
  std::size_t dim() const noexcept { return dim_; }
  std::size_t n_local() const noexcept { return basis_.size(); }

  std::size_t global_index(std::size_t cell, std::size_t local) const noexcept {
    return continuity_ == Continuity::continuous
               ? cell * static_cast<std::size_t>(basis_.degree()) + local
               : cell * basis_.size() + local;
  }

  BasisTable tabulate(const QuadRule& rule) const {
    BasisTable t;
    t.values.assign(rule.size(), std::vector<double>(n_local()));
    t.derivatives.assign(rule.size(), std::vector<double>(n_local()));
    for (std::size_t q = 0; q < rule.size(); ++q) {
      for (std::size_t j = 0; j < n_local(); ++j) {
        t.values[q][j] = basis_.value(j, rule.nodes[q]);
        t.derivatives[q][j] = basis_.derivative(j, rule.nodes[q]);
      }
    }
    return t;
  }

 private:
  std::shared_ptr<const Mesh1D> mesh_;
  LagrangeBasis basis_;
  Continuity continuity_;
  std::size_t dim_ = 0;
};

/// Coefficient vector tied to the space it lives in.
class FEFunction {
 public:
  explicit FEFunction(std::shared_ptr<const FESpace> space)
      : space_(std::move(space)), coeffs_(space_->dim(), 0.0) {}

  FEFunction(std::shared_ptr<const FESpace> space, Vector coeffs)
      : space_(std::move(space)), coeffs_(std::move(coeffs)) {
    if (coeffs_.size() != space_->dim()) {
      throw InvalidArgument("FEFunction: coefficient length " + std::to_string(coeffs_.size()) +
                            " does not match space dimension " + std::to_string(space_->dim()));
    }
  }

  const FESpace& space() const noexcept { return *space_; }
  const std::shared_ptr<const FESpace>& space_ptr() const noexcept { return space_; }
  const Vector& coefficients() const noexcept { return coeffs_; }
  Vector& coefficients() noexcept { return coeffs_; }

  double value_in_cell(std::size_t cell, double xi) const {
    double v = 0.0;
    for (std::size_t j = 0; j < space_->n_local(); ++j) {
      v += coeffs_[space_->global_index(cell, j)] * space_->basis().value(j, xi);
    }
    return v;
  }

  double derivative_in_cell(std::size_t cell, double xi) const {
    double d = 0.0;
    for (std::size_t j = 0; j < space_->n_local(); ++j) {
      d += coeffs_[space_->global_index(cell, j)] * space_->basis().derivative(j, xi);
    }
    return d / space_->mesh().h();
  }

  double operator()(double x) const {
    const auto [cell, xi] = space_->mesh().locate(x);
    return value_in_cell(cell, xi);
  }

 private:
  std::shared_ptr<const FESpace> space_;
  Vector coeffs_;
};

/// Pointwise values of `f`; throws for points outside [0,1].
inline Vector evaluate(const FEFunction& f, std::span<const double> points) {
  Vector out;
  out.reserve(points.size());
  for (double x : points) out.push_back(f(x));
  return out;
}

/// Pointwise derivative of `f`.  At interior vertices the right cell is used.
inline Vector evaluate_derivative(const FEFunction& f, std::span<const double> points) {
  Vector out;
  out.reserve(points.size());
  for (double x : points) {
    const auto [cell, xi] = f.space().mesh().locate(x);
    out.push_back(f.derivative_in_cell(cell, xi));
  }
  return out;
}

/// Mesh, the compatible pair V_h = P_{k+1} ∩ H^1, Q_h = P_k, and the
/// assembly quadrature (k+2 Gauss points per cell).
struct Discretization {
  std::shared_ptr<const Mesh1D> mesh;
  std::shared_ptr<const FESpace> v_space;
  std::shared_ptr<const FESpace> q_space;
  QuadRule quad;
  int k = 0;

  std::size_t dim_v() const noexcept { return v_space->dim(); }
  std::size_t dim_q() const noexcept { return q_space->dim(); }
  double h() const noexcept { return mesh->h(); }
};

inline Discretization make_discretization(std::size_t n_cells, int k) {
  if (k < 0 || k > 8) throw InvalidArgument("make_discretization: degree k must lie in [0,8]");
  auto mesh = std::make_shared<const Mesh1D>(n_cells);
  Discretization d;
  d.mesh = mesh;
  d.v_space = std::make_shared<const FESpace>(mesh, k + 1, Continuity::continuous);
  d.q_space = std::make_shared<const FESpace>(mesh, k, Continuity::discontinuous);
  d.quad = gauss_rule(k + 2);
  d.k = k;
  return d;
}

}  // namespace dampedwave
