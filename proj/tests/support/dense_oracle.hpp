#pragma once

// Brute-force dense reference implementations built on Eigen.  Nothing here
// reuses the library's quadrature, basis or solvers.

#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "dampedwave/assembly.hpp"
#include "dampedwave/linalg.hpp"

namespace oracle {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Gauss-Legendre on [0,1] by Golub-Welsch.
inline std::pair<VectorXd, VectorXd> golub_welsch(int n) {
  MatrixXd j = MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) {
    const double b = i / std::sqrt(4.0 * i * i - 1.0);
    j(i, i - 1) = j(i - 1, i) = b;
  }
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(j);
  VectorXd x = (es.eigenvalues().array() + 1.0) / 2.0;
  VectorXd w = es.eigenvectors().row(0).array().square();
  return {x, w};
}

/// Monomial coefficients of the Lagrange basis on equispaced nodes (midpoint for degree 0).
inline MatrixXd lagrange_monomials(int degree) {
  const int m = degree + 1;
  MatrixXd v(m, m);
  for (int i = 0; i < m; ++i) {
    const double node = degree == 0 ? 0.5 : static_cast<double>(i) / degree;
    for (int j = 0; j < m; ++j) v(i, j) = std::pow(node, j);
  }
  return v.inverse();  // column i holds the coefficients of basis i
}

inline double poly(const MatrixXd& c, int i, double x) {
  double s = 0.0;
  for (int j = c.rows() - 1; j >= 0; --j) s = s * x + c(j, i);
  return s;
}

inline double dpoly(const MatrixXd& c, int i, double x) {
  double s = 0.0;
  for (int j = c.rows() - 1; j >= 1; --j) s = s * x + j * c(j, i);
  return s;
}

struct DenseOperators {
  MatrixXd mv, mq, a, b;
};

inline DenseOperators assemble(std::size_t n_cells, int k, const std::function<double(double)>& a) {
  const int nv = k + 2;
  const int nq = k + 1;
  const std::size_t dim_v = n_cells * (k + 1) + 1;
  const std::size_t dim_q = n_cells * (k + 1);
  const MatrixXd cv = lagrange_monomials(k + 1);
  const MatrixXd cq = lagrange_monomials(k);
  const auto [x, w] = golub_welsch(12);
  const double h = 1.0 / static_cast<double>(n_cells);
  DenseOperators d{MatrixXd::Zero(dim_v, dim_v), MatrixXd::Zero(dim_q, dim_q), MatrixXd::Zero(dim_v, dim_v),
                   MatrixXd::Zero(dim_q, dim_v)};
  for (std::size_t c = 0; c < n_cells; ++c) {
    for (int q = 0; q < x.size(); ++q) {
      const double xi = x(q);
      const double wq = w(q) * h;
      const double ax = a((static_cast<double>(c) + xi) * h);
      for (int i = 0; i < nv; ++i) {
        const std::size_t gi = c * (k + 1) + i;
        for (int j = 0; j < nv; ++j) {
          const std::size_t gj = c * (k + 1) + j;
          d.mv(gi, gj) += wq * poly(cv, i, xi) * poly(cv, j, xi);
          d.a(gi, gj) += wq * ax * poly(cv, i, xi) * poly(cv, j, xi);
        }
      }
      for (int i = 0; i < nq; ++i) {
        const std::size_t gi = c * nq + i;
        for (int j = 0; j < nq; ++j) d.mq(gi, c * nq + j) += wq * poly(cq, i, xi) * poly(cq, j, xi);
        for (int j = 0; j < nv; ++j) d.b(gi, c * (k + 1) + j) += wq * (dpoly(cv, j, xi) / h) * poly(cq, i, xi);
      }
    }
  }
  return d;
}

/// Left and right matrices of the theta-scheme in [u; p] block order.
inline std::pair<MatrixXd, MatrixXd> step_matrices(const DenseOperators& d, double theta, double tau) {
  const auto nv = d.mv.rows();
  const auto nq = d.mq.rows();
  MatrixXd l(nv + nq, nv + nq);
  MatrixXd r(nv + nq, nv + nq);
  l << d.mv / tau + theta * d.a, -theta * d.b.transpose(), theta * d.b, d.mq / tau;
  r << d.mv / tau - (1 - theta) * d.a, (1 - theta) * d.b.transpose(), -(1 - theta) * d.b, d.mq / tau;
  return {l, r};
}

inline MatrixXd propagator(const DenseOperators& d, double theta, double tau, std::size_t n_steps) {
  const auto [l, r] = step_matrices(d, theta, tau);
  const MatrixXd t = l.fullPivLu().solve(r);
  MatrixXd s = MatrixXd::Identity(t.rows(), t.cols());
  for (std::size_t i = 0; i < n_steps; ++i) s = t * s;
  return s;
}

inline MatrixXd gram(const DenseOperators& d) {
  const auto nv = d.mv.rows();
  const auto nq = d.mq.rows();
  MatrixXd g = MatrixXd::Zero(nv + nq, nv + nq);
  g.topLeftCorner(nv, nv) = d.mv;
  g.bottomRightCorner(nq, nq) = d.mq;
  return g;
}

/// Largest singular value of S in the norm induced by G: ||L^T S L^{-T}||_2 with G = L L^T.
inline double gram_norm(const MatrixXd& s, const MatrixXd& g) {
  const MatrixXd lt = g.llt().matrixU();
  const MatrixXd m = lt * s * lt.inverse();
  Eigen::JacobiSVD<MatrixXd> svd(m);
  return svd.singularValues()(0);
}

inline VectorXd to_eigen(const std::vector<double>& v) { return Eigen::Map<const VectorXd>(v.data(), v.size()); }

inline VectorXd stack(const std::vector<double>& u, const std::vector<double>& p) {
  VectorXd z(u.size() + p.size());
  z << to_eigen(u), to_eigen(p);
  return z;
}

inline MatrixXd dense(const dampedwave::SymmetricBandedMatrix& m) {
  MatrixXd d(m.size(), m.size());
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < m.size(); ++j) d(i, j) = m(i, j);
  return d;
}

inline MatrixXd dense(const dampedwave::BlockDiagonalMatrix& m) {
  MatrixXd d(m.size(), m.size());
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < m.size(); ++j) d(i, j) = m(i, j);
  return d;
}

inline MatrixXd dense(const dampedwave::SparseMatrix& m) {
  MatrixXd d(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) d(i, j) = m(i, j);
  return d;
}

inline MatrixXd dense(const dampedwave::BandedMatrix& m) {
  MatrixXd d(m.size(), m.size());
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < m.size(); ++j) d(i, j) = m(i, j);
  return d;
}

/// Library operators as dense matrices.
inline DenseOperators dense(const dampedwave::DiscreteOperators& ops) {
  return {dense(ops.mass_v), dense(ops.mass_q), dense(ops.damping), dense(ops.coupling)};
}

}  // namespace oracle
