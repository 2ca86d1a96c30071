#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "dampedwave/assembly.hpp"
#include "dampedwave/linalg.hpp"

namespace dampedwave {

/// Coefficients of the 2x2 block operator
///   [ mass_v_scale*M_V + damping_scale*A    coupling_t_scale*B^T ]
///   [ coupling_scale*B                      mass_q_scale*M_Q     ]
struct BlockCoefficients {
  double mass_v_scale = 0.0;
  double damping_scale = 0.0;
  double coupling_t_scale = 0.0;
  double coupling_scale = 0.0;
  double mass_q_scale = 0.0;
};

/// Cell-wise interleaving of V and Q unknowns: for each cell its left vertex and
/// interior V dofs, then its Q dofs; the final vertex comes last.  With this
/// ordering the mixed block operator has half-bandwidth 2(k+1).
class MixedOrdering {
 public:
  explicit MixedOrdering(const Discretization& disc)
      : dim_v_(disc.dim_v()), dim_q_(disc.dim_q()), stride_(static_cast<std::size_t>(disc.k) + 1) {}

  std::size_t size() const noexcept { return dim_v_ + dim_q_; }
  std::size_t bandwidth() const noexcept { return 2 * stride_; }

  std::size_t v_position(std::size_t i) const noexcept {
    return (i / stride_) * 2 * stride_ + i % stride_;
  }
  std::size_t q_position(std::size_t i) const noexcept {
    return (i / stride_) * 2 * stride_ + stride_ + i % stride_;
  }

  /// Packs (u, p) into the interleaved vector.
  void pack(std::span<const double> u, std::span<const double> p, std::span<double> z) const {
    for (std::size_t i = 0; i < dim_v_; ++i) z[v_position(i)] = u[i];
    for (std::size_t i = 0; i < dim_q_; ++i) z[q_position(i)] = p[i];
  }

  void unpack(std::span<const double> z, std::span<double> u, std::span<double> p) const {
    for (std::size_t i = 0; i < dim_v_; ++i) u[i] = z[v_position(i)];
    for (std::size_t i = 0; i < dim_q_; ++i) p[i] = z[q_position(i)];
  }

 private:
  std::size_t dim_v_;
  std::size_t dim_q_;
  std::size_t stride_;
};

/// Assembles the block operator in the interleaved ordering as a banded matrix.
inline BandedMatrix assemble_mixed_banded(const DiscreteOperators& ops, const MixedOrdering& order,
                                          const BlockCoefficients& c) {
  const std::size_t bw = order.bandwidth();
  BandedMatrix m(order.size(), bw, bw);
  const std::size_t nv = ops.dim_v();
  const std::size_t vbw = ops.mass_v.bandwidth();
  for (std::size_t i = 0; i < nv; ++i) {
    const std::size_t lo = i >= vbw ? i - vbw : 0;
    const std::size_t hi = std::min(nv - 1, i + vbw);
    for (std::size_t j = lo; j <= hi; ++j) {
      const double v = c.mass_v_scale * ops.mass_v(i, j) + c.damping_scale * ops.damping(i, j);
      if (v != 0.0) m.add(order.v_position(i), order.v_position(j), v);
    }
  }
  const std::size_t bs = ops.mass_q.block_size();
  if (c.mass_q_scale != 0.0) {
    for (std::size_t b = 0; b < ops.mass_q.n_blocks(); ++b) {
      for (std::size_t i = 0; i < bs; ++i) {
        for (std::size_t j = 0; j < bs; ++j) {
          m.add(order.q_position(b * bs + i), order.q_position(b * bs + j),
                c.mass_q_scale * ops.mass_q.block_entry(b, i, j));
        }
      }
    }
  }
  for (const auto& t : ops.coupling.triplets()) {
    if (c.coupling_scale != 0.0) m.add(order.q_position(t.row), order.v_position(t.col), c.coupling_scale * t.value);
    if (c.coupling_t_scale != 0.0) m.add(order.v_position(t.col), order.q_position(t.row), c.coupling_t_scale * t.value);
  }
  return m;
}

/// (yu, yp) = block operator applied to (u, p), without forming it.
inline void apply_block(const DiscreteOperators& ops, const BlockCoefficients& c, std::span<const double> u,
                        std::span<const double> p, std::span<double> yu, std::span<double> yp) {
  const std::size_t nv = ops.dim_v();
  const std::size_t nq = ops.dim_q();
  std::vector<double> tv(nv);
  std::vector<double> tq(nq);
  ops.mass_v.multiply(u, yu);
  for (std::size_t i = 0; i < nv; ++i) yu[i] *= c.mass_v_scale;
  ops.damping.multiply(u, tv);
  axpy(c.damping_scale, tv, yu);
  ops.coupling.multiply_transposed(p, tv);
  axpy(c.coupling_t_scale, tv, yu);

  ops.mass_q.multiply(p, yp);
  for (std::size_t i = 0; i < nq; ++i) yp[i] *= c.mass_q_scale;
  ops.coupling.multiply(u, tq);
  axpy(c.coupling_scale, tq, yp);
}

}  // namespace dampedwave
