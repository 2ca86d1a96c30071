#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "dampedwave/error.hpp"

namespace dampedwave {

/// Uniform partition of [0,1] into `n_cells` intervals of width h.
class Mesh1D {
 public:
  explicit Mesh1D(std::size_t n_cells) : n_cells_(n_cells) {
    if (n_cells == 0) throw InvalidArgument("Mesh1D: n_cells must be at least 1");
    h_ = 1.0 / static_cast<double>(n_cells);
    vertices_.resize(n_cells + 1);
    for (std::size_t i = 0; i <= n_cells; ++i) {
      vertices_[i] = static_cast<double>(i) / static_cast<double>(n_cells);
    }
  }

  std::size_t n_cells() const noexcept { return n_cells_; }
  double h() const noexcept { return h_; }
  const std::vector<double>& vertices() const noexcept { return vertices_; }

  double cell_left(std::size_t cell) const { return vertices_[cell]; }

  double to_global(std::size_t cell, double xi) const { return vertices_[cell] + h_ * xi; }

  /// Cell index and reference coordinate of a point in [0,1].
  /// Interior vertices are assigned to the cell on their right; x = 1 to the last cell.
  std::pair<std::size_t, double> locate(double x) const {
    if (!(x >= 0.0 && x <= 1.0)) {
      throw InvalidArgument("Mesh1D::locate: point " + std::to_string(x) + " outside [0,1]");
    }
    auto cell = static_cast<std::size_t>(std::floor(x * static_cast<double>(n_cells_)));
    cell = std::min(cell, n_cells_ - 1);
    const double xi = (x - vertices_[cell]) / h_;
    return {cell, std::clamp(xi, 0.0, 1.0)};
  }

 private:
  std::size_t n_cells_;
  double h_;
  std::vector<double> vertices_;
};

inline Mesh1D build_mesh(std::size_t n_cells) { return Mesh1D(n_cells); }

}  // namespace dampedwave
