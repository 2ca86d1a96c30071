#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dampedwave/error.hpp"

namespace dampedwave {

inline double dot(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

inline double norm2(std::span<const double> x) { return std::sqrt(dot(x, x)); }

/// y += alpha * x
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline bool all_finite(std::span<const double> x) {
  return std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); });
}

/// Symmetric banded matrix; only the lower band (half-bandwidth `bandwidth`) is stored.
class SymmetricBandedMatrix {
 public:
  SymmetricBandedMatrix() = default;
  SymmetricBandedMatrix(std::size_t n, std::size_t bandwidth)
      : n_(n), bw_(bandwidth), data_(n * (bandwidth + 1), 0.0) {}

  std::size_t size() const noexcept { return n_; }
  std::size_t bandwidth() const noexcept { return bw_; }

  /// Accumulates into the stored entry (i,j); requires j <= i <= j + bandwidth.
  void add_lower(std::size_t i, std::size_t j, double v) {
    if (j > i || i - j > bw_) {
      throw InvalidArgument("SymmetricBandedMatrix::add_lower: entry (" + std::to_string(i) + "," +
                            std::to_string(j) + ") outside the lower band");
    }
    data_[index(i, j)] += v;
  }

  double operator()(std::size_t i, std::size_t j) const {
    if (j > i) std::swap(i, j);
    if (i - j > bw_) return 0.0;
    return data_[index(i, j)];
  }

  void multiply(std::span<const double> x, std::span<double> y) const {
    for (std::size_t i = 0; i < n_; ++i) {
      double s = data_[index(i, i)] * x[i];
      const std::size_t lo = i >= bw_ ? i - bw_ : 0;
      for (std::size_t j = lo; j < i; ++j) s += data_[index(i, j)] * x[j];
      const std::size_t hi = std::min(n_ - 1, i + bw_);
      for (std::size_t j = i + 1; j <= hi; ++j) s += data_[index(j, i)] * x[j];
      y[i] = s;
    }
  }

  std::vector<double> multiply(std::span<const double> x) const {
    std::vector<double> y(n_);
    multiply(x, y);
    return y;
  }

  /// x^T M x
  double quadratic_form(std::span<const double> x) const {
    double s = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      s += data_[index(i, i)] * x[i] * x[i];
      const std::size_t lo = i >= bw_ ? i - bw_ : 0;
      for (std::size_t j = lo; j < i; ++j) s += 2.0 * data_[index(i, j)] * x[i] * x[j];
    }
    return s;
  }

  /// this = alpha * this + beta * other; bandwidths must agree.
  void combine(double alpha, const SymmetricBandedMatrix& other, double beta) {
    if (other.n_ != n_ || other.bw_ != bw_) {
      throw InvalidArgument("SymmetricBandedMatrix::combine: shape mismatch");
    }
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] = alpha * data_[i] + beta * other.data_[i];
  }

 private:
  std::size_t index(std::size_t i, std::size_t j) const noexcept { return i * (bw_ + 1) + (j + bw_ - i); }

  std::size_t n_ = 0;
  std::size_t bw_ = 0;
  std::vector<double> data_;
};

/// Cholesky factorization L L^T of a symmetric positive definite banded matrix.
class BandedCholesky {
 public:
  BandedCholesky() = default;

  explicit BandedCholesky(const SymmetricBandedMatrix& m) : n_(m.size()), bw_(m.bandwidth()) {
    l_.assign(n_ * (bw_ + 1), 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
      const std::size_t lo = i >= bw_ ? i - bw_ : 0;
      for (std::size_t j = lo; j <= i; ++j) {
        double s = m(i, j);
        const std::size_t klo = std::max(lo, j >= bw_ ? j - bw_ : 0);
        for (std::size_t k = klo; k < j; ++k) s -= at(i, k) * at(j, k);
        if (i == j) {
          if (!(s > 0.0) || !std::isfinite(s)) {
            throw SingularMatrix("BandedCholesky: matrix not positive definite at row " +
                                 std::to_string(i));
          }
          at(i, i) = std::sqrt(s);
        } else {
          at(i, j) = s / at(j, j);
        }
      }
    }
  }

  std::size_t size() const noexcept { return n_; }

  void solve_in_place(std::span<double> b) const {
    for (std::size_t i = 0; i < n_; ++i) {
      double s = b[i];
      const std::size_t lo = i >= bw_ ? i - bw_ : 0;
      for (std::size_t k = lo; k < i; ++k) s -= at(i, k) * b[k];
      b[i] = s / at(i, i);
    }
    for (std::size_t ii = n_; ii-- > 0;) {
      double s = b[ii];
      const std::size_t hi = std::min(n_ - 1, ii + bw_);
      for (std::size_t k = ii + 1; k <= hi; ++k) s -= at(k, ii) * b[k];
      b[ii] = s / at(ii, ii);
    }
  }

  std::vector<double> solve(std::span<const double> b) const {
    std::vector<double> x(b.begin(), b.end());
    solve_in_place(x);
    return x;
  }

 private:
  double& at(std::size_t i, std::size_t j) { return l_[i * (bw_ + 1) + (j + bw_ - i)]; }
  double at(std::size_t i, std::size_t j) const { return l_[i * (bw_ + 1) + (j + bw_ - i)]; }

  std::size_t n_ = 0;
  std::size_t bw_ = 0;
  std::vector<double> l_;
};

/// General banded matrix with `lower` sub- and `upper` super-diagonals.
class BandedMatrix {
 public:
  BandedMatrix() = default;
  BandedMatrix(std::size_t n, std::size_t lower, std::size_t upper)
      : n_(n), kl_(lower), ku_(upper), data_(n * (lower + upper + 1), 0.0) {}

  std::size_t size() const noexcept { return n_; }
  std::size_t lower() const noexcept { return kl_; }
  std::size_t upper() const noexcept { return ku_; }

  bool in_band(std::size_t i, std::size_t j) const noexcept {
    return (j <= i && i - j <= kl_) || (j > i && j - i <= ku_);
  }

  void add(std::size_t i, std::size_t j, double v) {
    if (!in_band(i, j)) {
      throw InvalidArgument("BandedMatrix::add: entry (" + std::to_string(i) + "," +
                            std::to_string(j) + ") outside the band");
    }
    data_[index(i, j)] += v;
  }

  double operator()(std::size_t i, std::size_t j) const {
    return in_band(i, j) ? data_[index(i, j)] : 0.0;
  }

  void multiply(std::span<const double> x, std::span<double> y) const {
    for (std::size_t i = 0; i < n_; ++i) {
      const std::size_t lo = i >= kl_ ? i - kl_ : 0;
      const std::size_t hi = std::min(n_ - 1, i + ku_);
      double s = 0.0;
      for (std::size_t j = lo; j <= hi; ++j) s += data_[index(i, j)] * x[j];
      y[i] = s;
    }
  }

 private:
  std::size_t index(std::size_t i, std::size_t j) const noexcept {
    return i * (kl_ + ku_ + 1) + (j + kl_ - i);
  }

  std::size_t n_ = 0;
  std::size_t kl_ = 0;
  std::size_t ku_ = 0;
  std::vector<double> data_;
};

/// LU factorization with partial pivoting of a banded matrix.  Row interchanges
/// widen the upper band of U to lower+upper.  Supports solves with A and A^T.
class BandedLU {
 public:
  BandedLU() = default;

  explicit BandedLU(const BandedMatrix& a)
      : n_(a.size()), kl_(a.lower()), ku_(a.upper()), width_(2 * a.lower() + a.upper() + 1) {
    lu_.assign(n_ * width_, 0.0);
    pivots_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      const std::size_t lo = i >= kl_ ? i - kl_ : 0;
      const std::size_t hi = std::min(n_ - 1, i + ku_);
      for (std::size_t j = lo; j <= hi; ++j) at(i, j) = a(i, j);
    }
    double scale = 0.0;
    for (double v : lu_) scale = std::max(scale, std::abs(v));

    for (std::size_t i = 0; i < n_; ++i) {
      const std::size_t rlast = std::min(n_ - 1, i + kl_);
      const std::size_t clast = std::min(n_ - 1, i + kl_ + ku_);
      std::size_t p = i;
      double best = std::abs(at(i, i));
      for (std::size_t r = i + 1; r <= rlast; ++r) {
        if (std::abs(at(r, i)) > best) {
          best = std::abs(at(r, i));
          p = r;
        }
      }
      if (!(best > 1e-300 * std::max(scale, 1.0)) || !std::isfinite(best)) {
        throw SingularMatrix("BandedLU: zero pivot in column " + std::to_string(i));
      }
      pivots_[i] = p;
      if (p != i) {
        for (std::size_t c = i; c <= clast; ++c) std::swap(at(i, c), at(p, c));
      }
      const double diag = at(i, i);
      for (std::size_t r = i + 1; r <= rlast; ++r) {
        const double l = at(r, i) / diag;
        at(r, i) = l;
        if (l == 0.0) continue;
        for (std::size_t c = i + 1; c <= clast; ++c) at(r, c) -= l * at(i, c);
      }
    }
  }

  std::size_t size() const noexcept { return n_; }

  void solve_in_place(std::span<double> b) const {
    for (std::size_t i = 0; i < n_; ++i) {
      if (pivots_[i] != i) std::swap(b[i], b[pivots_[i]]);
      const std::size_t rlast = std::min(n_ - 1, i + kl_);
      for (std::size_t r = i + 1; r <= rlast; ++r) b[r] -= at(r, i) * b[i];
    }
    for (std::size_t ii = n_; ii-- > 0;) {
      const std::size_t clast = std::min(n_ - 1, ii + kl_ + ku_);
      double s = b[ii];
      for (std::size_t c = ii + 1; c <= clast; ++c) s -= at(ii, c) * b[c];
      b[ii] = s / at(ii, ii);
    }
  }

  /// Solves A^T x = b.
  void solve_transposed_in_place(std::span<double> b) const {
    const std::size_t ubw = kl_ + ku_;
    for (std::size_t i = 0; i < n_; ++i) {
      double s = b[i];
      const std::size_t lo = i >= ubw ? i - ubw : 0;
      for (std::size_t j = lo; j < i; ++j) s -= at(j, i) * b[j];
      b[i] = s / at(i, i);
    }
    for (std::size_t ii = n_; ii-- > 0;) {
      const std::size_t rlast = std::min(n_ - 1, ii + kl_);
      double s = b[ii];
      for (std::size_t r = ii + 1; r <= rlast; ++r) s -= at(r, ii) * b[r];
      b[ii] = s;
      if (pivots_[ii] != ii) std::swap(b[ii], b[pivots_[ii]]);
    }
  }

  std::vector<double> solve(std::span<const double> b) const {
    std::vector<double> x(b.begin(), b.end());
    solve_in_place(x);
    return x;
  }

  std::vector<double> solve_transposed(std::span<const double> b) const {
    std::vector<double> x(b.begin(), b.end());
    solve_transposed_in_place(x);
    return x;
  }

 private:
  double& at(std::size_t i, std::size_t j) { return lu_[i * width_ + (j + kl_ - i)]; }
  double at(std::size_t i, std::size_t j) const { return lu_[i * width_ + (j + kl_ - i)]; }

  std::size_t n_ = 0;
  std::size_t kl_ = 0;
  std::size_t ku_ = 0;
  std::size_t width_ = 0;
  std::vector<double> lu_;
  std::vector<std::size_t> pivots_;
};

/// Block-diagonal matrix with equal dense square blocks (row-major per block).
class BlockDiagonalMatrix {
 public:
  BlockDiagonalMatrix() = default;
  BlockDiagonalMatrix(std::size_t n_blocks, std::size_t block_size)
      : n_blocks_(n_blocks), bs_(block_size), data_(n_blocks * block_size * block_size, 0.0) {}

  std::size_t size() const noexcept { return n_blocks_ * bs_; }
  std::size_t n_blocks() const noexcept { return n_blocks_; }
  std::size_t block_size() const noexcept { return bs_; }

  double& block_entry(std::size_t b, std::size_t i, std::size_t j) {
    return data_[(b * bs_ + i) * bs_ + j];
  }
  double block_entry(std::size_t b, std::size_t i, std::size_t j) const {
    return data_[(b * bs_ + i) * bs_ + j];
  }

  double operator()(std::size_t i, std::size_t j) const {
    if (i / bs_ != j / bs_) return 0.0;
    return block_entry(i / bs_, i % bs_, j % bs_);
  }

  void multiply(std::span<const double> x, std::span<double> y) const {
    for (std::size_t b = 0; b < n_blocks_; ++b) {
      for (std::size_t i = 0; i < bs_; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < bs_; ++j) s += block_entry(b, i, j) * x[b * bs_ + j];
        y[b * bs_ + i] = s;
      }
    }
  }

  std::vector<double> multiply(std::span<const double> x) const {
    std::vector<double> y(size());
    multiply(x, y);
    return y;
  }

  double quadratic_form(std::span<const double> x) const {
    double s = 0.0;
    for (std::size_t b = 0; b < n_blocks_; ++b) {
      for (std::size_t i = 0; i < bs_; ++i) {
        for (std::size_t j = 0; j < bs_; ++j) {
          s += x[b * bs_ + i] * block_entry(b, i, j) * x[b * bs_ + j];
        }
      }
    }
    return s;
  }

 private:
  std::size_t n_blocks_ = 0;
  std::size_t bs_ = 0;
  std::vector<double> data_;
};

/// Per-block dense Cholesky of an SPD block-diagonal matrix.
class BlockDiagonalCholesky {
 public:
  BlockDiagonalCholesky() = default;

  explicit BlockDiagonalCholesky(const BlockDiagonalMatrix& m) : factor_(m) {
    const std::size_t bs = m.block_size();
    for (std::size_t b = 0; b < m.n_blocks(); ++b) {
      for (std::size_t i = 0; i < bs; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
          double s = factor_.block_entry(b, i, j);
          for (std::size_t k = 0; k < j; ++k) s -= factor_.block_entry(b, i, k) * factor_.block_entry(b, j, k);
          if (i == j) {
            if (!(s > 0.0)) {
              throw SingularMatrix("BlockDiagonalCholesky: block " + std::to_string(b) +
                                   " not positive definite");
            }
            factor_.block_entry(b, i, i) = std::sqrt(s);
          } else {
            factor_.block_entry(b, i, j) = s / factor_.block_entry(b, j, j);
          }
        }
        for (std::size_t j = i + 1; j < bs; ++j) factor_.block_entry(b, i, j) = 0.0;
      }
    }
  }

  void solve_in_place(std::span<double> x) const {
    const std::size_t bs = factor_.block_size();
    for (std::size_t b = 0; b < factor_.n_blocks(); ++b) {
      double* xb = x.data() + b * bs;
      for (std::size_t i = 0; i < bs; ++i) {
        double s = xb[i];
        for (std::size_t k = 0; k < i; ++k) s -= factor_.block_entry(b, i, k) * xb[k];
        xb[i] = s / factor_.block_entry(b, i, i);
      }
      for (std::size_t ii = bs; ii-- > 0;) {
        double s = xb[ii];
        for (std::size_t k = ii + 1; k < bs; ++k) s -= factor_.block_entry(b, k, ii) * xb[k];
        xb[ii] = s / factor_.block_entry(b, ii, ii);
      }
    }
  }

  std::vector<double> solve(std::span<const double> b) const {
    std::vector<double> x(b.begin(), b.end());
    solve_in_place(x);
    return x;
  }

 private:
  BlockDiagonalMatrix factor_;
};

struct Triplet {
  std::size_t row;
  std::size_t col;
  double value;
};

/// Compressed-row sparse matrix built from (possibly repeated) triplets.
class SparseMatrix {
 public:
  SparseMatrix() = default;

  SparseMatrix(std::size_t rows, std::size_t cols, std::vector<Triplet> triplets)
      : rows_(rows), cols_(cols), row_start_(rows + 1, 0) {
    std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
      return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    std::size_t last_row = 0;
    for (const auto& t : triplets) {
      if (t.row >= rows || t.col >= cols) throw InvalidArgument("SparseMatrix: triplet out of range");
      if (!col_.empty() && last_row == t.row && col_.back() == t.col) {
        val_.back() += t.value;
        continue;
      }
      col_.push_back(t.col);
      val_.push_back(t.value);
      last_row = t.row;
      ++row_start_[t.row + 1];
    }
    for (std::size_t r = 0; r < rows; ++r) row_start_[r + 1] += row_start_[r];
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t nonzeros() const noexcept { return val_.size(); }

  double operator()(std::size_t i, std::size_t j) const {
    for (std::size_t e = row_start_[i]; e < row_start_[i + 1]; ++e) {
      if (col_[e] == j) return val_[e];
    }
    return 0.0;
  }

  std::vector<Triplet> triplets() const {
    std::vector<Triplet> out;
    out.reserve(val_.size());
    for (std::size_t r = 0; r < rows_; ++r) {
      for (std::size_t e = row_start_[r]; e < row_start_[r + 1]; ++e) out.push_back({r, col_[e], val_[e]});
    }
    return out;
  }

  /// y = A x
  void multiply(std::span<const double> x, std::span<double> y) const {
    for (std::size_t r = 0; r < rows_; ++r) {
      double s = 0.0;
      for (std::size_t e = row_start_[r]; e < row_start_[r + 1]; ++e) s += val_[e] * x[col_[e]];
      y[r] = s;
    }
  }

  std::vector<double> multiply(std::span<const double> x) const {
    std::vector<double> y(rows_);
    multiply(x, y);
    return y;
  }

  /// y = A^T x
  void multiply_transposed(std::span<const double> x, std::span<double> y) const {
    std::fill(y.begin(), y.end(), 0.0);
    for (std::size_t r = 0; r < rows_; ++r) {
      for (std::size_t e = row_start_[r]; e < row_start_[r + 1]; ++e) y[col_[e]] += val_[e] * x[r];
    }
  }

  std::vector<double> multiply_transposed(std::span<const double> x) const {
    std::vector<double> y(cols_);
    multiply_transposed(x, y);
    return y;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> row_start_;
  std::vector<std::size_t> col_;
  std::vector<double> val_;
};

}  // namespace dampedwave
