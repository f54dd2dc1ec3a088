#pragma once

// Dense (row-major) and compressed-sparse-column storage plus the handful of
// kernels the coding pipeline needs: transposed products, linear
// combinations of equally shaped blocks, column slicing and concatenation.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cdmm/error.hpp"

namespace cdmm {

using Vector = std::vector<double>;

class DenseMatrix {
 public:
  DenseMatrix() = default;

  DenseMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), entries_(rows * cols, 0.0) {
    check_shape();
  }

  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
      : rows_(rows), cols_(cols), entries_(std::move(entries)) {
    check_shape();
    if (entries_.size() != rows_ * cols_) {
      throw DimensionError("dense matrix: entry count " +
                           std::to_string(entries_.size()) + " != " +
                           std::to_string(rows_) + "x" + std::to_string(cols_));
    }
  }

  static DenseMatrix identity(std::size_t n) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return entries_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return entries_[r * cols_ + c]; }

  std::span<const double> row(std::size_t r) const {
    return {entries_.data() + r * cols_, cols_};
  }
  std::span<double> row(std::size_t r) { return {entries_.data() + r * cols_, cols_}; }

  const std::vector<double>& entries() const { return entries_; }

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  void check_shape() const {
    if (rows_ == 0 || cols_ == 0) throw DimensionError("dense matrix: empty shape");
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> entries_;
};

// Compressed sparse column storage. Row indices are strictly increasing inside
// each column.
class SparseMatrix {
 public:
  SparseMatrix() = default;

  SparseMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), col_ptr_(cols + 1, 0) {
    if (rows_ == 0 || cols_ == 0) throw DimensionError("sparse matrix: empty shape");
  }

  SparseMatrix(std::size_t rows, std::size_t cols, std::vector<std::size_t> col_ptr,
               std::vector<std::size_t> row_idx, std::vector<double> values)
      : rows_(rows),
        cols_(cols),
        col_ptr_(std::move(col_ptr)),
        row_idx_(std::move(row_idx)),
        values_(std::move(values)) {
    validate();
  }

  static SparseMatrix from_dense(const DenseMatrix& d) {
    SparseMatrix s(d.rows(), d.cols());
    for (std::size_t c = 0; c < d.cols(); ++c) {
      for (std::size_t r = 0; r < d.rows(); ++r) {
        const double v = d(r, c);
        if (v != 0.0) {
          s.row_idx_.push_back(r);
          s.values_.push_back(v);
        }
      }
      s.col_ptr_[c + 1] = s.row_idx_.size();
    }
    return s;
  }

  // Triplets may arrive in any order; duplicates are summed and explicit zeros
  // dropped.
  struct Triplet {
    std::size_t row;
    std::size_t col;
    double value;
  };

  static SparseMatrix from_triplets(std::size_t rows, std::size_t cols,
                                    std::vector<Triplet> triplets) {
    SparseMatrix s(rows, cols);
    for (const auto& t : triplets) {
      if (t.row >= rows || t.col >= cols) {
        throw DimensionError("sparse matrix: triplet out of range");
      }
    }
    std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
      return a.col != b.col ? a.col < b.col : a.row < b.row;
    });
    std::size_t i = 0;
    for (std::size_t c = 0; c < cols; ++c) {
      while (i < triplets.size() && triplets[i].col == c) {
        const std::size_t r = triplets[i].row;
        double v = 0.0;
        while (i < triplets.size() && triplets[i].col == c && triplets[i].row == r) {
          v += triplets[i].value;
          ++i;
        }
        if (v != 0.0) {
          s.row_idx_.push_back(r);
          s.values_.push_back(v);
        }
      }
      s.col_ptr_[c + 1] = s.row_idx_.size();
    }
    return s;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t nnz() const { return values_.size(); }

  const std::vector<std::size_t>& col_ptr() const { return col_ptr_; }
  const std::vector<std::size_t>& row_idx() const { return row_idx_; }
  const std::vector<double>& values() const { return values_; }

  DenseMatrix to_dense() const {
    DenseMatrix d(rows_, cols_);
    for (std::size_t c = 0; c < cols_; ++c) {
      for (std::size_t p = col_ptr_[c]; p < col_ptr_[c + 1]; ++p) d(row_idx_[p], c) = values_[p];
    }
    return d;
  }

  friend bool operator==(const SparseMatrix&, const SparseMatrix&) = default;

 private:
  void validate() const {
    if (rows_ == 0 || cols_ == 0) throw DimensionError("sparse matrix: empty shape");
    if (col_ptr_.size() != cols_ + 1 || col_ptr_.front() != 0 ||
        col_ptr_.back() != row_idx_.size() || row_idx_.size() != values_.size()) {
      throw DimensionError("sparse matrix: inconsistent compressed arrays");
    }
    for (std::size_t c = 0; c < cols_; ++c) {
      if (col_ptr_[c] > col_ptr_[c + 1]) throw DimensionError("sparse matrix: col_ptr decreasing");
      for (std::size_t p = col_ptr_[c]; p < col_ptr_[c + 1]; ++p) {
        if (row_idx_[p] >= rows_) throw DimensionError("sparse matrix: row index out of range");
        if (p > col_ptr_[c] && row_idx_[p] <= row_idx_[p - 1]) {
          throw DimensionError("sparse matrix: row indices not strictly increasing");
        }
      }
    }
  }

  friend SparseMatrix linear_combination(std::span<const SparseMatrix>, std::span<const double>);
  friend SparseMatrix column_slice(const SparseMatrix&, std::size_t, std::size_t);
  friend SparseMatrix hconcat(std::span<const SparseMatrix>);

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> col_ptr_;
  std::vector<std::size_t> row_idx_;
  std::vector<double> values_;
};

template <typename M>
concept BlockMatrix = std::same_as<M, DenseMatrix> || std::same_as<M, SparseMatrix>;

// ---------------------------------------------------------------------------
// nnz

inline std::size_t nnz(const SparseMatrix& m) { return m.nnz(); }

inline std::size_t nnz(const DenseMatrix& m) {
  return static_cast<std::size_t>(
      std::count_if(m.entries().begin(), m.entries().end(), [](double v) { return v != 0.0; }));
}

// ---------------------------------------------------------------------------
// Transposed product: y = M^T x, x has M.rows() entries.

inline Vector matvec_t(const DenseMatrix& m, std::span<const double> x) {
  if (x.size() != m.rows()) {
    throw DimensionError("matvec_t: vector length " + std::to_string(x.size()) +
                         " != rows " + std::to_string(m.rows()));
  }
  Vector y(m.cols(), 0.0);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const double xr = x[r];
    if (xr == 0.0) continue;
    const auto row = m.row(r);
    for (std::size_t c = 0; c < m.cols(); ++c) y[c] += row[c] * xr;
  }
  return y;
}

inline Vector matvec_t(const SparseMatrix& m, std::span<const double> x) {
  if (x.size() != m.rows()) {
    throw DimensionError("matvec_t: vector length " + std::to_string(x.size()) +
                         " != rows " + std::to_string(m.rows()));
  }
  Vector y(m.cols(), 0.0);
  const auto& cp = m.col_ptr();
  const auto& ri = m.row_idx();
  const auto& v = m.values();
  for (std::size_t c = 0; c < m.cols(); ++c) {
    double acc = 0.0;
    for (std::size_t p = cp[c]; p < cp[c + 1]; ++p) acc += v[p] * x[ri[p]];
    y[c] = acc;
  }
  return y;
}

// Plain product y = M x, x has M.cols() entries. Only used on the server side
// of the learning demo.
inline Vector matvec(const DenseMatrix& m, std::span<const double> x) {
  if (x.size() != m.cols()) throw DimensionError("matvec: dimension mismatch");
  Vector y(m.rows(), 0.0);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto row = m.row(r);
    double acc = 0.0;
    for (std::size_t c = 0; c < m.cols(); ++c) acc += row[c] * x[c];
    y[r] = acc;
  }
  return y;
}

// ---------------------------------------------------------------------------
// Linear combinations of equally shaped blocks.

namespace detail {
template <BlockMatrix M>
void check_combination(std::span<const M> blocks, std::span<const double> coeffs) {
  if (blocks.empty()) throw DimensionError("linear_combination: empty block list");
  if (blocks.size() != coeffs.size()) {
    throw DimensionError("linear_combination: " + std::to_string(blocks.size()) + " blocks but " +
                         std::to_string(coeffs.size()) + " coefficients");
  }
  for (const auto& b : blocks) {
    if (b.rows() != blocks.front().rows() || b.cols() != blocks.front().cols()) {
      throw DimensionError("linear_combination: block shapes differ");
    }
  }
}
}  // namespace detail

inline DenseMatrix linear_combination(std::span<const DenseMatrix> blocks,
                                      std::span<const double> coeffs) {
  detail::check_combination(blocks, coeffs);
  std::vector<double> out(blocks.front().entries().size(), 0.0);
  for (std::size_t q = 0; q < blocks.size(); ++q) {
    const double a = coeffs[q];
    const auto& e = blocks[q].entries();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += a * e[i];
  }
  return DenseMatrix(blocks.front().rows(), blocks.front().cols(), std::move(out));
}

// The stored pattern is the union of the input patterns; exact cancellations
// are kept as stored zeros.
inline SparseMatrix linear_combination(std::span<const SparseMatrix> blocks,
                                       std::span<const double> coeffs) {
  detail::check_combination(blocks, coeffs);
  const std::size_t rows = blocks.front().rows();
  const std::size_t cols = blocks.front().cols();
  SparseMatrix out(rows, cols);

  std::size_t reserve = 0;
  for (const auto& b : blocks) reserve += b.nnz();
  out.row_idx_.reserve(std::min(reserve, rows * cols));
  out.values_.reserve(out.row_idx_.capacity());

  std::vector<double> acc(rows, 0.0);
  std::vector<std::size_t> mark(rows, static_cast<std::size_t>(-1));
  std::vector<std::size_t> pattern;
  pattern.reserve(rows);

  for (std::size_t c = 0; c < cols; ++c) {
    pattern.clear();
    for (std::size_t q = 0; q < blocks.size(); ++q) {
      const auto& b = blocks[q];
      const double a = coeffs[q];
      for (std::size_t p = b.col_ptr_[c]; p < b.col_ptr_[c + 1]; ++p) {
        const std::size_t r = b.row_idx_[p];
        if (mark[r] != c) {
          mark[r] = c;
          acc[r] = 0.0;
          pattern.push_back(r);
        }
        acc[r] += a * b.values_[p];
      }
    }
    std::sort(pattern.begin(), pattern.end());
    for (std::size_t r : pattern) {
      out.row_idx_.push_back(r);
      out.values_.push_back(acc[r]);
    }
    out.col_ptr_[c + 1] = out.row_idx_.size();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Column slicing and horizontal concatenation.

inline DenseMatrix column_slice(const DenseMatrix& m, std::size_t first, std::size_t count) {
  if (count == 0 || first + count > m.cols()) throw DimensionError("column_slice: out of range");
  DenseMatrix out(m.rows(), count);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto src = m.row(r).subspan(first, count);
    std::copy(src.begin(), src.end(), out.row(r).begin());
  }
  return out;
}

inline SparseMatrix column_slice(const SparseMatrix& m, std::size_t first, std::size_t count) {
  if (count == 0 || first + count > m.cols()) throw DimensionError("column_slice: out of range");
  SparseMatrix out(m.rows(), count);
  const std::size_t begin = m.col_ptr_[first];
  const std::size_t end = m.col_ptr_[first + count];
  out.row_idx_.assign(m.row_idx_.begin() + static_cast<std::ptrdiff_t>(begin),
                      m.row_idx_.begin() + static_cast<std::ptrdiff_t>(end));
  out.values_.assign(m.values_.begin() + static_cast<std::ptrdiff_t>(begin),
                     m.values_.begin() + static_cast<std::ptrdiff_t>(end));
  for (std::size_t c = 0; c <= count; ++c) out.col_ptr_[c] = m.col_ptr_[first + c] - begin;
  return out;
}

inline DenseMatrix hconcat(std::span<const DenseMatrix> blocks) {
  if (blocks.empty()) throw DimensionError("hconcat: empty block list");
  std::size_t cols = 0;
  for (const auto& b : blocks) {
    if (b.rows() != blocks.front().rows()) throw DimensionError("hconcat: row counts differ");
    cols += b.cols();
  }
  DenseMatrix out(blocks.front().rows(), cols);
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto dst = out.row(r).begin();
    for (const auto& b : blocks) dst = std::copy(b.row(r).begin(), b.row(r).end(), dst);
  }
  return out;
}

inline SparseMatrix hconcat(std::span<const SparseMatrix> blocks) {
  if (blocks.empty()) throw DimensionError("hconcat: empty block list");
  std::size_t cols = 0;
  for (const auto& b : blocks) {
    if (b.rows() != blocks.front().rows()) throw DimensionError("hconcat: row counts differ");
    cols += b.cols();
  }
  SparseMatrix out(blocks.front().rows(), cols);
  std::size_t c0 = 0;
  for (const auto& b : blocks) {
    const std::size_t offset = out.row_idx_.size();
    out.row_idx_.insert(out.row_idx_.end(), b.row_idx_.begin(), b.row_idx_.end());
    out.values_.insert(out.values_.end(), b.values_.begin(), b.values_.end());
    for (std::size_t c = 1; c <= b.cols(); ++c) out.col_ptr_[c0 + c] = offset + b.col_ptr_[c];
    c0 += b.cols();
  }
  return out;
}

inline DenseMatrix to_dense(const DenseMatrix& m) { return m; }
inline DenseMatrix to_dense(const SparseMatrix& m) { return m.to_dense(); }

// ---------------------------------------------------------------------------
// Small vector helpers shared by the decoder and the simulator.

inline double norm_inf(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

inline double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// ||a - b||_2 / max(||b||_2, tiny)
inline double relative_error(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("relative_error: length mismatch");
  double num = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) num += (a[i] - b[i]) * (a[i] - b[i]);
  const double den = norm2(b);
  return std::sqrt(num) / std::max(den, 1e-300);
}

}  // namespace cdmm
