#pragma once

// Small dense elimination routines for k x k generator subsystems. Rows are
// equilibrated (scaled to unit max-norm) before elimination so the pivot
// threshold is independent of coefficient magnitudes.

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "cdmm/error.hpp"
#include "cdmm/matrix.hpp"

namespace cdmm {

inline constexpr double kPivotTolerance = 1e-10;

namespace detail {

// Returns per-row scale factors (inverse max-norms); zero rows get 0.
inline std::vector<double> equilibrate(DenseMatrix& a) {
  std::vector<double> scale(a.rows(), 0.0);
  for (std::size_t r = 0; r < a.rows(); ++r) {
    const double m = norm_inf(a.row(r));
    if (m == 0.0) continue;
    scale[r] = 1.0 / m;
    for (auto& v : a.row(r)) v *= scale[r];
  }
  return scale;
}

}  // namespace detail

// Numerical rank via row-pivoted elimination on the equilibrated matrix.
inline std::size_t numerical_rank(DenseMatrix a, double tol = kPivotTolerance) {
  detail::equilibrate(a);
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  std::size_t rank = 0;
  for (std::size_t c = 0; c < n && rank < m; ++c) {
    std::size_t piv = rank;
    for (std::size_t r = rank + 1; r < m; ++r) {
      if (std::abs(a(r, c)) > std::abs(a(piv, c))) piv = r;
    }
    if (std::abs(a(piv, c)) < tol) continue;
    if (piv != rank) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(piv, j), a(rank, j));
    }
    for (std::size_t r = rank + 1; r < m; ++r) {
      const double f = a(r, c) / a(rank, c);
      if (f == 0.0) continue;
      for (std::size_t j = c; j < n; ++j) a(r, j) -= f * a(rank, j);
    }
    ++rank;
  }
  return rank;
}

// LU factorisation with partial (row) pivoting of an equilibrated square
// matrix. `ok` is false when a pivot falls under the tolerance.
class LuFactor {
 public:
  explicit LuFactor(DenseMatrix a, double tol = kPivotTolerance) : lu_(std::move(a)) {
    if (lu_.rows() != lu_.cols()) throw DimensionError("LU: matrix is not square");
    scale_ = detail::equilibrate(lu_);
    const std::size_t n = lu_.rows();
    perm_.resize(n);
    for (std::size_t i = 0; i < n; ++i) perm_[i] = i;
    for (std::size_t c = 0; c < n; ++c) {
      std::size_t piv = c;
      for (std::size_t r = c + 1; r < n; ++r) {
        if (std::abs(lu_(r, c)) > std::abs(lu_(piv, c))) piv = r;
      }
      if (std::abs(lu_(piv, c)) < tol) {
        ok_ = false;
        return;
      }
      if (piv != c) {
        for (std::size_t j = 0; j < n; ++j) std::swap(lu_(piv, j), lu_(c, j));
        std::swap(perm_[piv], perm_[c]);
      }
      for (std::size_t r = c + 1; r < n; ++r) {
        const double f = lu_(r, c) / lu_(c, c);
        lu_(r, c) = f;
        if (f == 0.0) continue;
        for (std::size_t j = c + 1; j < n; ++j) lu_(r, j) -= f * lu_(c, j);
      }
    }
  }

  bool ok() const { return ok_; }
  std::size_t size() const { return lu_.rows(); }

  // Solves A u = b for the original (unscaled) A.
  Vector solve(std::span<const double> b) const {
    const std::size_t n = size();
    Vector y(n);
    for (std::size_t i = 0; i < n; ++i) {
      double v = b[perm_[i]] * scale_[perm_[i]];
      for (std::size_t j = 0; j < i; ++j) v -= lu_(i, j) * y[j];
      y[i] = v;
    }
    for (std::size_t i = n; i-- > 0;) {
      double v = y[i];
      for (std::size_t j = i + 1; j < n; ++j) v -= lu_(i, j) * y[j];
      y[i] = v / lu_(i, i);
    }
    return y;
  }

 private:
  DenseMatrix lu_;
  std::vector<double> scale_;
  std::vector<std::size_t> perm_;
  bool ok_ = true;
};

inline double norm1(const DenseMatrix& a) {
  double best = 0.0;
  for (std::size_t c = 0; c < a.cols(); ++c) {
    double s = 0.0;
    for (std::size_t r = 0; r < a.rows(); ++r) s += std::abs(a(r, c));
    best = std::max(best, s);
  }
  return best;
}

// 1-norm condition number ||A||_1 ||A^-1||_1; +inf for numerically singular A.
inline double condition_number(const DenseMatrix& a) {
  LuFactor lu(a);
  if (!lu.ok()) return std::numeric_limits<double>::infinity();
  const std::size_t n = a.rows();
  DenseMatrix inv(n, n);
  Vector e(n, 0.0);
  for (std::size_t c = 0; c < n; ++c) {
    e.assign(n, 0.0);
    e[c] = 1.0;
    const auto col = lu.solve(e);
    for (std::size_t r = 0; r < n; ++r) inv(r, c) = col[r];
  }
  return norm1(a) * norm1(inv);
}

// Rows `rows` of g, in that order.
inline DenseMatrix select_rows(const DenseMatrix& g, std::span<const std::size_t> rows) {
  DenseMatrix out(rows.size(), g.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto src = g.row(rows[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

}  // namespace cdmm
