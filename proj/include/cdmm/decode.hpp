#pragma once

// Server-side recovery of A^T x from the coded products that arrive first.

#include <algorithm>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cdmm/error.hpp"
#include "cdmm/linsolve.hpp"
#include "cdmm/matrix.hpp"

namespace cdmm {

inline constexpr double kDecodeResidualTolerance = 1e-8;

struct ReturnedProduct {
  std::size_t worker = 0;
  Vector coefficients;  // length k
  Vector product;       // length alpha
};

struct DecodeProblem {
  std::size_t k_bar = 0;
  std::vector<ReturnedProduct> returned;  // arrival order
};

struct DecodeResult {
  std::vector<Vector> block_products;  // k vectors of length alpha
  double residual = 0.0;
  std::vector<std::size_t> used_workers;

  Vector concatenated() const {
    Vector out;
    for (const auto& b : block_products) out.insert(out.end(), b.begin(), b.end());
    return out;
  }
};

namespace detail {
inline std::string worker_list(std::span<const std::size_t> w) {
  std::string s = "{";
  for (std::size_t i = 0; i < w.size(); ++i) s += (i ? "," : "") + std::to_string(w[i]);
  return s + "}";
}
}  // namespace detail

// Solves G_S U = Y for the first k returned rows (or the rows named by
// `selection`, given as positions into problem.returned).
inline DecodeResult decode(const DecodeProblem& problem,
                           std::optional<std::vector<std::size_t>> selection = std::nullopt) {
  const std::size_t k = problem.k_bar;
  if (k == 0) throw DimensionError("decode: k must be positive");
  if (problem.returned.size() < k) {
    throw NotEnoughResults("decode: " + std::to_string(problem.returned.size()) +
                           " results returned, " + std::to_string(k) + " needed");
  }
  std::vector<std::size_t> rows;
  if (selection) {
    rows = *selection;
    if (rows.size() != k) throw DimensionError("decode: selection must name exactly k rows");
  } else {
    for (std::size_t i = 0; i < k; ++i) rows.push_back(i);
  }
  const std::size_t alpha = problem.returned[rows.front()].product.size();
  DenseMatrix g(k, k);
  std::vector<std::size_t> workers;
  for (std::size_t i = 0; i < k; ++i) {
    const auto& r = problem.returned.at(rows[i]);
    if (r.coefficients.size() != k) throw DimensionError("decode: coefficient row length != k");
    if (r.product.size() != alpha) throw DimensionError("decode: product lengths differ");
    std::copy(r.coefficients.begin(), r.coefficients.end(), g.row(i).begin());
    workers.push_back(r.worker);
  }

  LuFactor lu(g);
  if (!lu.ok()) {
    throw RankDeficient("decode: rank-deficient system for workers " + detail::worker_list(workers));
  }

  DecodeResult result;
  result.used_workers = workers;
  result.block_products.assign(k, Vector(alpha, 0.0));
  Vector rhs(k);
  for (std::size_t c = 0; c < alpha; ++c) {
    for (std::size_t i = 0; i < k; ++i) rhs[i] = problem.returned[rows[i]].product[c];
    const auto u = lu.solve(rhs);
    for (std::size_t q = 0; q < k; ++q) result.block_products[q][c] = u[q];
  }

  // Row-wise relative residual of G_S U - Y.
  double worst = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const auto& y = problem.returned[rows[i]].product;
    double num = 0.0;
    for (std::size_t c = 0; c < alpha; ++c) {
      double v = -y[c];
      for (std::size_t q = 0; q < k; ++q) v += g(i, q) * result.block_products[q][c];
      num += v * v;
    }
    const double den = norm2(y);
    const double rel = den > 0.0 ? std::sqrt(num) / den : std::sqrt(num);
    worst = std::max(worst, rel);
  }
  result.residual = worst;
  if (!(worst <= kDecodeResidualTolerance)) {
    throw RankDeficient("decode: residual " + std::to_string(worst) + " exceeds tolerance for workers " +
                        detail::worker_list(workers));
  }
  return result;
}

}  // namespace cdmm
