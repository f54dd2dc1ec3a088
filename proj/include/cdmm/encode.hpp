#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "cdmm/error.hpp"
#include "cdmm/matrix.hpp"
#include "cdmm/partition.hpp"
#include "cdmm/plan.hpp"

namespace cdmm {

// Coded submatrices, one per worker, with the generator matrix G such that
// coded[i] = sum_q G(i, q) * block[q].
template <BlockMatrix M>
struct EncodedWorkload {
  std::vector<M> coded;
  DenseMatrix generator;

  std::size_t worker_count() const { return coded.size(); }
};

template <BlockMatrix M>
M encode_worker(const PartitionedMatrix<M>& p, const CodedBlockSpec& spec) {
  std::vector<M> parts;
  parts.reserve(spec.support.size());
  for (auto q : spec.support) parts.push_back(p.block(q));
  return linear_combination(std::span<const M>(parts), std::span<const double>(spec.coeffs));
}

template <BlockMatrix M>
EncodedWorkload<M> encode(const PartitionedMatrix<M>& p, const CodingPlan& plan) {
  if (p.block_count() != plan.k_bar) {
    throw DimensionError("encode: matrix has " + std::to_string(p.block_count()) +
                         " blocks but the plan expects " + std::to_string(plan.k_bar));
  }
  if (p.block_cols() == 0) throw DimensionError("encode: blocks must share one width");
  EncodedWorkload<M> out;
  out.coded.reserve(plan.worker_count());
  for (const auto& spec : plan.specs) out.coded.push_back(encode_worker(p, spec));
  out.generator = plan.coefficient_matrix();
  return out;
}

// Dense random combinations of every block for n workers (all homogeneous).
template <BlockMatrix M>
EncodedWorkload<M> encode_baseline_dense(const PartitionedMatrix<M>& p, std::size_t n,
                                         std::uint64_t seed) {
  const std::size_t k = p.block_count();
  if (n < k) throw PlanError("dense baseline: need at least k workers");
  return encode(p, build_dense_plan(ClientRoster::homogeneous(k, n - k), seed));
}

template <BlockMatrix M>
EncodedWorkload<M> encode_baseline_polynomial(const PartitionedMatrix<M>& p,
                                              std::vector<double> points) {
  const std::size_t k = p.block_count();
  const std::size_t n = points.size();
  if (n < k) throw PlanError("poly baseline: need at least k evaluation points");
  detail::check_distinct(points);
  // Ownership is one worker per client; no roster limits apply to this code.
  CodingPlan plan;
  plan.scheme = Scheme::kPolynomial;
  plan.k_bar = k;
  plan.s_bar = n - k;
  for (std::size_t i = 0; i < n; ++i) {
    plan.specs.push_back(detail::vandermonde_spec(i, i, Role::kActive, points[i], k));
  }
  return encode(p, plan);
}

}  // namespace cdmm
