#pragma once

#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "cdmm/error.hpp"
#include "cdmm/matrix.hpp"

namespace cdmm {

// A matrix held as an ordered list of disjoint block-columns that share one
// row count. Concatenating the blocks in order reproduces the source matrix.
template <BlockMatrix M>
class PartitionedMatrix {
 public:
  PartitionedMatrix() = default;

  explicit PartitionedMatrix(std::vector<M> blocks) : blocks_(std::move(blocks)) {
    if (blocks_.empty()) throw PartitionError("partitioned matrix: no blocks");
    for (const auto& b : blocks_) {
      if (b.rows() != blocks_.front().rows()) {
        throw PartitionError("partitioned matrix: blocks have different row counts");
      }
    }
  }

  std::size_t block_count() const { return blocks_.size(); }
  std::size_t rows() const { return blocks_.front().rows(); }

  std::size_t total_cols() const {
    std::size_t c = 0;
    for (const auto& b : blocks_) c += b.cols();
    return c;
  }

  std::vector<std::size_t> widths() const {
    std::vector<std::size_t> w;
    w.reserve(blocks_.size());
    for (const auto& b : blocks_) w.push_back(b.cols());
    return w;
  }

  // Common block width, or 0 when the blocks are not uniform.
  std::size_t block_cols() const {
    const std::size_t w = blocks_.front().cols();
    for (const auto& b : blocks_) {
      if (b.cols() != w) return 0;
    }
    return w;
  }

  const M& block(std::size_t q) const { return blocks_.at(q); }
  std::span<const M> blocks() const { return blocks_; }

  M concat() const { return hconcat(std::span<const M>(blocks_)); }

 private:
  std::vector<M> blocks_;
};

template <BlockMatrix M>
PartitionedMatrix<M> partition(const M& a, std::span<const std::size_t> widths) {
  if (widths.empty()) throw PartitionError("partition: no widths given");
  std::size_t sum = 0;
  for (std::size_t w : widths) {
    if (w == 0) throw PartitionError("partition: zero block width");
    sum += w;
  }
  if (sum != a.cols()) {
    throw PartitionError("partition: widths sum to " + std::to_string(sum) + " but matrix has " +
                         std::to_string(a.cols()) + " columns");
  }
  std::vector<M> blocks;
  blocks.reserve(widths.size());
  std::size_t first = 0;
  for (std::size_t w : widths) {
    blocks.push_back(column_slice(a, first, w));
    first += w;
  }
  return PartitionedMatrix<M>(std::move(blocks));
}

template <BlockMatrix M>
PartitionedMatrix<M> partition_equal(const M& a, std::size_t block_count) {
  if (block_count == 0 || a.cols() % block_count != 0) {
    throw PartitionError("partition_equal: " + std::to_string(a.cols()) +
                         " columns do not split into " + std::to_string(block_count) +
                         " equal blocks");
  }
  std::vector<std::size_t> widths(block_count, a.cols() / block_count);
  return partition(a, std::span<const std::size_t>(widths));
}

// Splits block k into multipliers[k] consecutive sub-blocks of width alpha.
template <BlockMatrix M>
PartitionedMatrix<M> subpartition(const PartitionedMatrix<M>& p,
                                  std::span<const std::size_t> multipliers) {
  if (multipliers.size() != p.block_count()) {
    throw ExpansionError("subpartition: " + std::to_string(multipliers.size()) +
                         " multipliers for " + std::to_string(p.block_count()) + " blocks");
  }
  const std::size_t total = std::accumulate(multipliers.begin(), multipliers.end(), std::size_t{0});
  if (total == 0 || p.total_cols() % total != 0) {
    throw ExpansionError("subpartition: total width not divisible by multiplier sum");
  }
  const std::size_t alpha = p.total_cols() / total;
  std::vector<M> out;
  out.reserve(total);
  for (std::size_t k = 0; k < p.block_count(); ++k) {
    const M& b = p.block(k);
    if (multipliers[k] == 0 || b.cols() != multipliers[k] * alpha) {
      throw ExpansionError("subpartition: block " + std::to_string(k) + " has width " +
                           std::to_string(b.cols()) + ", expected " +
                           std::to_string(multipliers[k]) + " x " + std::to_string(alpha));
    }
    for (std::size_t j = 0; j < multipliers[k]; ++j) out.push_back(column_slice(b, j * alpha, alpha));
  }
  return PartitionedMatrix<M>(std::move(out));
}

}  // namespace cdmm
