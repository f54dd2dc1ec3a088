#pragma once

// Per-worker cost of coded products on sparse data: stored nonzeros of each
// coded block and the wall time of its transposed product.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <unordered_set>
#include <vector>

#include "cdmm/encode.hpp"
#include "cdmm/matrix.hpp"
#include "cdmm/partition.hpp"
#include "cdmm/plan.hpp"
#include "cdmm/random.hpp"

namespace cdmm {

// rows x cols matrix where each column holds exactly round((1 - zero_fraction) * rows)
// nonzeros at uniformly random positions, values uniform on [-1, 1] away from 0.
inline SparseMatrix random_sparse(std::size_t rows, std::size_t cols, double zero_fraction,
                                  std::uint64_t seed) {
  if (zero_fraction < 0.0 || zero_fraction > 1.0) throw ConfigError("random_sparse: density outside [0, 1]");
  const auto per_col = static_cast<std::size_t>(std::llround((1.0 - zero_fraction) * static_cast<double>(rows)));
  std::vector<std::size_t> col_ptr(cols + 1, 0);
  std::vector<std::size_t> row_idx;
  std::vector<double> values;
  row_idx.reserve(per_col * cols);
  values.reserve(per_col * cols);
  auto rng = make_stream(seed, StreamTag::kData, 0);
  std::vector<std::size_t> picked;
  std::unordered_set<std::size_t> seen;
  for (std::size_t c = 0; c < cols; ++c) {
    picked.clear();
    if (per_col == rows) {
      for (std::size_t r = 0; r < rows; ++r) picked.push_back(r);
    } else {
      // Floyd's sampling of per_col distinct rows.
      seen.clear();
      for (std::size_t j = rows - per_col; j < rows; ++j) {
        const std::size_t t = static_cast<std::size_t>(draw_index(rng, j + 1));
        const std::size_t r = seen.count(t) ? j : t;
        seen.insert(r);
        picked.push_back(r);
      }
      std::sort(picked.begin(), picked.end());
    }
    for (auto r : picked) {
      row_idx.push_back(r);
      values.push_back(draw_coefficient(rng));
    }
    col_ptr[c + 1] = row_idx.size();
  }
  return SparseMatrix(rows, cols, std::move(col_ptr), std::move(row_idx), std::move(values));
}

inline DenseMatrix random_dense(std::size_t rows, std::size_t cols, std::uint64_t seed,
                                StreamTag tag = StreamTag::kData) {
  auto rng = make_stream(seed, tag, 0);
  std::vector<double> e(rows * cols);
  for (auto& v : e) v = draw_normal(rng);
  return DenseMatrix(rows, cols, std::move(e));
}

inline Vector random_vector(std::size_t n, std::uint64_t seed) {
  auto rng = make_stream(seed, StreamTag::kVector, 0);
  Vector v(n);
  for (auto& x : v) x = draw_normal(rng);
  return v;
}

struct BenchmarkOptions {
  std::size_t trials = 11;
  std::size_t warmup = 2;
  // Measure at most this many workers per scheme (evenly spaced, always
  // including the first and the last); 0 measures all.
  std::size_t max_workers = 0;
};

struct BenchmarkRow {
  std::string scheme;
  double zero_fraction = 0.0;
  std::size_t workers_measured = 0;
  double mean_nnz = 0.0;
  std::size_t max_nnz = 0;
  // Largest per-worker ratio nnz(coded) / sum of nnz over its support blocks.
  double max_support_ratio = 0.0;
  double median_ms = 0.0;  // median over workers of per-worker median time
};

inline std::vector<std::size_t> measured_workers(std::size_t n, std::size_t limit) {
  std::vector<std::size_t> w;
  if (limit == 0 || limit >= n) {
    for (std::size_t i = 0; i < n; ++i) w.push_back(i);
    return w;
  }
  if (limit == 1) return {0};
  for (std::size_t j = 0; j < limit; ++j) w.push_back(j * (n - 1) / (limit - 1));
  w.erase(std::unique(w.begin(), w.end()), w.end());
  return w;
}

inline double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

// Encodes each measured worker's block on the fly, so only one coded block
// lives in memory at a time.
inline BenchmarkRow benchmark_plan(const PartitionedMatrix<SparseMatrix>& p, const CodingPlan& plan,
                                   const Vector& x, double zero_fraction, const BenchmarkOptions& opt) {
  BenchmarkRow row;
  row.scheme = to_string(plan.scheme);
  row.zero_fraction = zero_fraction;
  std::vector<double> per_worker_ms;
  double nnz_sum = 0.0;
  volatile double sink = 0.0;
  for (auto w : measured_workers(plan.worker_count(), opt.max_workers)) {
    const auto& spec = plan.specs[w];
    const SparseMatrix coded = encode_worker(p, spec);
    std::size_t support_nnz = 0;
    for (auto q : spec.support) support_nnz += p.block(q).nnz();
    row.max_nnz = std::max(row.max_nnz, coded.nnz());
    nnz_sum += static_cast<double>(coded.nnz());
    if (support_nnz > 0) {
      row.max_support_ratio = std::max(row.max_support_ratio,
                                       static_cast<double>(coded.nnz()) / static_cast<double>(support_nnz));
    }
    std::vector<double> times;
    for (std::size_t t = 0; t < opt.warmup + opt.trials; ++t) {
      const auto t0 = std::chrono::steady_clock::now();
      const auto y = matvec_t(coded, x);
      const auto t1 = std::chrono::steady_clock::now();
      sink = sink + y[0];
      if (t >= opt.warmup) times.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
    per_worker_ms.push_back(median(std::move(times)));
    ++row.workers_measured;
  }
  row.mean_nnz = row.workers_measured ? nnz_sum / static_cast<double>(row.workers_measured) : 0.0;
  row.median_ms = median(per_worker_ms);
  return row;
}

struct SparseTableConfig {
  std::size_t rows = 4000;    // per block
  std::size_t alpha = 1125;   // columns per block
  std::size_t k = 28;
  std::size_t s = 2;
  std::vector<double> zero_fractions{0.99, 0.98, 0.95};
  std::vector<Scheme> schemes{Scheme::kProposed, Scheme::kDenseRandom};
  std::uint64_t seed = 1;
  BenchmarkOptions options;
};

// One row per (zero fraction, scheme), zero fractions in the given order.
inline std::vector<BenchmarkRow> sparse_compute_benchmark(const SparseTableConfig& cfg) {
  std::vector<BenchmarkRow> rows;
  if (cfg.options.trials == 0) return rows;
  const auto roster = ClientRoster::homogeneous(cfg.k, cfg.s);
  const Vector x = random_vector(cfg.rows, cfg.seed);
  for (std::size_t z = 0; z < cfg.zero_fractions.size(); ++z) {
    const double zeta = cfg.zero_fractions[z];
    const auto a = random_sparse(cfg.rows, cfg.alpha * cfg.k, zeta, cfg.seed + 1000 * (z + 1));
    const auto p = partition_equal(a, cfg.k);
    for (auto scheme : cfg.schemes) {
      rows.push_back(benchmark_plan(p, build_plan(scheme, roster, cfg.seed), x, zeta, cfg.options));
    }
  }
  return rows;
}

}  // namespace cdmm
