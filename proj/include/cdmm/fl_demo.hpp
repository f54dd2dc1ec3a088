#pragma once

// Gradient descent on ||D b - y||^2 where both matrix-vector products of
// every iteration are computed by coded workers with injected stragglers:
//   u = D b     as  (D^T)^T b   (data matrix D^T, split into column blocks)
//   g = D^T r   as  D^T r       (data matrix D)
// Columns are zero-padded to a multiple of the block count. An uncoded run on
// the same data serves as the reference trajectory.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "cdmm/decode.hpp"
#include "cdmm/encode.hpp"
#include "cdmm/error.hpp"
#include "cdmm/matrix.hpp"
#include "cdmm/partition.hpp"
#include "cdmm/plan.hpp"
#include "cdmm/random.hpp"
#include "cdmm/simulator.hpp"

namespace cdmm {

struct FlDemoConfig {
  ClientRoster roster = ClientRoster::homogeneous(7, 2);
  Scheme scheme = Scheme::kProposed;
  std::size_t steps = 100;
  double stepsize = 0.0;
  std::size_t stragglers_per_round = 2;
  std::size_t max_retries = 16;
  std::uint64_t seed = 1;
};

struct FlDemoResult {
  std::vector<double> loss;             // steps + 1 values, starting at b = 0
  std::vector<Vector> params;           // coded trajectory
  std::vector<double> oracle_loss;
  std::vector<Vector> oracle_params;    // uncoded reference
  std::vector<double> deviation;        // per-iteration relative distance to the reference
  std::size_t retries = 0;
  std::vector<std::string> log;
  double lipschitz = 0.0;

  double max_deviation() const {
    double m = 0.0;
    for (double d : deviation) m = std::max(m, d);
    return m;
  }
};

// Largest eigenvalue of D^T D by power iteration.
inline double largest_gram_eigenvalue(const DenseMatrix& d, std::size_t iters = 500) {
  Vector v(d.cols(), 1.0 / std::sqrt(static_cast<double>(d.cols())));
  double lambda = 0.0;
  for (std::size_t it = 0; it < iters; ++it) {
    const auto w = matvec_t(d, matvec(d, v));
    const double n = norm2(w);
    if (n == 0.0) return 0.0;
    const double next = n;
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = w[i] / n;
    if (std::abs(next - lambda) <= 1e-13 * next) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  return lambda;
}

// Lipschitz constant of the gradient 2 D^T (D b - y), with a 1% margin over
// the power-iteration estimate.
inline double gradient_lipschitz(const DenseMatrix& d) { return 2.0 * 1.01 * largest_gram_eigenvalue(d); }

inline double quadratic_loss(const DenseMatrix& d, const Vector& y, const Vector& b) {
  const auto u = matvec(d, b);
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += (u[i] - y[i]) * (u[i] - y[i]);
  return s;
}

namespace detail {

inline DenseMatrix pad_columns(const DenseMatrix& m, std::size_t cols) {
  DenseMatrix out(m.rows(), cols);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    std::copy(m.row(r).begin(), m.row(r).end(), out.row(r).begin());
  }
  return out;
}

inline DenseMatrix transpose(const DenseMatrix& m) {
  DenseMatrix t(m.cols(), m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) t(c, r) = m(r, c);
  }
  return t;
}

// A coded data matrix ready for repeated A^T x rounds.
class CodedOperator {
 public:
  CodedOperator(const DenseMatrix& a, const CodingPlan& plan) : plan_(plan), cols_(a.cols()) {
    const std::size_t k = plan.k_bar;
    const std::size_t padded = (a.cols() + k - 1) / k * k;
    blocks_ = partition_equal(padded == a.cols() ? a : pad_columns(a, padded), k);
    encoded_ = encode(blocks_, plan_);
  }

  // Returns A^T x, or throws the decode error of this round.
  Vector apply(const Vector& x, const TimingModel& timing, std::uint64_t seed, std::uint64_t round) const {
    const BlockShape shape{blocks_.rows(), blocks_.block_cols()};
    auto rep = simulate_round<DenseMatrix>(plan_, shape, timing, CommModel{}, seed, round,
                                           {&blocks_, &encoded_, &x});
    if (!rep.decoded) throw NotEnoughResults(rep.decode_failure);
    auto out = rep.result->concatenated();
    out.resize(cols_);
    return out;
  }

 private:
  CodingPlan plan_;
  std::size_t cols_;
  PartitionedMatrix<DenseMatrix> blocks_;
  EncodedWorkload<DenseMatrix> encoded_;
};

inline TimingModel straggler_draw(const ClientRoster& roster, std::size_t count, std::uint64_t seed,
                                  std::uint64_t round) {
  TimingModel t;
  auto rng = make_stream(seed, StreamTag::kStragglers, round);
  std::vector<std::size_t> pool(roster.size());
  for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = i;
  for (std::size_t i = 0; i < std::min(count, pool.size()); ++i) {
    const std::size_t j = i + static_cast<std::size_t>(draw_index(rng, pool.size() - i));
    std::swap(pool[i], pool[j]);
    t.failed_clients.push_back(pool[i]);
  }
  return t;
}

}  // namespace detail

inline FlDemoResult fl_demo(const DenseMatrix& d, const Vector& y, const FlDemoConfig& cfg) {
  if (y.size() != d.rows()) throw DimensionError("fl_demo: y length must equal the rows of D");
  if (cfg.stepsize < 0.0) throw ConfigError("fl_demo: stepsize must be nonnegative");
  FlDemoResult res;
  res.lipschitz = gradient_lipschitz(d);
  if (cfg.stepsize > 0.0 && cfg.stepsize * res.lipschitz >= 1.0) {
    throw ConfigError("fl_demo: stepsize " + std::to_string(cfg.stepsize) + " is not below 1/L = " +
                      std::to_string(1.0 / res.lipschitz));
  }

  const auto plan = build_plan(cfg.scheme, cfg.roster, cfg.seed);
  const detail::CodedOperator forward(detail::transpose(d), plan);  // b -> D b
  const detail::CodedOperator adjoint(d, plan);                      // r -> D^T r

  // Retries draw a fresh straggler set for the same round.
  auto coded_apply = [&](const detail::CodedOperator& op, const Vector& x, std::uint64_t round) {
    for (std::size_t attempt = 0;; ++attempt) {
      const std::uint64_t key = round * 64 + attempt;
      const auto timing = detail::straggler_draw(cfg.roster, cfg.stragglers_per_round, cfg.seed, key);
      try {
        return op.apply(x, timing, cfg.seed, key);
      } catch (const Error& e) {
        if (attempt + 1 >= cfg.max_retries) throw;
        ++res.retries;
        res.log.push_back("round " + std::to_string(round) + " attempt " + std::to_string(attempt) +
                          ": " + e.what());
      }
    }
  };

  Vector b(d.cols(), 0.0);
  Vector ref(d.cols(), 0.0);
  auto record = [&] {
    res.params.push_back(b);
    res.oracle_params.push_back(ref);
    res.loss.push_back(quadratic_loss(d, y, b));
    res.oracle_loss.push_back(quadratic_loss(d, y, ref));
    const double den = norm2(ref);
    res.deviation.push_back(den > 0.0 ? relative_error(b, ref) : norm2(b));
  };
  record();
  for (std::size_t step = 0; step < cfg.steps; ++step) {
    Vector r = coded_apply(forward, b, 2 * step);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= y[i];
    const Vector g = coded_apply(adjoint, r, 2 * step + 1);
    for (std::size_t i = 0; i < b.size(); ++i) b[i] -= cfg.stepsize * 2.0 * g[i];

    Vector rr = matvec(d, ref);
    for (std::size_t i = 0; i < rr.size(); ++i) rr[i] -= y[i];
    const Vector gr = matvec_t(d, rr);
    for (std::size_t i = 0; i < ref.size(); ++i) ref[i] -= cfg.stepsize * 2.0 * gr[i];
    record();
  }
  return res;
}

}  // namespace cdmm
