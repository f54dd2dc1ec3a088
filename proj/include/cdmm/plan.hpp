#pragma once

// Worker assignments: which base blocks each virtual worker combines, with
// which coefficients, and which device-to-device transfers that requires.
//
// The proposed scheme gives worker i (0 <= i < k) the cyclic support
// {i, i+1, ..., i+s} mod k, receiving blocks i+1..i+s from their generators.
// Passive worker k+i (0 <= i < s) gets a fresh combination over the same
// support, encoded by the owner of worker i and shipped as one coded block.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "cdmm/error.hpp"
#include "cdmm/matrix.hpp"
#include "cdmm/random.hpp"
#include "cdmm/roster.hpp"

namespace cdmm {

enum class Scheme { kProposed, kDenseRandom, kPolynomial, kUncoded, kCustom };

inline const char* to_string(Scheme s) {
  switch (s) {
    case Scheme::kProposed: return "proposed";
    case Scheme::kDenseRandom: return "dense";
    case Scheme::kPolynomial: return "poly";
    case Scheme::kUncoded: return "uncoded";
    case Scheme::kCustom: return "custom";
  }
  return "unknown";
}

inline Scheme scheme_from_string(const std::string& name) {
  if (name == "proposed") return Scheme::kProposed;
  if (name == "dense") return Scheme::kDenseRandom;
  if (name == "poly") return Scheme::kPolynomial;
  if (name == "uncoded") return Scheme::kUncoded;
  if (name == "custom") return Scheme::kCustom;
  throw ConfigError("unknown scheme '" + name + "' (expected proposed, dense, poly or uncoded)");
}

struct CodedBlockSpec {
  std::size_t worker = 0;
  std::size_t owner_client = 0;
  Role role = Role::kActive;
  std::vector<std::size_t> support;  // base block indices
  std::vector<double> coeffs;        // aligned with support
  std::string seed_tag;

  friend bool operator==(const CodedBlockSpec&, const CodedBlockSpec&) = default;
};

enum class Payload { kRawBlock, kCodedBlock };

struct Transfer {
  std::size_t from_client = 0;
  std::size_t to_client = 0;
  Payload payload = Payload::kRawBlock;
  std::size_t index = 0;  // base block for raw payloads, worker for coded ones

  friend bool operator==(const Transfer&, const Transfer&) = default;
  friend auto operator<=>(const Transfer& a, const Transfer& b) {
    return std::tie(a.from_client, a.to_client, a.payload, a.index) <=>
           std::tie(b.from_client, b.to_client, b.payload, b.index);
  }
};

struct CodingPlan {
  Scheme scheme = Scheme::kProposed;
  std::size_t k_bar = 0;
  std::size_t s_bar = 0;
  std::uint64_t seed = 0;
  ClientRoster roster;
  std::vector<CodedBlockSpec> specs;
  // Physical transfers, with same-client and duplicate sends collapsed.
  std::vector<Transfer> transfers;
  // Raw-block sends counted between virtual workers, before collapsing.
  std::size_t virtual_raw_transfers = 0;

  std::size_t worker_count() const { return specs.size(); }
  std::size_t weight() const { return s_bar + 1; }

  Vector coefficient_row(std::size_t worker) const {
    const auto& spec = specs.at(worker);
    Vector row(k_bar, 0.0);
    for (std::size_t j = 0; j < spec.support.size(); ++j) row[spec.support[j]] += spec.coeffs[j];
    return row;
  }

  // worker_count() x k_bar generator matrix.
  DenseMatrix coefficient_matrix() const {
    DenseMatrix g(worker_count(), k_bar);
    for (std::size_t i = 0; i < worker_count(); ++i) {
      const auto row = coefficient_row(i);
      std::copy(row.begin(), row.end(), g.row(i).begin());
    }
    return g;
  }

  std::size_t raw_transfer_count() const {
    return static_cast<std::size_t>(std::count_if(transfers.begin(), transfers.end(), [](const Transfer& t) {
      return t.payload == Payload::kRawBlock;
    }));
  }
  std::size_t coded_transfer_count() const { return transfers.size() - raw_transfer_count(); }

  friend bool operator==(const CodingPlan&, const CodingPlan&) = default;
};

enum class CoefficientMode { kRandom, kOnes };

namespace detail {

inline std::vector<std::size_t> cyclic_support(std::size_t first, std::size_t weight,
                                               std::size_t k) {
  std::vector<std::size_t> s(weight);
  for (std::size_t j = 0; j < weight; ++j) s[j] = (first + j) % k;
  return s;
}

inline std::vector<double> draw_coefficients(std::uint64_t seed, std::size_t worker,
                                             std::size_t count, CoefficientMode mode) {
  std::vector<double> c(count, 1.0);
  if (mode == CoefficientMode::kRandom) {
    auto rng = make_stream(seed, StreamTag::kCoefficients, worker);
    for (auto& v : c) v = draw_coefficient(rng);
  }
  return c;
}

inline std::string seed_tag(std::uint64_t seed, std::size_t worker) {
  return "seed=" + std::to_string(seed) + "/coeff/" + std::to_string(worker);
}

class TransferBuilder {
 public:
  void raw(std::size_t from, std::size_t to, std::size_t block) {
    if (from != to) seen_.insert({from, to, Payload::kRawBlock, block});
  }
  void coded(std::size_t from, std::size_t to, std::size_t worker) {
    if (from != to) seen_.insert({from, to, Payload::kCodedBlock, worker});
  }
  std::vector<Transfer> take() const { return {seen_.begin(), seen_.end()}; }

 private:
  std::set<Transfer> seen_;
};

// Every worker needs every raw block: each generator ships to all others.
inline void broadcast_raw_blocks(const Expansion& e, CodingPlan& plan) {
  TransferBuilder tb;
  for (std::size_t q = 0; q < e.k_bar; ++q) {
    for (std::size_t w = 0; w < e.n_bar(); ++w) {
      if (w == q) continue;
      ++plan.virtual_raw_transfers;
      tb.raw(e.worker_owner[q], e.worker_owner[w], q);
    }
  }
  plan.transfers = tb.take();
}

inline void check_block_count(std::size_t k) {
  if (k == 0) throw InvalidRoster("plan: at least one block is required");
}

}  // namespace detail

inline CodingPlan build_heterogeneous_plan(const ClientRoster& roster, std::uint64_t seed,
                                           CoefficientMode mode = CoefficientMode::kRandom) {
  const Expansion e = expand_heterogeneous(roster);
  CodingPlan plan;
  plan.scheme = Scheme::kProposed;
  plan.k_bar = e.k_bar;
  plan.s_bar = e.s_bar;
  plan.seed = seed;
  plan.roster = roster;

  const std::size_t k = e.k_bar;
  const std::size_t w = plan.weight();
  detail::TransferBuilder tb;
  for (std::size_t i = 0; i < e.n_bar(); ++i) {
    const bool active = i < k;
    const std::size_t base = active ? i : i - k;
    CodedBlockSpec spec;
    spec.worker = i;
    spec.owner_client = e.worker_owner[i];
    spec.role = active ? Role::kActive : Role::kPassive;
    spec.support = detail::cyclic_support(base, w, k);
    spec.coeffs = detail::draw_coefficients(seed, i, w, mode);
    spec.seed_tag = detail::seed_tag(seed, i);
    plan.specs.push_back(std::move(spec));

    if (active) {
      for (std::size_t d = 1; d < w; ++d) {
        const std::size_t block = (i + d) % k;
        ++plan.virtual_raw_transfers;
        tb.raw(e.worker_owner[block], e.worker_owner[i], block);
      }
    } else {
      tb.coded(e.worker_owner[base], e.worker_owner[i], i);
    }
  }
  plan.transfers = tb.take();
  return plan;
}

inline CodingPlan build_homogeneous_plan(std::size_t k, std::size_t s, std::uint64_t seed,
                                         CoefficientMode mode = CoefficientMode::kRandom) {
  detail::check_block_count(k);
  if (s >= k) {
    throw InvalidRoster("plan: s = " + std::to_string(s) + " must be smaller than k_A = " +
                        std::to_string(k));
  }
  return build_heterogeneous_plan(ClientRoster::homogeneous(k, s), seed, mode);
}

// Every worker combines all k blocks with i.i.d. coefficients.
inline CodingPlan build_dense_plan(const ClientRoster& roster, std::uint64_t seed) {
  const Expansion e = expand_heterogeneous(roster);
  CodingPlan plan;
  plan.scheme = Scheme::kDenseRandom;
  plan.k_bar = e.k_bar;
  plan.s_bar = e.s_bar;
  plan.seed = seed;
  plan.roster = roster;
  for (std::size_t i = 0; i < e.n_bar(); ++i) {
    CodedBlockSpec spec;
    spec.worker = i;
    spec.owner_client = e.worker_owner[i];
    spec.role = i < e.k_bar ? Role::kActive : Role::kPassive;
    spec.support = detail::cyclic_support(0, e.k_bar, e.k_bar);
    spec.coeffs = detail::draw_coefficients(seed, i, e.k_bar, CoefficientMode::kRandom);
    spec.seed_tag = detail::seed_tag(seed, i);
    plan.specs.push_back(std::move(spec));
  }
  detail::broadcast_raw_blocks(e, plan);
  return plan;
}

namespace detail {

inline void check_distinct(std::vector<double> points) {
  std::sort(points.begin(), points.end());
  if (std::adjacent_find(points.begin(), points.end()) != points.end()) {
    throw PlanError("poly plan: evaluation points must be pairwise distinct");
  }
}

// Row i of the generator is (1, x_i, x_i^2, ..., x_i^(k-1)).
inline CodedBlockSpec vandermonde_spec(std::size_t worker, std::size_t owner, Role role,
                                       double point, std::size_t k) {
  CodedBlockSpec spec{worker, owner, role, cyclic_support(0, k, k), {}, ""};
  double p = 1.0;
  for (std::size_t q = 0; q < k; ++q) {
    spec.coeffs.push_back(p);
    p *= point;
  }
  spec.seed_tag = "vandermonde/x=" + std::to_string(point);
  return spec;
}

}  // namespace detail

// Evaluation points default to 1, 2, ..., n.
inline CodingPlan build_polynomial_plan(const ClientRoster& roster,
                                        std::optional<std::vector<double>> points = std::nullopt) {
  const Expansion e = expand_heterogeneous(roster);
  std::vector<double> x;
  if (points) {
    x = *points;
  } else {
    for (std::size_t i = 0; i < e.n_bar(); ++i) x.push_back(static_cast<double>(i + 1));
  }
  if (x.size() != e.n_bar()) {
    throw PlanError("poly plan: " + std::to_string(x.size()) + " evaluation points for " +
                    std::to_string(e.n_bar()) + " workers");
  }
  detail::check_distinct(x);
  CodingPlan plan;
  plan.scheme = Scheme::kPolynomial;
  plan.k_bar = e.k_bar;
  plan.s_bar = e.s_bar;
  plan.roster = roster;
  for (std::size_t i = 0; i < e.n_bar(); ++i) {
    plan.specs.push_back(detail::vandermonde_spec(i, e.worker_owner[i],
                                                  i < e.k_bar ? Role::kActive : Role::kPassive,
                                                  x[i], e.k_bar));
  }
  detail::broadcast_raw_blocks(e, plan);
  return plan;
}

// Each active worker multiplies its own block; passive clients stay idle.
inline CodingPlan build_uncoded_plan(const ClientRoster& roster) {
  const Expansion e = expand_heterogeneous(roster);
  CodingPlan plan;
  plan.scheme = Scheme::kUncoded;
  plan.k_bar = e.k_bar;
  plan.s_bar = e.s_bar;
  plan.roster = roster;
  for (std::size_t i = 0; i < e.k_bar; ++i) {
    plan.specs.push_back({i, e.worker_owner[i], Role::kActive, {i}, {1.0}, "uncoded"});
  }
  return plan;
}

inline CodingPlan build_plan(Scheme scheme, const ClientRoster& roster, std::uint64_t seed) {
  switch (scheme) {
    case Scheme::kProposed: return build_heterogeneous_plan(roster, seed);
    case Scheme::kDenseRandom: return build_dense_plan(roster, seed);
    case Scheme::kPolynomial: return build_polynomial_plan(roster);
    case Scheme::kUncoded: return build_uncoded_plan(roster);
    case Scheme::kCustom: break;
  }
  throw PlanError("build_plan: custom plans must be constructed explicitly");
}

// Structural checks for plans that come from files or are assembled by hand.
inline void validate_plan(const CodingPlan& plan) {
  if (plan.k_bar == 0) throw PlanError("plan: k must be positive");
  for (std::size_t i = 0; i < plan.specs.size(); ++i) {
    const auto& s = plan.specs[i];
    if (s.worker != i) throw PlanError("plan: worker " + std::to_string(i) + " out of order");
    if (s.support.empty() || s.support.size() != s.coeffs.size()) {
      throw PlanError("plan: worker " + std::to_string(i) + " support/coefficient mismatch");
    }
    for (auto q : s.support) {
      if (q >= plan.k_bar) throw PlanError("plan: worker " + std::to_string(i) + " support out of range");
    }
    if (!plan.roster.clients.empty() && s.owner_client >= plan.roster.size()) {
      throw PlanError("plan: worker " + std::to_string(i) + " owned by unknown client");
    }
  }
}

}  // namespace cdmm
