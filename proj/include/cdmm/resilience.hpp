#pragma once

// Certification of straggler resilience: exhaustive rank checks over every
// k-subset of coded rows, Hall-condition matchings, the neighborhood lower
// bound used by the proof, and straggler patterns of physical clients.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "cdmm/error.hpp"
#include "cdmm/linsolve.hpp"
#include "cdmm/matching.hpp"
#include "cdmm/plan.hpp"
#include "cdmm/random.hpp"
#include "cdmm/roster.hpp"

namespace cdmm {

inline constexpr std::uint64_t kExhaustiveSubsetGuard = 1'000'000;

// Binomial coefficient saturating at uint64 max.
inline std::uint64_t choose(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  long double r = 1.0L;
  for (std::uint64_t i = 1; i <= k; ++i) r = r * static_cast<long double>(n - k + i) / i;
  const long double cap = static_cast<long double>(std::numeric_limits<std::uint64_t>::max());
  return r >= cap ? std::numeric_limits<std::uint64_t>::max()
                  : static_cast<std::uint64_t>(std::llround(r));
}

// Advances `idx` (strictly increasing, values < n) to the next combination in
// lexicographic order; returns false after the last one.
inline bool next_combination(std::vector<std::size_t>& idx, std::size_t n) {
  const std::size_t k = idx.size();
  for (std::size_t i = k; i-- > 0;) {
    if (idx[i] < n - k + i) {
      ++idx[i];
      for (std::size_t j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
      return true;
    }
  }
  return false;
}

// Calls f(subset) for every k-subset of {0..n-1}.
template <typename F>
void for_each_subset(std::size_t n, std::size_t k, F&& f) {
  if (k > n) return;
  std::vector<std::size_t> idx(k);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  do {
    f(static_cast<const std::vector<std::size_t>&>(idx));
  } while (k > 0 && next_combination(idx, n));
}

// ---------------------------------------------------------------------------
// Hall condition

inline MatchingResult check_hall_condition(const CodingPlan& plan,
                                           const std::vector<std::size_t>& subset) {
  if (subset.size() != plan.k_bar) {
    throw DimensionError("check_hall_condition: subset must contain exactly k workers");
  }
  std::vector<std::vector<std::size_t>> adj;
  adj.reserve(subset.size());
  for (auto w : subset) {
    auto support = plan.specs.at(w).support;
    std::sort(support.begin(), support.end());
    support.erase(std::unique(support.begin(), support.end()), support.end());
    adj.push_back(std::move(support));
  }
  auto m = maximum_matching(adj, plan.k_bar);
  for (auto& [left, right] : m.pairs) left = subset[left];
  return m;
}

// ---------------------------------------------------------------------------
// Neighborhood bound

// Lower bound on the number of distinct unknowns touched by any m equations of
// the cyclic scheme with k blocks and s passive workers.
inline std::size_t neighborhood_lower_bound(std::size_t k, std::size_t s, std::size_t m) {
  if (m < 1 || m > k) {
    throw DimensionError("neighborhood_lower_bound: m = " + std::to_string(m) +
                         " outside [1, " + std::to_string(k) + "]");
  }
  const std::size_t weight = s + 1;
  if (m <= 2 * s) return std::min(weight + (m + 1) / 2 - 1, k);
  const std::size_t q = m - 2 * s;
  return std::min(weight + s + q - 1, k);
}

// For each size m = 1..|subset|, the smallest |N(C)| over all C within
// `subset` of that size. Exhaustive over 2^|subset| - 1 sets.
inline std::vector<std::size_t> min_neighborhoods(const CodingPlan& plan,
                                                  const std::vector<std::size_t>& subset) {
  if (plan.k_bar > 64) throw GuardExceeded("min_neighborhoods: more than 64 unknowns");
  if (subset.size() > 24) throw GuardExceeded("min_neighborhoods: subset larger than 24 workers");
  std::vector<std::uint64_t> masks;
  for (auto w : subset) {
    std::uint64_t m = 0;
    for (auto q : plan.specs.at(w).support) m |= std::uint64_t{1} << q;
    masks.push_back(m);
  }
  const std::size_t n = subset.size();
  std::vector<std::size_t> best(n + 1, std::numeric_limits<std::size_t>::max());
  // unions[c] extends the union of c without its lowest bit.
  std::vector<std::uint64_t> unions(std::size_t{1} << n, 0);
  for (std::uint64_t c = 1; c < (std::uint64_t{1} << n); ++c) {
    const int low = std::countr_zero(c);
    unions[c] = unions[c & (c - 1)] | masks[static_cast<std::size_t>(low)];
    const auto size = static_cast<std::size_t>(std::popcount(c));
    best[size] = std::min(best[size], static_cast<std::size_t>(std::popcount(unions[c])));
  }
  best.erase(best.begin());
  return best;
}

// ---------------------------------------------------------------------------
// Exhaustive subset rank

struct ResilienceReport {
  std::string scheme;
  std::size_t k_bar = 0;
  std::size_t s_bar = 0;
  std::size_t workers = 0;
  bool sampled = false;
  std::uint64_t subsets_checked = 0;
  std::vector<std::vector<std::size_t>> failures;           // numerically singular
  std::vector<std::vector<std::size_t>> matching_failures;  // no perfect matching
  std::uint64_t neighborhood_violations = 0;
  bool neighborhood_checked = false;
  double min_condition = std::numeric_limits<double>::infinity();
  double max_condition = 0.0;

  bool certified() const {
    return failures.empty() && matching_failures.empty() && neighborhood_violations == 0;
  }
};

struct SubsetCheckOptions {
  bool sampled = false;
  std::uint64_t samples = 10'000;
  std::uint64_t guard = kExhaustiveSubsetGuard;
  bool check_matching = true;
  // Only meaningful for the cyclic scheme; costs 2^k per subset.
  bool check_neighborhood = false;
};

inline ResilienceReport check_all_subsets(const CodingPlan& plan, std::uint64_t seed = 0,
                                          const SubsetCheckOptions& opt = {}) {
  validate_plan(plan);
  const std::size_t n = plan.worker_count();
  const std::size_t k = plan.k_bar;
  ResilienceReport rep;
  rep.scheme = to_string(plan.scheme);
  rep.k_bar = k;
  rep.s_bar = plan.s_bar;
  rep.workers = n;
  rep.neighborhood_checked = opt.check_neighborhood;
  if (n < k) {
    rep.failures.push_back({});
    return rep;
  }
  const DenseMatrix g = plan.coefficient_matrix();

  auto check = [&](const std::vector<std::size_t>& subset) {
    ++rep.subsets_checked;
    const double cond = condition_number(select_rows(g, subset));
    if (std::isinf(cond)) {
      rep.failures.push_back(subset);
    } else {
      rep.min_condition = std::min(rep.min_condition, cond);
      rep.max_condition = std::max(rep.max_condition, cond);
    }
    if (opt.check_matching && !check_hall_condition(plan, subset).perfect) {
      rep.matching_failures.push_back(subset);
    }
    if (opt.check_neighborhood) {
      const auto mins = min_neighborhoods(plan, subset);
      for (std::size_t m = 1; m <= mins.size(); ++m) {
        if (mins[m - 1] < neighborhood_lower_bound(k, plan.s_bar, m)) ++rep.neighborhood_violations;
      }
    }
  };

  const std::uint64_t total = choose(n, k);
  if (total <= opt.guard && !opt.sampled) {
    for_each_subset(n, k, check);
    return rep;
  }
  if (!opt.sampled) {
    throw GuardExceeded("check_all_subsets: " + std::to_string(total) +
                        " subsets exceed the exhaustive guard; use sampled mode");
  }
  rep.sampled = true;
  auto rng = make_stream(seed, StreamTag::kStragglers, 0x5ab5e7);
  std::vector<std::size_t> pool(n);
  for (std::uint64_t t = 0; t < opt.samples; ++t) {
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(draw_index(rng, n - i));
      std::swap(pool[i], pool[j]);
    }
    std::vector<std::size_t> subset(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k));
    std::sort(subset.begin(), subset.end());
    check(subset);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Straggler patterns over physical clients

struct PatternGroup {
  std::vector<std::size_t> type_counts;  // stragglers per client type
  std::string label;
  std::size_t sets = 0;
  std::size_t tolerable_sets = 0;
  std::size_t min_removed_workers = 0;
  std::size_t max_removed_workers = 0;

  bool all_tolerable() const { return tolerable_sets == sets; }
  bool none_tolerable() const { return tolerable_sets == 0; }
};

struct PatternReport {
  std::size_t k_bar = 0;
  std::size_t s_bar = 0;
  std::size_t type_count = 0;
  std::vector<PatternGroup> groups;  // ordered by total stragglers, then label
  // Fully tolerable groups not dominated by another fully tolerable group.
  std::vector<std::string> maximal_tolerable;
  // Straggler sets that remove more than s_bar workers yet were tolerable.
  std::size_t over_budget_tolerable = 0;
  std::size_t over_budget_sets = 0;
};

inline std::string pattern_label(const std::vector<std::size_t>& type_counts) {
  std::string s;
  for (std::size_t t = 0; t < type_counts.size(); ++t) {
    if (type_counts[t] == 0) continue;
    if (!s.empty()) s += " + ";
    s += std::to_string(type_counts[t]) + "x type-" + std::to_string(t);
  }
  return s.empty() ? "none" : s;
}

// A straggler set is tolerable when the surviving workers still hold a
// full-rank set of k coefficient rows.
inline bool tolerates(const CodingPlan& plan, const DenseMatrix& g,
                      const std::vector<char>& failed_client) {
  std::vector<std::size_t> rows;
  for (std::size_t w = 0; w < plan.worker_count(); ++w) {
    if (!failed_client[plan.specs[w].owner_client]) rows.push_back(w);
  }
  if (rows.size() < plan.k_bar) return false;
  return numerical_rank(select_rows(g, rows)) == plan.k_bar;
}

inline PatternReport resilience_patterns(const ClientRoster& roster, const CodingPlan& plan) {
  roster.validate();
  validate_plan(plan);
  const std::size_t n = roster.size();
  if (n > 24) throw GuardExceeded("resilience_patterns: more than 24 physical clients");
  std::size_t types = 0;
  for (const auto& c : roster.clients) types = std::max(types, c.type + 1);

  std::vector<std::size_t> workers_of(n, 0);
  for (const auto& spec : plan.specs) ++workers_of.at(spec.owner_client);

  const DenseMatrix g = plan.coefficient_matrix();
  PatternReport rep;
  rep.k_bar = plan.k_bar;
  rep.s_bar = plan.s_bar;
  rep.type_count = types;
  std::map<std::vector<std::size_t>, PatternGroup> groups;
  std::vector<char> failed(n);
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    std::vector<std::size_t> counts(types, 0);
    std::size_t removed = 0;
    for (std::size_t c = 0; c < n; ++c) {
      failed[c] = static_cast<char>((mask >> c) & 1U);
      if (failed[c]) {
        ++counts[roster.clients[c].type];
        removed += workers_of[c];
      }
    }
    const bool ok = tolerates(plan, g, failed);
    auto [it, inserted] = groups.try_emplace(counts);
    auto& grp = it->second;
    if (inserted) {
      grp.type_counts = counts;
      grp.label = pattern_label(counts);
      grp.min_removed_workers = removed;
      grp.max_removed_workers = removed;
    }
    ++grp.sets;
    grp.tolerable_sets += ok;
    grp.min_removed_workers = std::min(grp.min_removed_workers, removed);
    grp.max_removed_workers = std::max(grp.max_removed_workers, removed);
    if (removed > plan.s_bar) {
      ++rep.over_budget_sets;
      rep.over_budget_tolerable += ok;
    }
  }

  for (auto& [counts, grp] : groups) rep.groups.push_back(grp);
  std::stable_sort(rep.groups.begin(), rep.groups.end(), [](const PatternGroup& a, const PatternGroup& b) {
    const auto ta = std::accumulate(a.type_counts.begin(), a.type_counts.end(), std::size_t{0});
    const auto tb = std::accumulate(b.type_counts.begin(), b.type_counts.end(), std::size_t{0});
    return ta < tb;
  });

  auto dominates = [](const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
    bool strict = false;
    for (std::size_t t = 0; t < a.size(); ++t) {
      if (a[t] < b[t]) return false;
      strict |= a[t] > b[t];
    }
    return strict;
  };
  for (const auto& a : rep.groups) {
    if (!a.all_tolerable()) continue;
    bool maximal = true;
    for (const auto& b : rep.groups) {
      if (b.all_tolerable() && dominates(b.type_counts, a.type_counts)) {
        maximal = false;
        break;
      }
    }
    if (maximal) rep.maximal_tolerable.push_back(a.label);
  }
  return rep;
}

}  // namespace cdmm
