#pragma once

// Maximum bipartite matching by augmenting paths (Kuhn). The graphs here are
// equations versus block unknowns, a few dozen vertices at most.

#include <algorithm>
#include <cstddef>
#include <utility>
#include <vector>

namespace cdmm {

struct MatchingResult {
  bool perfect = false;
  std::size_t size = 0;
  // (left vertex, right vertex) pairs of one maximum matching.
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
};

namespace detail {
inline bool augment(std::size_t u, const std::vector<std::vector<std::size_t>>& adj,
                    std::vector<char>& visited, std::vector<std::size_t>& match_right) {
  for (std::size_t v : adj[u]) {
    if (visited[v]) continue;
    visited[v] = 1;
    if (match_right[v] == static_cast<std::size_t>(-1) || augment(match_right[v], adj, visited, match_right)) {
      match_right[v] = u;
      return true;
    }
  }
  return false;
}
}  // namespace detail

// `adj[u]` lists the right vertices adjacent to left vertex u. A matching is
// perfect when it saturates both sides (requires equal side sizes).
inline MatchingResult maximum_matching(const std::vector<std::vector<std::size_t>>& adj,
                                       std::size_t right_count) {
  constexpr auto kFree = static_cast<std::size_t>(-1);
  std::vector<std::size_t> match_right(right_count, kFree);
  std::vector<char> visited(right_count);
  MatchingResult r;
  for (std::size_t u = 0; u < adj.size(); ++u) {
    std::fill(visited.begin(), visited.end(), 0);
    if (detail::augment(u, adj, visited, match_right)) ++r.size;
  }
  for (std::size_t v = 0; v < right_count; ++v) {
    if (match_right[v] != kFree) r.pairs.emplace_back(match_right[v], v);
  }
  std::sort(r.pairs.begin(), r.pairs.end());
  r.perfect = adj.size() == right_count && r.size == right_count;
  return r;
}

}  // namespace cdmm
