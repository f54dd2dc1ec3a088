#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "cdmm/error.hpp"

namespace cdmm {

enum class Role { kActive, kPassive };

inline const char* to_string(Role r) { return r == Role::kActive ? "active" : "passive"; }

struct Client {
  std::size_t id = 0;
  Role role = Role::kActive;
  std::size_t type = 0;
  // Generates and processes `multiplier` base blocks in one base time unit.
  std::size_t multiplier = 1;

  friend bool operator==(const Client&, const Client&) = default;
};

// Physical clients, active ones first. Client ids equal their position.
struct ClientRoster {
  std::vector<Client> clients;
  std::size_t base_width = 1;  // alpha: columns per base block
  double base_speed = 1.0;     // beta: columns per time unit for multiplier 1

  static ClientRoster homogeneous(std::size_t active, std::size_t passive) {
    ClientRoster r;
    for (std::size_t i = 0; i < active + passive; ++i) {
      r.clients.push_back({i, i < active ? Role::kActive : Role::kPassive, 0, 1});
    }
    return r;
  }

  // Builds a roster from per-client multipliers; the type of a client is taken
  // to be the rank of its multiplier among the distinct multipliers (the
  // smallest multiplier is type 0).
  static ClientRoster from_multipliers(const std::vector<std::size_t>& active,
                                       const std::vector<std::size_t>& passive) {
    std::map<std::size_t, std::size_t> type_of;
    for (auto c : active) type_of[c] = 0;
    for (auto c : passive) type_of[c] = 0;
    std::size_t t = 0;
    for (auto& [c, type] : type_of) type = t++;
    ClientRoster r;
    for (auto c : active) r.clients.push_back({r.clients.size(), Role::kActive, type_of[c], c});
    for (auto c : passive) r.clients.push_back({r.clients.size(), Role::kPassive, type_of[c], c});
    return r;
  }

  std::size_t size() const { return clients.size(); }

  std::size_t active_count() const {
    std::size_t n = 0;
    for (const auto& c : clients) n += c.role == Role::kActive;
    return n;
  }
  std::size_t passive_count() const { return size() - active_count(); }

  bool is_homogeneous() const {
    for (const auto& c : clients) {
      if (c.multiplier != 1) return false;
    }
    return true;
  }

  // Throws InvalidRoster naming the violated constraint.
  void validate() const {
    if (clients.empty()) throw InvalidRoster("roster: no clients");
    if (base_width == 0) throw InvalidRoster("roster: base width must be positive");
    if (!(base_speed > 0.0)) throw InvalidRoster("roster: base speed must be positive");
    bool seen_passive = false;
    for (std::size_t i = 0; i < clients.size(); ++i) {
      const auto& c = clients[i];
      if (c.id != i) throw InvalidRoster("roster: client ids must equal their position");
      if (c.multiplier == 0) {
        throw InvalidRoster("roster: client " + std::to_string(i) + " has multiplier 0");
      }
      if (c.role == Role::kPassive) {
        seen_passive = true;
      } else if (seen_passive) {
        throw InvalidRoster("roster: active clients must precede passive clients");
      }
      if (i > 0 && clients[i - 1].role == c.role && clients[i - 1].multiplier < c.multiplier) {
        throw InvalidRoster("roster: multipliers must be non-increasing within the " +
                            std::string(to_string(c.role)) + " clients (client " +
                            std::to_string(i) + ")");
      }
    }
    const std::size_t k = active_count();
    const std::size_t s = passive_count();
    if (k == 0) throw InvalidRoster("roster: at least one active client is required");
    if (s >= k) {
      throw InvalidRoster("roster: passive count s = " + std::to_string(s) +
                          " must be smaller than active count k_A = " + std::to_string(k));
    }
    std::map<std::size_t, std::pair<std::size_t, std::size_t>> per_type;  // active, passive
    for (const auto& c : clients) {
      auto& [a, p] = per_type[c.type];
      (c.role == Role::kActive ? a : p) += 1;
    }
    for (const auto& [type, counts] : per_type) {
      if (counts.second > 0 && counts.second >= counts.first) {
        throw InvalidRoster("roster: type " + std::to_string(type) + " has " +
                            std::to_string(counts.second) + " passive but only " +
                            std::to_string(counts.first) + " active clients");
      }
    }
  }

  friend bool operator==(const ClientRoster&, const ClientRoster&) = default;
};

// Virtual-worker view of a heterogeneous roster: a client with multiplier c
// stands for c consecutive weakest-type workers.
struct Expansion {
  std::size_t k_bar = 0;
  std::size_t s_bar = 0;
  std::vector<std::size_t> worker_owner;                 // size k_bar + s_bar
  std::vector<std::vector<std::size_t>> client_workers;  // indexed by client id

  std::size_t n_bar() const { return k_bar + s_bar; }
};

inline Expansion expand_heterogeneous(const ClientRoster& roster) {
  roster.validate();
  Expansion e;
  e.client_workers.resize(roster.size());
  for (const auto& c : roster.clients) (c.role == Role::kActive ? e.k_bar : e.s_bar) += c.multiplier;
  e.worker_owner.resize(e.k_bar + e.s_bar);
  std::size_t next_active = 0;
  std::size_t next_passive = e.k_bar;
  for (const auto& c : roster.clients) {
    std::size_t& next = c.role == Role::kActive ? next_active : next_passive;
    for (std::size_t j = 0; j < c.multiplier; ++j) {
      e.worker_owner[next] = c.id;
      e.client_workers[c.id].push_back(next);
      ++next;
    }
  }
  if (e.s_bar >= e.k_bar) {
    throw InvalidRoster("roster: expanded passive count " + std::to_string(e.s_bar) +
                        " must be smaller than expanded active count " + std::to_string(e.k_bar));
  }
  return e;
}

}  // namespace cdmm
