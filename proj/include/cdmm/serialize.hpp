#pragma once

// JSON and CSV forms of plans and reports. The plan schema is documented in
// docs/formats.md; coefficients are written with full double precision so a
// stored plan decodes exactly like the in-memory one.

#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "cdmm/benchmark.hpp"
#include "cdmm/error.hpp"
#include "cdmm/plan.hpp"
#include "cdmm/resilience.hpp"
#include "cdmm/roster.hpp"
#include "cdmm/simulator.hpp"

namespace cdmm {

using Json = nlohmann::ordered_json;

inline constexpr const char* kPlanFormat = "cdmm.plan.v1";

// ---------------------------------------------------------------------------
// Roster and plan

inline Json roster_to_json(const ClientRoster& r) {
  Json clients = Json::array();
  for (const auto& c : r.clients) {
    clients.push_back({{"id", c.id}, {"role", to_string(c.role)}, {"type", c.type}, {"multiplier", c.multiplier}});
  }
  return {{"base_width", r.base_width}, {"base_speed", r.base_speed}, {"clients", clients}};
}

inline Role role_from_string(const std::string& s) {
  if (s == "active") return Role::kActive;
  if (s == "passive") return Role::kPassive;
  throw ParseError("unknown role '" + s + "'");
}

inline ClientRoster roster_from_json(const Json& j) {
  ClientRoster r;
  r.base_width = j.value("base_width", std::size_t{1});
  r.base_speed = j.value("base_speed", 1.0);
  for (const auto& c : j.at("clients")) {
    r.clients.push_back({c.at("id").get<std::size_t>(), role_from_string(c.at("role").get<std::string>()),
                         c.value("type", std::size_t{0}), c.value("multiplier", std::size_t{1})});
  }
  return r;
}

inline Json plan_to_json(const CodingPlan& plan) {
  Json workers = Json::array();
  for (const auto& s : plan.specs) {
    workers.push_back({{"worker", s.worker},
                       {"owner", s.owner_client},
                       {"role", to_string(s.role)},
                       {"support", s.support},
                       {"coeffs", s.coeffs},
                       {"seed_tag", s.seed_tag}});
  }
  Json transfers = Json::array();
  for (const auto& t : plan.transfers) {
    Json e{{"from", t.from_client}, {"to", t.to_client}};
    if (t.payload == Payload::kRawBlock) {
      e["payload"] = "raw";
      e["block"] = t.index;
    } else {
      e["payload"] = "coded";
      e["worker"] = t.index;
    }
    transfers.push_back(std::move(e));
  }
  return {{"format", kPlanFormat},
          {"scheme", to_string(plan.scheme)},
          {"k", plan.k_bar},
          {"s", plan.s_bar},
          {"weight", plan.weight()},
          {"seed", plan.seed},
          {"roster", roster_to_json(plan.roster)},
          {"workers", workers},
          {"transfers", transfers},
          {"virtual_raw_transfers", plan.virtual_raw_transfers}};
}

inline CodingPlan plan_from_json(const Json& j) {
  try {
    if (j.value("format", std::string{}) != kPlanFormat) {
      throw ParseError("plan: expected format '" + std::string(kPlanFormat) + "'");
    }
    CodingPlan plan;
    plan.scheme = scheme_from_string(j.at("scheme").get<std::string>());
    plan.k_bar = j.at("k").get<std::size_t>();
    plan.s_bar = j.at("s").get<std::size_t>();
    plan.seed = j.value("seed", std::uint64_t{0});
    plan.roster = roster_from_json(j.at("roster"));
    for (const auto& w : j.at("workers")) {
      CodedBlockSpec s;
      s.worker = w.at("worker").get<std::size_t>();
      s.owner_client = w.at("owner").get<std::size_t>();
      s.role = role_from_string(w.at("role").get<std::string>());
      s.support = w.at("support").get<std::vector<std::size_t>>();
      s.coeffs = w.at("coeffs").get<std::vector<double>>();
      s.seed_tag = w.value("seed_tag", std::string{});
      plan.specs.push_back(std::move(s));
    }
    for (const auto& t : j.at("transfers")) {
      Transfer tr;
      tr.from_client = t.at("from").get<std::size_t>();
      tr.to_client = t.at("to").get<std::size_t>();
      const auto kind = t.at("payload").get<std::string>();
      if (kind == "raw") {
        tr.payload = Payload::kRawBlock;
        tr.index = t.at("block").get<std::size_t>();
      } else if (kind == "coded") {
        tr.payload = Payload::kCodedBlock;
        tr.index = t.at("worker").get<std::size_t>();
      } else {
        throw ParseError("plan: unknown transfer payload '" + kind + "'");
      }
      plan.transfers.push_back(tr);
    }
    plan.virtual_raw_transfers = j.value("virtual_raw_transfers", std::size_t{0});
    validate_plan(plan);
    return plan;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("plan: ") + e.what());
  }
}

// Fig.-style allocation table: one line per physical client.
inline std::string allocation_table(const CodingPlan& plan) {
  std::ostringstream os;
  os << "scheme " << to_string(plan.scheme) << ": k=" << plan.k_bar << " s=" << plan.s_bar
     << " weight=" << plan.weight() << "\n";
  for (const auto& c : plan.roster.clients) {
    os << "W" << c.id << " (" << to_string(c.role) << ", type " << c.type << ", c=" << c.multiplier << "):";
    bool first = true;
    for (const auto& s : plan.specs) {
      if (s.owner_client != c.id) continue;
      os << " {";
      for (std::size_t j = 0; j < s.support.size(); ++j) os << (j ? "," : "") << "A" << s.support[j];
      os << "}";
      first = false;
    }
    if (first) os << " idle";
    os << "\n";
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Reports

inline Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

inline Json resilience_to_json(const ResilienceReport& r) {
  return {{"scheme", r.scheme},
          {"k", r.k_bar},
          {"s", r.s_bar},
          {"workers", r.workers},
          {"sampled", r.sampled},
          {"subsets_checked", r.subsets_checked},
          {"certified", r.certified()},
          {"failures", r.failures},
          {"matching_failures", r.matching_failures},
          {"neighborhood_checked", r.neighborhood_checked},
          {"neighborhood_violations", r.neighborhood_violations},
          {"min_condition", number_or_null(r.min_condition)},
          {"max_condition", number_or_null(r.max_condition)}};
}

inline Json patterns_to_json(const PatternReport& r) {
  Json groups = Json::array();
  for (const auto& g : r.groups) {
    groups.push_back({{"pattern", g.label},
                      {"type_counts", g.type_counts},
                      {"sets", g.sets},
                      {"tolerable_sets", g.tolerable_sets},
                      {"status", g.all_tolerable() ? "tolerable" : g.none_tolerable() ? "not tolerable" : "partial"},
                      {"removed_workers", {g.min_removed_workers, g.max_removed_workers}}});
  }
  return {{"k", r.k_bar},
          {"s", r.s_bar},
          {"types", r.type_count},
          {"maximal_tolerable", r.maximal_tolerable},
          {"over_budget_sets", r.over_budget_sets},
          {"over_budget_tolerable", r.over_budget_tolerable},
          {"groups", groups}};
}

inline Json privacy_to_json(const PrivacyExposure& p) {
  Json clients = Json::array();
  for (const auto& c : p.clients) {
    clients.push_back({{"client", c.client},
                       {"role", to_string(c.role)},
                       {"raw_blocks", c.raw_blocks},
                       {"coded_support_blocks", c.coded_blocks},
                       {"total_blocks", c.total_blocks},
                       {"raw_fraction", c.raw_fraction()},
                       {"coded_support_fraction", c.coded_support_fraction()}});
  }
  return {{"scheme", p.scheme}, {"clients", clients}};
}

// ---------------------------------------------------------------------------
// CSV

inline std::string fmt_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline constexpr const char* kRoundCsvHeader =
    "scheme,trial,k,s,raw_transfers,coded_transfers,virtual_raw_transfers,bytes_d2d,comm_delay,"
    "broadcast_delay,failed_clients,results_returned,completion_time,decoded,decode_residual,decode_error";

inline std::string round_csv_row(const SimReport& r, std::size_t trial) {
  std::ostringstream os;
  std::string failed;
  for (std::size_t i = 0; i < r.failed_clients.size(); ++i) failed += (i ? ";" : "") + std::to_string(r.failed_clients[i]);
  os << r.scheme << ',' << trial << ',' << r.k_bar << ',' << r.s_bar << ',' << r.raw_block_transfers << ','
     << r.coded_block_transfers << ',' << r.virtual_raw_transfers << ',' << fmt_double(r.total_bytes_d2d) << ','
     << fmt_double(r.comm_delay) << ',' << fmt_double(r.broadcast_delay) << ',' << failed << ','
     << r.arrivals.size() << ',' << fmt_double(r.completion_time) << ',' << (r.decoded ? 1 : 0) << ','
     << fmt_double(r.decode_residual) << ',' << fmt_double(r.decode_error);
  return os.str();
}

inline constexpr const char* kBenchmarkCsvHeader =
    "scheme,zero_fraction,workers_measured,mean_nnz,max_nnz,max_support_ratio";
inline constexpr const char* kBenchmarkTimingCsvHeader = "scheme,zero_fraction,workers_measured,median_ms";

inline std::string benchmark_csv_row(const BenchmarkRow& b) {
  return b.scheme + ',' + fmt_double(b.zero_fraction) + ',' + std::to_string(b.workers_measured) + ',' +
         fmt_double(b.mean_nnz) + ',' + std::to_string(b.max_nnz) + ',' + fmt_double(b.max_support_ratio);
}

inline std::string benchmark_timing_csv_row(const BenchmarkRow& b) {
  return b.scheme + ',' + fmt_double(b.zero_fraction) + ',' + std::to_string(b.workers_measured) + ',' +
         fmt_double(b.median_ms);
}

inline constexpr const char* kPrivacyCsvHeader =
    "scheme,client,role,raw_blocks,coded_support_blocks,total_blocks,raw_fraction,coded_support_fraction";

inline std::vector<std::string> privacy_csv_rows(const PrivacyExposure& p) {
  std::vector<std::string> rows;
  for (const auto& c : p.clients) {
    rows.push_back(p.scheme + ',' + std::to_string(c.client) + ',' + to_string(c.role) + ',' +
                   std::to_string(c.raw_blocks) + ',' + std::to_string(c.coded_blocks) + ',' +
                   std::to_string(c.total_blocks) + ',' + fmt_double(c.raw_fraction()) + ',' +
                   fmt_double(c.coded_support_fraction()));
  }
  return rows;
}

}  // namespace cdmm
