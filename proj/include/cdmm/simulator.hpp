#pragma once

// One coded round between a server and D2D-connected clients: the data
// exchange dictated by the plan, per-client computation under a
// shifted-exponential straggling model, arrival order at the server, and the
// decode of the fastest k results. Also measures how much of A each client
// gets to see.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cdmm/decode.hpp"
#include "cdmm/encode.hpp"
#include "cdmm/error.hpp"
#include "cdmm/matrix.hpp"
#include "cdmm/partition.hpp"
#include "cdmm/plan.hpp"
#include "cdmm/random.hpp"
#include "cdmm/roster.hpp"

namespace cdmm {

struct ShiftedExponential {
  double shift = 0.0;
  double rate = 1.0;
};

struct TimingModel {
  // When false, every worker takes exactly alpha / (c * beta).
  bool noise = true;
  // Optional per-type override of the default shift alpha/(c beta) and rate 1/shift.
  std::map<std::size_t, ShiftedExponential> per_type;
  // Clients that never return a result this round.
  std::vector<std::size_t> failed_clients;
  // Independent failure probability applied to every other client.
  double failure_probability = 0.0;
};

struct CommModel {
  double link_latency = 0.0;          // per transfer
  double per_byte = 1e-8;             // time per payload byte on one link
  std::size_t bytes_per_element = 8;  // dense double payloads
  double broadcast_cost = 0.0;        // sending x to every client

  void validate() const {
    if (link_latency < 0.0 || per_byte < 0.0 || broadcast_cost < 0.0) {
      throw ConfigError("comm model: costs must be nonnegative");
    }
  }
};

// Geometry of one base block: t rows by alpha columns.
struct BlockShape {
  std::size_t rows = 1;
  std::size_t alpha = 1;
};

struct WorkerArrival {
  std::size_t worker = 0;
  std::size_t client = 0;
  double time = 0.0;
};

struct SimReport {
  std::string scheme;
  std::size_t k_bar = 0;
  std::size_t s_bar = 0;
  std::size_t raw_block_transfers = 0;
  std::size_t coded_block_transfers = 0;
  std::size_t virtual_raw_transfers = 0;
  double total_bytes_d2d = 0.0;
  double comm_delay = 0.0;
  double broadcast_delay = 0.0;
  std::vector<double> client_compute_time;  // busy time per client
  std::vector<std::size_t> failed_clients;
  std::vector<WorkerArrival> arrivals;  // sorted by time
  double completion_time = std::numeric_limits<double>::infinity();
  bool decoded = false;
  std::string decode_failure;
  double decode_residual = std::numeric_limits<double>::quiet_NaN();
  // Relative error of the decoded A^T x against the direct product, when data
  // was supplied.
  double decode_error = std::numeric_limits<double>::quiet_NaN();
  std::optional<DecodeResult> result;
};

// Delay of the D2D exchange: every client uploads its payloads one after the
// other, different clients transmit in parallel.
inline double d2d_delay(const CodingPlan& plan, const BlockShape& shape, const CommModel& comm) {
  comm.validate();
  const double bytes = static_cast<double>(shape.rows * shape.alpha * comm.bytes_per_element);
  std::map<std::size_t, double> per_sender;
  for (const auto& t : plan.transfers) per_sender[t.from_client] += comm.link_latency + bytes * comm.per_byte;
  double worst = 0.0;
  for (const auto& [client, time] : per_sender) worst = std::max(worst, time);
  return worst;
}

inline double d2d_bytes(const CodingPlan& plan, const BlockShape& shape, const CommModel& comm) {
  return static_cast<double>(plan.transfers.size()) *
         static_cast<double>(shape.rows * shape.alpha * comm.bytes_per_element);
}

// Matrix data for a round that decodes real products.
template <BlockMatrix M>
struct RoundData {
  const PartitionedMatrix<M>* blocks = nullptr;
  const EncodedWorkload<M>* encoded = nullptr;
  const Vector* x = nullptr;
};

namespace detail {

inline std::vector<char> draw_failures(const ClientRoster& roster, const TimingModel& timing,
                                       Rng& rng) {
  std::vector<char> failed(roster.size(), 0);
  for (auto c : timing.failed_clients) {
    if (c >= roster.size()) throw ConfigError("timing: failed client " + std::to_string(c) + " unknown");
    failed[c] = 1;
  }
  if (timing.failure_probability > 0.0) {
    for (std::size_t c = 0; c < roster.size(); ++c) {
      if (uniform01(rng) < timing.failure_probability) failed[c] = 1;
    }
  }
  return failed;
}

inline double worker_time(const Client& client, const ClientRoster& roster, std::size_t alpha,
                          const TimingModel& timing, Rng& rng) {
  const double base = static_cast<double>(alpha) /
                      (static_cast<double>(client.multiplier) * roster.base_speed);
  ShiftedExponential d{base, 1.0 / base};
  if (auto it = timing.per_type.find(client.type); it != timing.per_type.end()) d = it->second;
  if (!timing.noise) return d.shift;
  return d.shift + draw_exponential(rng, d.rate);
}

}  // namespace detail

template <BlockMatrix M = DenseMatrix>
SimReport simulate_round(const CodingPlan& plan, const BlockShape& shape, const TimingModel& timing,
                         const CommModel& comm, std::uint64_t seed, std::uint64_t round = 0,
                         RoundData<M> data = {}) {
  validate_plan(plan);
  const ClientRoster& roster = plan.roster;
  roster.validate();

  SimReport rep;
  rep.scheme = to_string(plan.scheme);
  rep.k_bar = plan.k_bar;
  rep.s_bar = plan.s_bar;
  rep.raw_block_transfers = plan.raw_transfer_count();
  rep.coded_block_transfers = plan.coded_transfer_count();
  rep.virtual_raw_transfers = plan.virtual_raw_transfers;
  rep.total_bytes_d2d = d2d_bytes(plan, shape, comm);
  rep.comm_delay = d2d_delay(plan, shape, comm);
  rep.broadcast_delay = comm.broadcast_cost;

  auto fail_rng = make_stream(seed, StreamTag::kStragglers, round);
  const auto failed = detail::draw_failures(roster, timing, fail_rng);
  for (std::size_t c = 0; c < roster.size(); ++c) {
    if (failed[c]) rep.failed_clients.push_back(c);
  }

  // Each client processes its virtual workers back to back, in worker order.
  const double start = rep.comm_delay + rep.broadcast_delay;
  rep.client_compute_time.assign(roster.size(), 0.0);
  for (const auto& spec : plan.specs) {
    const Client& client = roster.clients.at(spec.owner_client);
    auto rng = make_stream(seed, StreamTag::kTiming, (round << 20) ^ spec.worker);
    const double dt = detail::worker_time(client, roster, shape.alpha, timing, rng);
    rep.client_compute_time[client.id] += dt;
    if (!failed[client.id]) {
      rep.arrivals.push_back({spec.worker, client.id, start + rep.client_compute_time[client.id]});
    }
  }
  std::stable_sort(rep.arrivals.begin(), rep.arrivals.end(),
                   [](const WorkerArrival& a, const WorkerArrival& b) { return a.time < b.time; });

  const std::size_t k = plan.k_bar;
  if (rep.arrivals.size() < k) {
    rep.decode_failure = "not enough results: " + std::to_string(rep.arrivals.size()) + " of " +
                         std::to_string(k) + " needed";
    return rep;
  }
  rep.completion_time = rep.arrivals[k - 1].time;

  DecodeProblem problem;
  problem.k_bar = k;
  for (std::size_t i = 0; i < k; ++i) {
    const auto w = rep.arrivals[i].worker;
    ReturnedProduct r;
    r.worker = w;
    r.coefficients = plan.coefficient_row(w);
    if (data.encoded) {
      r.product = matvec_t(data.encoded->coded.at(w), *data.x);
    } else {
      // Coefficient-only round: decode the generator rows against themselves.
      r.product = r.coefficients;
    }
    problem.returned.push_back(std::move(r));
  }
  try {
    auto result = decode(problem);
    rep.decoded = true;
    rep.decode_residual = result.residual;
    if (data.blocks && data.x) {
      Vector direct;
      for (const auto& b : data.blocks->blocks()) {
        const auto part = matvec_t(b, *data.x);
        direct.insert(direct.end(), part.begin(), part.end());
      }
      rep.decode_error = relative_error(result.concatenated(), direct);
    }
    rep.result = std::move(result);
  } catch (const Error& e) {
    rep.decode_failure = e.what();
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Privacy exposure

struct ClientExposure {
  std::size_t client = 0;
  Role role = Role::kActive;
  std::size_t raw_blocks = 0;    // base blocks seen uncoded
  std::size_t coded_blocks = 0;  // base blocks appearing in any coded block handled
  std::size_t total_blocks = 0;

  double raw_fraction() const { return static_cast<double>(raw_blocks) / static_cast<double>(total_blocks); }
  double coded_support_fraction() const {
    return static_cast<double>(coded_blocks) / static_cast<double>(total_blocks);
  }
};

struct PrivacyExposure {
  std::string scheme;
  std::vector<ClientExposure> clients;
};

// All base blocks have the same width, so block counts over k are exact
// column fractions.
inline PrivacyExposure privacy_report(const CodingPlan& plan) {
  validate_plan(plan);
  const Expansion e = expand_heterogeneous(plan.roster);
  const std::size_t n = plan.roster.size();
  std::vector<std::set<std::size_t>> raw(n), coded(n);
  for (std::size_t w = 0; w < std::min(e.k_bar, e.worker_owner.size()); ++w) raw[e.worker_owner[w]].insert(w);
  for (const auto& t : plan.transfers) {
    if (t.payload == Payload::kRawBlock) {
      raw.at(t.to_client).insert(t.index);
    } else {
      const auto& sup = plan.specs.at(t.index).support;
      coded.at(t.to_client).insert(sup.begin(), sup.end());
      coded.at(t.from_client).insert(sup.begin(), sup.end());
    }
  }
  for (const auto& spec : plan.specs) coded.at(spec.owner_client).insert(spec.support.begin(), spec.support.end());

  PrivacyExposure out;
  out.scheme = to_string(plan.scheme);
  for (std::size_t c = 0; c < n; ++c) {
    coded[c].insert(raw[c].begin(), raw[c].end());
    out.clients.push_back({c, plan.roster.clients[c].role, raw[c].size(), coded[c].size(), plan.k_bar});
  }
  return out;
}

}  // namespace cdmm
