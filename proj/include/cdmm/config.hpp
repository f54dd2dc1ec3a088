#pragma once

// Experiment configuration: one JSON document, validated in full before any
// run starts. Every rejected field raises ConfigError naming the field.

#include <cstddef>
#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "cdmm/error.hpp"
#include "cdmm/plan.hpp"
#include "cdmm/roster.hpp"
#include "cdmm/simulator.hpp"

namespace cdmm {

struct MatrixSource {
  enum class Kind { kSynthetic, kFile } kind = Kind::kSynthetic;
  std::string path;            // file source: .mtx (Matrix Market) or .csv
  double zero_fraction = 0.0;  // synthetic source
  std::uint64_t seed = 7;
};

struct BenchmarkConfig {
  std::size_t rows = 40000;
  std::size_t block_cols = 1125;
  std::vector<double> zero_fractions{0.99, 0.98, 0.95};
  std::size_t trials = 11;
  std::size_t warmup = 2;
  std::size_t max_workers = 0;
};

struct FlDemoSettings {
  std::size_t rows = 60;
  std::size_t cols = 21;
  std::size_t steps = 100;
  double stepsize = 0.0;  // 0 picks 0.5 / L
  std::size_t stragglers_per_round = 2;
  double noise = 0.1;  // observation noise of the synthetic targets
  std::string data_path;  // optional CSV: last column is y
  bool check = false;
};

struct ExperimentConfig {
  std::vector<Scheme> schemes{Scheme::kProposed};
  std::vector<std::size_t> active_multipliers;
  std::vector<std::size_t> passive_multipliers;
  std::optional<std::vector<std::size_t>> types;  // explicit per-client types
  double base_speed = 1.0;
  std::size_t rows = 1200;       // t, before scaling
  std::size_t block_cols = 100;  // alpha
  std::optional<MatrixSource> matrix;
  TimingModel timing;
  CommModel comm;
  std::size_t trials = 1;
  std::uint64_t seed = 1;
  std::size_t scale = 10;
  std::optional<BenchmarkConfig> benchmark;
  FlDemoSettings fl;
  std::string output = "out";
  bool required_success = false;

  std::size_t scaled(std::size_t rows_in) const { return std::max<std::size_t>(1, rows_in / scale); }

  ClientRoster roster() const {
    auto r = ClientRoster::from_multipliers(active_multipliers, passive_multipliers);
    if (types) {
      if (types->size() != r.size()) {
        throw ConfigError("roster.types: " + std::to_string(types->size()) + " entries for " +
                          std::to_string(r.size()) + " clients");
      }
      for (std::size_t i = 0; i < r.size(); ++i) r.clients[i].type = (*types)[i];
    }
    r.base_width = block_cols;
    r.base_speed = base_speed;
    return r;
  }

  // Checks every field; throws ConfigError on the first violation.
  void validate() const {
    if (schemes.empty()) throw ConfigError("schemes: at least one scheme is required");
    if (active_multipliers.empty()) throw ConfigError("roster: at least one active client is required");
    if (scale == 0) throw ConfigError("scale: must be at least 1");
    if (rows == 0) throw ConfigError("shape.rows: must be positive");
    if (block_cols == 0) throw ConfigError("shape.block_cols: must be positive");
    if (!(base_speed > 0.0)) throw ConfigError("roster.base_speed: must be positive");
    if (timing.failure_probability < 0.0 || timing.failure_probability > 1.0) {
      throw ConfigError("timing.failure_probability: must lie in [0, 1]");
    }
    try {
      comm.validate();
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("comm: ") + e.what());
    }
    try {
      roster().validate();
    } catch (const InvalidRoster& e) {
      throw ConfigError(std::string(e.what()) +
                        " (the model requires fewer passive than active clients, per type)");
    }
    for (auto c : timing.failed_clients) {
      if (c >= active_multipliers.size() + passive_multipliers.size()) {
        throw ConfigError("timing.failed_clients: client " + std::to_string(c) + " does not exist");
      }
    }
    if (matrix && matrix->kind == MatrixSource::Kind::kSynthetic &&
        (matrix->zero_fraction < 0.0 || matrix->zero_fraction > 1.0)) {
      throw ConfigError("matrix.zero_fraction: must lie in [0, 1]");
    }
    if (matrix && matrix->kind == MatrixSource::Kind::kFile && matrix->path.empty()) {
      throw ConfigError("matrix.path: required for file sources");
    }
    if (benchmark) {
      if (benchmark->rows == 0 || benchmark->block_cols == 0) {
        throw ConfigError("benchmark: rows and block_cols must be positive");
      }
      for (double z : benchmark->zero_fractions) {
        if (z < 0.0 || z > 1.0) throw ConfigError("benchmark.zero_fractions: values must lie in [0, 1]");
      }
    }
    if (fl.rows == 0 || fl.cols == 0) throw ConfigError("fl_demo: rows and cols must be positive");
    if (fl.stepsize < 0.0) throw ConfigError("fl_demo.stepsize: must be nonnegative");
  }
};

namespace detail {

template <typename T>
T field(const nlohmann::json& j, const char* key, const T& fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(where + "." + key + ": wrong type");
  }
}

inline std::vector<std::size_t> parse_multiplier_list(const std::string& text, const std::string& name) {
  std::vector<std::size_t> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto next = text.find(',', pos);
    const auto item = text.substr(pos, next == std::string::npos ? std::string::npos : next - pos);
    try {
      std::size_t used = 0;
      const long v = std::stol(item, &used);
      if (used != item.size() || v <= 0) throw std::invalid_argument(item);
      out.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      throw ConfigError(name + ": '" + item + "' is not a positive integer");
    }
    if (next == std::string::npos) break;
    pos = next + 1;
  }
  return out;
}

}  // namespace detail

// "2,2,1,1,1|1,1": active multipliers, then passive multipliers.
inline std::pair<std::vector<std::size_t>, std::vector<std::size_t>> parse_roster_spec(const std::string& text) {
  const auto bar = text.find('|');
  auto active = detail::parse_multiplier_list(text.substr(0, bar), "roster.active");
  std::vector<std::size_t> passive;
  if (bar != std::string::npos && bar + 1 < text.size()) {
    passive = detail::parse_multiplier_list(text.substr(bar + 1), "roster.passive");
  }
  return {active, passive};
}

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  using detail::field;
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  ExperimentConfig c;
  if (j.contains("schemes")) {
    c.schemes.clear();
    for (const auto& s : j.at("schemes")) {
      if (!s.is_string()) throw ConfigError("schemes: entries must be strings");
      c.schemes.push_back(scheme_from_string(s.get<std::string>()));
    }
  }
  if (!j.contains("roster")) throw ConfigError("roster: missing");
  const auto& r = j.at("roster");
  if (r.contains("active")) {
    c.active_multipliers = field<std::vector<std::size_t>>(r, "active", {}, "roster");
    c.passive_multipliers = field<std::vector<std::size_t>>(r, "passive", {}, "roster");
  } else {
    if (!r.contains("k")) throw ConfigError("roster.k: missing (or give roster.active)");
    const auto k = field<std::size_t>(r, "k", 0, "roster");
    const auto s = field<std::size_t>(r, "s", 0, "roster");
    c.active_multipliers.assign(k, 1);
    c.passive_multipliers.assign(s, 1);
  }
  if (r.contains("types")) c.types = field<std::vector<std::size_t>>(r, "types", {}, "roster");
  c.base_speed = field<double>(r, "base_speed", c.base_speed, "roster");

  if (j.contains("shape")) {
    const auto& s = j.at("shape");
    c.rows = field<std::size_t>(s, "rows", c.rows, "shape");
    c.block_cols = field<std::size_t>(s, "block_cols", c.block_cols, "shape");
  }
  if (j.contains("matrix")) {
    const auto& m = j.at("matrix");
    MatrixSource src;
    const auto kind = field<std::string>(m, "source", "synthetic", "matrix");
    if (kind == "synthetic") {
      src.kind = MatrixSource::Kind::kSynthetic;
    } else if (kind == "file") {
      src.kind = MatrixSource::Kind::kFile;
    } else {
      throw ConfigError("matrix.source: expected 'synthetic' or 'file'");
    }
    src.path = field<std::string>(m, "path", "", "matrix");
    src.zero_fraction = field<double>(m, "zero_fraction", 0.0, "matrix");
    src.seed = field<std::uint64_t>(m, "seed", src.seed, "matrix");
    c.matrix = src;
  }
  if (j.contains("timing")) {
    const auto& t = j.at("timing");
    c.timing.noise = field<bool>(t, "noise", true, "timing");
    c.timing.failure_probability = field<double>(t, "failure_probability", 0.0, "timing");
    c.timing.failed_clients = field<std::vector<std::size_t>>(t, "failed_clients", {}, "timing");
    if (t.contains("per_type")) {
      for (const auto& [key, v] : t.at("per_type").items()) {
        ShiftedExponential d;
        d.shift = field<double>(v, "shift", 0.0, "timing.per_type");
        d.rate = field<double>(v, "rate", 1.0, "timing.per_type");
        if (d.shift < 0.0 || !(d.rate > 0.0)) throw ConfigError("timing.per_type." + key + ": shift >= 0, rate > 0");
        try {
          c.timing.per_type[std::stoul(key)] = d;
        } catch (const std::exception&) {
          throw ConfigError("timing.per_type: key '" + key + "' is not a type index");
        }
      }
    }
  }
  if (j.contains("comm")) {
    const auto& m = j.at("comm");
    c.comm.link_latency = field<double>(m, "link_latency", c.comm.link_latency, "comm");
    c.comm.per_byte = field<double>(m, "per_byte", c.comm.per_byte, "comm");
    c.comm.bytes_per_element = field<std::size_t>(m, "bytes_per_element", c.comm.bytes_per_element, "comm");
    c.comm.broadcast_cost = field<double>(m, "broadcast_cost", c.comm.broadcast_cost, "comm");
  }
  c.trials = field<std::size_t>(j, "trials", c.trials, "config");
  c.seed = field<std::uint64_t>(j, "seed", c.seed, "config");
  c.scale = field<std::size_t>(j, "scale", c.scale, "config");
  c.output = field<std::string>(j, "output", c.output, "config");
  c.required_success = field<bool>(j, "required_success", false, "config");
  if (j.contains("benchmark")) {
    const auto& b = j.at("benchmark");
    BenchmarkConfig bc;
    bc.rows = field<std::size_t>(b, "rows", bc.rows, "benchmark");
    bc.block_cols = field<std::size_t>(b, "block_cols", bc.block_cols, "benchmark");
    bc.zero_fractions = field<std::vector<double>>(b, "zero_fractions", bc.zero_fractions, "benchmark");
    bc.trials = field<std::size_t>(b, "trials", bc.trials, "benchmark");
    bc.warmup = field<std::size_t>(b, "warmup", bc.warmup, "benchmark");
    bc.max_workers = field<std::size_t>(b, "max_workers", bc.max_workers, "benchmark");
    c.benchmark = bc;
  }
  if (j.contains("fl_demo")) {
    const auto& f = j.at("fl_demo");
    c.fl.rows = field<std::size_t>(f, "rows", c.fl.rows, "fl_demo");
    c.fl.cols = field<std::size_t>(f, "cols", c.fl.cols, "fl_demo");
    c.fl.steps = field<std::size_t>(f, "steps", c.fl.steps, "fl_demo");
    c.fl.stepsize = field<double>(f, "stepsize", c.fl.stepsize, "fl_demo");
    c.fl.stragglers_per_round = field<std::size_t>(f, "stragglers_per_round", c.fl.stragglers_per_round, "fl_demo");
    c.fl.noise = field<double>(f, "noise", c.fl.noise, "fl_demo");
    c.fl.data_path = field<std::string>(f, "data", c.fl.data_path, "fl_demo");
    c.fl.check = field<bool>(f, "check", c.fl.check, "fl_demo");
  }
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  return config_from_json(j);
}

// 64-bit FNV-1a, used to fingerprint configurations in run manifests.
inline std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace cdmm
