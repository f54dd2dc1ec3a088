// cdmm: plan, verify, simulate and fl-demo front end.
//
// Exit codes: 0 success, 2 configuration error, 3 verification failure,
// 4 decode failure when success is required.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "cdmm/cdmm.hpp"
#include "cdmm/config.hpp"

namespace fs = std::filesystem;
using cdmm::Json;

namespace {

constexpr const char* kVersion = "1.0.0";

enum ExitCode { kOk = 0, kConfigError = 2, kVerifyFailure = 3, kDecodeFailure = 4 };

struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::size_t> scale;
  std::optional<std::string> scheme;
  std::optional<std::string> roster;  // "k,s" shorthand is --k/--s
  std::optional<std::size_t> k;
  std::optional<std::size_t> s;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config_path, "Experiment configuration (JSON)");
  cmd->add_option("--seed", f.seed, "Root seed");
  cmd->add_option("--out", f.out, "Output directory");
  cmd->add_option("--scale", f.scale, "Divide matrix row counts by this factor");
  cmd->add_option("--scheme", f.scheme, "proposed | dense | poly | uncoded");
  cmd->add_option("--k", f.k, "Active clients (homogeneous roster)");
  cmd->add_option("--s", f.s, "Passive clients (homogeneous roster)");
  cmd->add_option("--roster", f.roster, "Multipliers 'active|passive', e.g. 2,2,1,1,1|1,1");
}

cdmm::ExperimentConfig resolve_config(const CommonFlags& f) {
  cdmm::ExperimentConfig c;
  if (!f.config_path.empty()) {
    c = cdmm::load_config(f.config_path);
  } else if (!f.k && !f.roster) {
    throw cdmm::ConfigError("no roster: pass --config, --k/--s or --roster");
  }
  if (f.k) {
    c.active_multipliers.assign(*f.k, 1);
    c.passive_multipliers.assign(f.s.value_or(0), 1);
    c.types.reset();
  } else if (f.s) {
    throw cdmm::ConfigError("--s requires --k");
  }
  if (f.roster) {
    auto [a, p] = cdmm::parse_roster_spec(*f.roster);
    c.active_multipliers = a;
    c.passive_multipliers = p;
    c.types.reset();
  }
  if (f.seed) c.seed = *f.seed;
  if (f.out) c.output = *f.out;
  if (f.scale) c.scale = *f.scale;
  if (f.scheme) c.schemes = {cdmm::scheme_from_string(*f.scheme)};
  c.validate();
  return c;
}

Json config_to_json(const cdmm::ExperimentConfig& c) {
  Json schemes = Json::array();
  for (auto s : c.schemes) schemes.push_back(cdmm::to_string(s));
  Json j{{"schemes", schemes},
         {"roster", {{"active", c.active_multipliers}, {"passive", c.passive_multipliers}, {"base_speed", c.base_speed}}},
         {"shape", {{"rows", c.rows}, {"block_cols", c.block_cols}}},
         {"timing",
          {{"noise", c.timing.noise},
           {"failure_probability", c.timing.failure_probability},
           {"failed_clients", c.timing.failed_clients}}},
         {"comm",
          {{"link_latency", c.comm.link_latency},
           {"per_byte", c.comm.per_byte},
           {"bytes_per_element", c.comm.bytes_per_element},
           {"broadcast_cost", c.comm.broadcast_cost}}},
         {"trials", c.trials},
         {"seed", c.seed},
         {"scale", c.scale},
         {"required_success", c.required_success}};
  if (c.types) j["roster"]["types"] = *c.types;
  if (!c.timing.per_type.empty()) {
    Json pt = Json::object();
    for (const auto& [t, d] : c.timing.per_type) pt[std::to_string(t)] = {{"shift", d.shift}, {"rate", d.rate}};
    j["timing"]["per_type"] = pt;
  }
  if (c.matrix) {
    j["matrix"] = {{"source", c.matrix->kind == cdmm::MatrixSource::Kind::kFile ? "file" : "synthetic"},
                   {"path", c.matrix->path},
                   {"zero_fraction", c.matrix->zero_fraction},
                   {"seed", c.matrix->seed}};
  }
  if (c.benchmark) {
    j["benchmark"] = {{"rows", c.benchmark->rows},
                      {"block_cols", c.benchmark->block_cols},
                      {"zero_fractions", c.benchmark->zero_fractions},
                      {"trials", c.benchmark->trials},
                      {"warmup", c.benchmark->warmup},
                      {"max_workers", c.benchmark->max_workers}};
  }
  j["fl_demo"] = {{"rows", c.fl.rows},     {"cols", c.fl.cols},   {"steps", c.fl.steps},
                  {"stepsize", c.fl.stepsize}, {"stragglers_per_round", c.fl.stragglers_per_round},
                  {"noise", c.fl.noise},   {"data", c.fl.data_path}, {"check", c.fl.check}};
  return j;
}

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Collects output files and writes them in one serialized pass.
class OutputDir {
 public:
  explicit OutputDir(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

  void write(const std::string& name, const std::string& payload, bool deterministic = true) {
    std::ofstream out(dir_ / name, std::ios::binary);
    if (!out) throw cdmm::ConfigError("cannot write " + (dir_ / name).string());
    out << payload;
    (deterministic ? files_ : nondeterministic_).push_back(name);
  }

  void write_csv(const std::string& name, const std::string& header, const std::vector<std::string>& rows,
                 bool deterministic = true) {
    std::string payload = header + "\n";
    for (const auto& r : rows) payload += r + "\n";
    write(name, payload, deterministic);
  }

  void manifest(const cdmm::ExperimentConfig& c, const std::string& command, const std::string& started) {
    const auto cfg = config_to_json(c).dump();
    char hash[17];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(cdmm::fnv1a(cfg)));
    Json m{{"command", command},
           {"config_hash", hash},
           {"root_seed", c.seed},
           {"version", kVersion},
           {"started", started},
           {"finished", utc_now()},
           {"files", files_},
           {"nondeterministic_files", nondeterministic_},
           {"config", config_to_json(c)}};
    std::ofstream(dir_ / "manifest.json") << m.dump(2) << "\n";
  }

 private:
  fs::path dir_;
  std::vector<std::string> files_;
  std::vector<std::string> nondeterministic_;
};

// ---------------------------------------------------------------------------

int cmd_plan(const CommonFlags& flags) {
  const auto started = utc_now();
  const auto cfg = resolve_config(flags);
  const auto plan = cdmm::build_plan(cfg.schemes.front(), cfg.roster(), cfg.seed);
  OutputDir out(cfg.output);
  const auto table = cdmm::allocation_table(plan);
  out.write("plan.json", plan_to_json(plan).dump(2) + "\n");
  out.write("allocation.txt", table);
  out.manifest(cfg, "plan", started);
  std::cout << table;
  return kOk;
}

int cmd_verify(const std::string& plan_path, const std::string& mode, std::uint64_t samples,
               const std::string& out_dir, std::uint64_t seed) {
  std::ifstream in(plan_path);
  if (!in) throw cdmm::ConfigError("cannot open plan " + plan_path);
  Json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw cdmm::ConfigError(std::string("plan: invalid JSON: ") + e.what());
  }
  cdmm::CodingPlan plan;
  try {
    plan = cdmm::plan_from_json(j);
  } catch (const cdmm::Error& e) {
    throw cdmm::ConfigError(e.what());
  }
  if (mode != "exhaustive" && mode != "sampled") throw cdmm::ConfigError("--mode: expected exhaustive or sampled");

  cdmm::SubsetCheckOptions opt;
  opt.sampled = mode == "sampled";
  opt.samples = samples;
  opt.check_neighborhood = plan.scheme == cdmm::Scheme::kProposed && plan.k_bar <= 20;
  cdmm::ResilienceReport rep;
  try {
    rep = cdmm::check_all_subsets(plan, seed, opt);
  } catch (const cdmm::GuardExceeded& e) {
    throw cdmm::ConfigError(e.what());
  }
  const std::uint64_t passed = rep.subsets_checked - rep.failures.size();
  std::cout << "subsets: " << passed << "/" << rep.subsets_checked << " full rank"
            << (rep.sampled ? " (sampled)" : "") << "\n";
  std::cout << "hall: " << rep.subsets_checked - rep.matching_failures.size() << "/" << rep.subsets_checked
            << " perfect matchings\n";
  if (rep.neighborhood_checked) std::cout << "neighborhood bound violations: " << rep.neighborhood_violations << "\n";
  for (const auto& f : rep.failures) {
    std::cout << "  rank-deficient subset:";
    for (auto w : f) std::cout << ' ' << w;
    std::cout << "\n";
  }

  Json report{{"resilience", cdmm::resilience_to_json(rep)}};
  if (plan.roster.size() <= 20) {
    const auto patterns = cdmm::resilience_patterns(plan.roster, plan);
    report["patterns"] = cdmm::patterns_to_json(patterns);
    for (const auto& g : patterns.groups) {
      if (g.label == "none") continue;
      std::cout << "pattern " << g.label << ": "
                << (g.all_tolerable() ? "tolerable" : g.none_tolerable() ? "not tolerable" : "partial") << " ("
                << g.tolerable_sets << "/" << g.sets << ")\n";
    }
    std::cout << "maximal tolerable:";
    for (std::size_t i = 0; i < patterns.maximal_tolerable.size(); ++i) {
      std::cout << (i ? ", " : " ") << patterns.maximal_tolerable[i] << ": tolerable";
    }
    std::cout << "\n";
  }
  OutputDir out(out_dir);
  out.write("resilience.json", report.dump(2) + "\n");
  return rep.certified() ? kOk : kVerifyFailure;
}

template <cdmm::BlockMatrix M>
struct Dataset {
  cdmm::PartitionedMatrix<M> blocks;
  cdmm::Vector x;
};

template <cdmm::BlockMatrix M>
Dataset<M> make_dataset(const M& a, const cdmm::ExperimentConfig& cfg, std::size_t k_bar) {
  if (a.cols() % k_bar != 0) {
    throw cdmm::ConfigError("matrix: " + std::to_string(a.cols()) + " columns do not split into " +
                            std::to_string(k_bar) + " base blocks");
  }
  return {cdmm::partition_equal(a, k_bar), cdmm::random_vector(a.rows(), cfg.seed)};
}

int run_rounds(const cdmm::ExperimentConfig& cfg, const cdmm::ClientRoster& roster,
               std::vector<std::string>& round_rows, std::vector<std::string>& privacy_rows) {
  const auto e = cdmm::expand_heterogeneous(roster);
  bool any_failure = false;

  std::optional<Dataset<cdmm::DenseMatrix>> dense;
  std::optional<Dataset<cdmm::SparseMatrix>> sparse;
  cdmm::BlockShape shape{cfg.scaled(cfg.rows), cfg.block_cols};
  if (cfg.matrix && cfg.trials > 0) {
    const auto& src = *cfg.matrix;
    if (src.kind == cdmm::MatrixSource::Kind::kFile) {
      if (src.path.ends_with(".mtx")) {
        sparse = make_dataset(cdmm::load_matrix_market(src.path), cfg, e.k_bar);
      } else {
        dense = make_dataset(cdmm::load_dense_csv(src.path), cfg, e.k_bar);
      }
    } else if (src.zero_fraction > 0.0) {
      sparse = make_dataset(cdmm::random_sparse(shape.rows, shape.alpha * e.k_bar, src.zero_fraction, src.seed),
                            cfg, e.k_bar);
    } else {
      dense = make_dataset(cdmm::random_dense(shape.rows, shape.alpha * e.k_bar, src.seed), cfg, e.k_bar);
    }
    if (dense) shape = {dense->blocks.rows(), dense->blocks.block_cols()};
    if (sparse) shape = {sparse->blocks.rows(), sparse->blocks.block_cols()};
  }

  for (auto scheme : cfg.schemes) {
    auto plan = cdmm::build_plan(scheme, roster, cfg.seed);
    auto priv = cdmm::privacy_csv_rows(cdmm::privacy_report(plan));
    privacy_rows.insert(privacy_rows.end(), priv.begin(), priv.end());

    auto run = [&](auto* data) {
      using Data = std::remove_pointer_t<decltype(data)>;
      std::optional<decltype(cdmm::encode(data->blocks, plan))> encoded;
      if (data) encoded = cdmm::encode(data->blocks, plan);
      for (std::size_t t = 0; t < cfg.trials; ++t) {
        using M = std::remove_cvref_t<decltype(data->blocks.block(0))>;
        cdmm::RoundData<M> rd;
        if (data) rd = {&data->blocks, &*encoded, &data->x};
        const auto rep = cdmm::simulate_round<M>(plan, shape, cfg.timing, cfg.comm, cfg.seed, t, rd);
        if (!rep.decoded) {
          any_failure = true;
          std::cerr << "warning: " << cdmm::to_string(scheme) << " trial " << t << ": " << rep.decode_failure << "\n";
        }
        round_rows.push_back(cdmm::round_csv_row(rep, t));
      }
      (void)sizeof(Data);
    };
    if (sparse) {
      run(&*sparse);
    } else if (dense) {
      run(&*dense);
    } else {
      run(static_cast<Dataset<cdmm::DenseMatrix>*>(nullptr));
    }
  }
  return any_failure ? kDecodeFailure : kOk;
}

int cmd_simulate(const CommonFlags& flags) {
  const auto started = utc_now();
  const auto cfg = resolve_config(flags);
  const auto roster = cfg.roster();
  OutputDir out(cfg.output);

  std::vector<std::string> round_rows, privacy_rows;
  const int status = run_rounds(cfg, roster, round_rows, privacy_rows);
  out.write_csv("rounds.csv", cdmm::kRoundCsvHeader, round_rows);
  out.write_csv("privacy.csv", cdmm::kPrivacyCsvHeader, privacy_rows);

  if (cfg.benchmark) {
    const auto e = cdmm::expand_heterogeneous(roster);
    cdmm::SparseTableConfig tc;
    tc.rows = cfg.scaled(cfg.benchmark->rows);
    tc.alpha = cfg.benchmark->block_cols;
    tc.k = e.k_bar;
    tc.s = e.s_bar;
    tc.zero_fractions = cfg.benchmark->zero_fractions;
    tc.schemes = cfg.schemes;
    tc.seed = cfg.seed;
    tc.options = {cfg.trials == 0 ? 0 : cfg.benchmark->trials, cfg.benchmark->warmup, cfg.benchmark->max_workers};
    const auto rows = cdmm::sparse_compute_benchmark(tc);
    std::vector<std::string> nnz_rows, time_rows;
    for (const auto& r : rows) {
      nnz_rows.push_back(cdmm::benchmark_csv_row(r));
      time_rows.push_back(cdmm::benchmark_timing_csv_row(r));
    }
    out.write_csv("benchmark.csv", cdmm::kBenchmarkCsvHeader, nnz_rows);
    out.write_csv("benchmark_timing.csv", cdmm::kBenchmarkTimingCsvHeader, time_rows, false);
    // Plot series: zero fraction vs median time, one file per scheme.
    for (auto scheme : cfg.schemes) {
      std::vector<std::string> series;
      for (const auto& r : rows) {
        if (r.scheme == cdmm::to_string(scheme)) series.push_back(cdmm::fmt_double(r.zero_fraction) + "," + cdmm::fmt_double(r.median_ms));
      }
      out.write_csv(std::string("plot_time_") + cdmm::to_string(scheme) + ".csv", "zero_fraction,median_ms", series,
                    false);
    }
  }
  out.manifest(cfg, "simulate", started);
  std::cout << "wrote " << round_rows.size() << " round rows to " << cfg.output << "\n";
  return cfg.required_success ? status : kOk;
}

int cmd_fl_demo(const CommonFlags& flags, bool check_flag) {
  const auto started = utc_now();
  const auto cfg = resolve_config(flags);
  cdmm::DenseMatrix d;
  cdmm::Vector y;
  if (!cfg.fl.data_path.empty()) {
    const auto table = cdmm::load_dense_csv(cfg.fl.data_path);
    if (table.cols() < 2) throw cdmm::ConfigError("fl_demo.data: need at least one feature column and y");
    d = cdmm::column_slice(table, 0, table.cols() - 1);
    for (std::size_t r = 0; r < table.rows(); ++r) y.push_back(table(r, table.cols() - 1));
  } else {
    d = cdmm::random_dense(cfg.fl.rows, cfg.fl.cols, cfg.seed);
    const auto truth = cdmm::random_vector(cfg.fl.cols, cfg.seed + 1);
    y = cdmm::matvec(d, truth);
    auto noise = cdmm::random_vector(cfg.fl.rows, cfg.seed + 2);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += cfg.fl.noise * noise[i];
  }

  cdmm::FlDemoConfig fc;
  fc.roster = cfg.roster();
  fc.scheme = cfg.schemes.front();
  fc.steps = cfg.fl.steps;
  fc.stragglers_per_round = cfg.fl.stragglers_per_round;
  fc.seed = cfg.seed;
  fc.stepsize = cfg.fl.stepsize > 0.0 ? cfg.fl.stepsize : 0.5 / cdmm::gradient_lipschitz(d);
  cdmm::FlDemoResult res;
  try {
    res = cdmm::fl_demo(d, y, fc);
  } catch (const cdmm::ConfigError&) {
    throw;
  } catch (const cdmm::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDecodeFailure;
  }
  for (const auto& line : res.log) std::cerr << "retry: " << line << "\n";

  std::vector<std::string> rows;
  for (std::size_t i = 0; i < res.loss.size(); ++i) {
    std::string row = std::to_string(i) + "," + cdmm::fmt_double(res.loss[i]) + "," +
                      cdmm::fmt_double(res.oracle_loss[i]) + "," + cdmm::fmt_double(res.deviation[i]);
    for (double v : res.params[i]) row += "," + cdmm::fmt_double(v);
    rows.push_back(row);
  }
  std::string header = "iteration,loss,oracle_loss,deviation";
  for (std::size_t j = 0; j < d.cols(); ++j) header += ",beta_" + std::to_string(j);
  OutputDir out(cfg.output);
  out.write_csv("trajectory.csv", header, rows);
  out.manifest(cfg, "fl-demo", started);

  for (std::size_t i = 1; i < res.loss.size(); ++i) {
    if (res.loss[i] > res.loss[i - 1] * (1.0 + 1e-12) + 1e-300) {
      std::cerr << "error: loss increased at iteration " << i << " (" << res.loss[i - 1] << " -> " << res.loss[i]
                << ")\n";
      return kDecodeFailure;
    }
  }
  std::cout << "final loss " << res.loss.back() << " (uncoded " << res.oracle_loss.back() << "), max deviation "
            << res.max_deviation() << ", retries " << res.retries << "\n";
  if ((check_flag || cfg.fl.check) && !(res.max_deviation() <= 1e-6)) {
    std::cerr << "error: coded trajectory deviates from the uncoded reference by " << res.max_deviation() << "\n";
    return kVerifyFailure;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coded distributed matrix-vector multiplication toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  CommonFlags plan_flags, sim_flags, fl_flags;
  auto* plan = app.add_subcommand("plan", "Build a coding plan and print its allocation table");
  add_common(plan, plan_flags);

  std::string plan_path, mode = "exhaustive", verify_out = "out";
  std::uint64_t samples = 10000, verify_seed = 1;
  auto* verify = app.add_subcommand("verify", "Certify straggler resilience of a stored plan");
  verify->add_option("plan", plan_path, "Plan JSON written by 'plan'")->required();
  verify->add_option("--mode", mode, "exhaustive | sampled");
  verify->add_option("--samples", samples, "Subsets to draw in sampled mode");
  verify->add_option("--out", verify_out, "Output directory");
  verify->add_option("--seed", verify_seed, "Seed for sampled mode");

  auto* simulate = app.add_subcommand("simulate", "Simulate coded rounds, privacy exposure and sparse products");
  add_common(simulate, sim_flags);

  bool check = false;
  auto* fl = app.add_subcommand("fl-demo", "Gradient descent with coded products and stragglers");
  add_common(fl, fl_flags);
  fl->add_flag("--check", check, "Fail unless the coded run matches the uncoded reference");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kConfigError;
  }

  try {
    if (*plan) return cmd_plan(plan_flags);
    if (*verify) return cmd_verify(plan_path, mode, samples, verify_out, verify_seed);
    if (*simulate) return cmd_simulate(sim_flags);
    if (*fl) return cmd_fl_demo(fl_flags, check);
  } catch (const cdmm::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const cdmm::Error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigError;
  }
  return kOk;
}
