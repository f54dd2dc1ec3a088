// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cdmm/cdmm.hpp"
#include "json.hpp"
#include "oracles.hpp"

using namespace cdmm;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// 1. All 66 subsets of the (10, 2) plan are full rank, match, and decode.
Outcome resilience() {
  const auto t0 = Clock::now();
  const auto plan = build_homogeneous_plan(10, 2, 1);
  const auto g = plan.coefficient_matrix();
  const auto a = random_dense(120, 50, 7);
  const auto x = random_vector(120, 8);
  const auto want = oracle::at_x(a, x);
  const auto enc = encode(partition_equal(a, 10), plan);
  std::size_t subsets = 0, full_rank = 0, matched = 0, decoded = 0;
  double worst = 0.0;
  for_each_subset(12, 10, [&](const std::vector<std::size_t>& s) {
    ++subsets;
    full_rank += oracle::rank(oracle::to_rows(select_rows(g, s))) == 10;
    matched += check_hall_condition(plan, s).perfect;
    DecodeProblem p{10, {}};
    for (auto w : s) p.returned.push_back({w, plan.coefficient_row(w), matvec_t(enc.coded[w], x)});
    try {
      const double err = oracle::rel_err(decode(p).concatenated(), want);
      worst = std::max(worst, err);
      decoded += err <= 1e-8;
    } catch (const Error&) {
    }
  });
  const double secs = seconds_since(t0);
  const bool ok = subsets == oracle::binom(12, 10) && full_rank == subsets && matched == subsets &&
                  decoded == subsets && secs < 5.0;
  return {ok, std::to_string(full_rank) + "/" + std::to_string(subsets) + " full rank, " + std::to_string(matched) +
                  " matchings, " + std::to_string(decoded) + " decodes, max rel err " + fmt("%.2e", worst) + ", " +
                  fmt("%.2f", secs) + " s"};
}

// 2. Example 2 pattern report.
Outcome heterogeneous() {
  const auto roster = ClientRoster::from_multipliers({2, 2, 1, 1, 1}, {1, 1});
  const auto rep = resilience_patterns(roster, build_heterogeneous_plan(roster, 1));
  std::set<std::string> maximal(rep.maximal_tolerable.begin(), rep.maximal_tolerable.end());
  const std::set<std::string> want{"2x type-0", "1x type-1"};
  bool within_budget_ok = true;
  for (const auto& g : rep.groups) {
    if (g.max_removed_workers <= rep.s_bar && !g.all_tolerable()) within_budget_ok = false;
  }
  const bool ok = maximal == want && rep.over_budget_tolerable == 0 && within_budget_ok;
  std::string labels;
  for (const auto& l : rep.maximal_tolerable) labels += (labels.empty() ? "" : ", ") + l + ": tolerable";
  return {ok, labels + "; over-budget tolerable sets " + std::to_string(rep.over_budget_tolerable) + "/" +
                  std::to_string(rep.over_budget_sets)};
}

// 3. Measured neighborhoods never fall below the bound.
Outcome neighborhood() {
  const auto plan = build_homogeneous_plan(10, 2, 1);
  std::size_t violations = 0, checks = 0;
  for_each_subset(12, 10, [&](const std::vector<std::size_t>& s) {
    const auto mins = min_neighborhoods(plan, s);
    for (std::size_t m = 1; m <= 10; ++m) {
      ++checks;
      violations += mins[m - 1] < neighborhood_lower_bound(10, 2, m);
    }
  });
  return {violations == 0, std::to_string(violations) + " violations over " + std::to_string(checks) + " checks"};
}

// 4. Transfer counts and delay ordering at (20, 18, 2).
Outcome communication() {
  const auto roster = ClientRoster::homogeneous(18, 2);
  const auto prop = build_plan(Scheme::kProposed, roster, 1);
  const auto dense = build_plan(Scheme::kDenseRandom, roster, 1);
  const BlockShape shape{1200, 1000};
  bool ordering = true;
  auto rng = make_stream(99, StreamTag::kBaseline, 4);
  for (int t = 0; t < 2000; ++t) {
    CommModel m;
    m.link_latency = t % 4 == 0 ? 0.0 : uniform(rng, 0.0, 10.0);
    m.per_byte = t % 4 == 1 ? 0.0 : uniform(rng, 0.0, 1e-6);
    m.bytes_per_element = 1 + draw_index(rng, 16);
    m.broadcast_cost = uniform(rng, 0.0, 5.0);
    ordering = ordering && d2d_delay(prop, shape, m) <= d2d_delay(dense, shape, m);
  }
  const double ratio = d2d_delay(dense, shape, CommModel{}) / d2d_delay(prop, shape, CommModel{});
  const bool ok = prop.transfers.size() == 38 && dense.transfers.size() == 342 && ordering && ratio >= 5.0;
  return {ok, std::to_string(prop.transfers.size()) + " vs " + std::to_string(dense.transfers.size()) +
                  " transmissions, ordering " + (ordering ? "holds" : "violated") + ", default delay ratio " +
                  fmt("%.2f", ratio)};
}

// 5. Sparse benchmark at 4000 x 1125 per block, k = 28, s = 2.
Outcome sparsity() {
  SparseTableConfig cfg;
  cfg.zero_fractions = {0.99, 0.98, 0.95};
  cfg.options = {11, 2, 0};
  const auto rows = sparse_compute_benchmark(cfg);
  const double bound = 3.0 / 28.0 + 0.05;
  bool a = true, b = true, c = true;
  std::string detail;
  std::vector<double> prop_ms;
  for (std::size_t z = 0; z < cfg.zero_fractions.size(); ++z) {
    const auto& p = rows[2 * z];
    const auto& d = rows[2 * z + 1];
    const double ratio = p.mean_nnz / d.mean_nnz;
    const bool az = ratio <= bound, bz = p.median_ms < d.median_ms;
    a = a && az;
    b = b && bz;
    prop_ms.push_back(p.median_ms);
    detail += "\n    zeta=" + fmt("%.2f", cfg.zero_fractions[z]) + ": nnz ratio " + fmt("%.4f", ratio) + " (bound " +
              fmt("%.4f", bound) + ") " + (az ? "ok" : "EXCEEDS") + "; median ms " + fmt("%.3f", p.median_ms) +
              " vs " + fmt("%.3f", d.median_ms) + (bz ? "" : " NOT FASTER");
  }
  c = prop_ms[0] < prop_ms[1] && prop_ms[1] < prop_ms[2];
  detail = std::string("(a) ") + (a ? "pass" : "fail") + ", (b) " + (b ? "pass" : "fail") + ", (c) " +
           (c ? "pass" : "fail") + detail;
  return {a && b && c, detail};
}

// 6. Example 2 raw fractions and dense coded-support fractions.
Outcome privacy() {
  const auto roster = ClientRoster::from_multipliers({2, 2, 1, 1, 1}, {1, 1});
  const auto rep = privacy_report(build_heterogeneous_plan(roster, 1));
  const std::vector<std::size_t> num{4, 4, 3, 3, 3};
  bool ok = true;
  std::string detail;
  for (std::size_t c = 0; c < 5; ++c) {
    ok = ok && rep.clients[c].raw_blocks == num[c] && rep.clients[c].total_blocks == 7;
    detail += std::string(c ? ", " : "") + "W" + std::to_string(c) + " " + std::to_string(rep.clients[c].raw_blocks) + "/" +
              std::to_string(rep.clients[c].total_blocks);
  }
  const auto dense = privacy_report(build_dense_plan(roster, 1));
  bool full = true;
  for (const auto& c : dense.clients) full = full && c.coded_blocks == c.total_blocks;
  return {ok && full, detail + "; dense coded-support " + (full ? "1 for every client" : "below 1")};
}

// 7. Coded gradient descent tracks the uncoded oracle.
Outcome fl() {
  const auto t0 = Clock::now();
  const auto d = random_dense(60, 21, 1);
  const auto y = random_vector(60, 2);
  FlDemoConfig cfg;
  cfg.steps = 100;
  cfg.stragglers_per_round = 2;
  cfg.stepsize = 0.5 / gradient_lipschitz(d);
  const auto res = fl_demo(d, y, cfg);
  // Independent uncoded descent in long double.
  std::vector<long double> b(21, 0.0L);
  double worst = 0.0;
  for (std::size_t step = 0; step < cfg.steps; ++step) {
    std::vector<long double> r(60, 0.0L), g(21, 0.0L);
    for (std::size_t i = 0; i < 60; ++i) {
      for (std::size_t j = 0; j < 21; ++j) r[i] += d(i, j) * b[j];
      r[i] -= y[i];
    }
    for (std::size_t j = 0; j < 21; ++j)
      for (std::size_t i = 0; i < 60; ++i) g[j] += d(i, j) * r[i];
    for (std::size_t j = 0; j < 21; ++j) b[j] -= cfg.stepsize * 2.0L * g[j];
    worst = std::max(worst, oracle::rel_err(res.params[step + 1], std::vector<double>(b.begin(), b.end())));
  }
  bool monotone = true;
  for (std::size_t i = 1; i < res.loss.size(); ++i) monotone = monotone && res.loss[i] <= res.loss[i - 1];
  const double secs = seconds_since(t0);
  return {worst <= 1e-6 && monotone && secs < 5.0,
          "max rel deviation " + fmt("%.2e", worst) + ", loss " + (monotone ? "non-increasing" : "INCREASED") + ", " +
              std::to_string(res.retries) + " retries, " + fmt("%.2f", secs) + " s"};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// 8. Rerunning the CLI reproduces every CSV byte for byte.
Outcome determinism() {
  const auto root = fs::temp_directory_path() / "cdmm_acceptance_determinism";
  fs::remove_all(root);
  const std::string cli = CDMM_CLI_PATH;
  const std::string configs = std::string(CDMM_SOURCE_DIR) + "/configs/";
  const std::vector<std::string> runs{"simulate --config " + configs + "example2.json",
                                      "simulate --config " + configs + "table1.json --scale 100",
                                      "simulate --config " + configs + "table2.json --scale 400",
                                      "fl-demo --config " + configs + "fl_demo.json"};
  std::size_t compared = 0, identical = 0;
  for (std::size_t r = 0; r < runs.size(); ++r) {
    std::vector<fs::path> dirs;
    for (int rep = 0; rep < 2; ++rep) {
      dirs.push_back(root / (std::to_string(r) + "_" + std::to_string(rep)));
      const std::string cmd = cli + " " + runs[r] + " --out " + dirs.back().string() + " > /dev/null 2>&1";
      const int st = std::system(cmd.c_str());
      if (!WIFEXITED(st) || WEXITSTATUS(st) != 0) return {false, "command failed: " + runs[r]};
    }
    const auto manifest = nlohmann::json::parse(slurp(dirs[0] / "manifest.json"));
    for (const auto& f : manifest["files"]) {
      const auto name = f.get<std::string>();
      if (!name.ends_with(".csv")) continue;
      ++compared;
      identical += slurp(dirs[0] / name) == slurp(dirs[1] / name);
    }
  }
  return {compared > 0 && identical == compared,
          std::to_string(identical) + "/" + std::to_string(compared) + " CSV payloads identical"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"1 resilience (k=10, s=2)", resilience},  {"2 heterogeneous patterns", heterogeneous},
      {"3 neighborhood bound", neighborhood},     {"4 communication", communication},
      {"5 sparsity (k=28, s=2)", sparsity},       {"6 privacy fractions", privacy},
      {"7 fl demo", fl},                          {"8 determinism", determinism}};
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s criterion %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
