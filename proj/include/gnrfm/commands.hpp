#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "gnrfm/metrics.hpp"
#include "gnrfm/segmentation.hpp"
#include "gnrfm/solver.hpp"
#include "gnrfm/synthetic.hpp"

namespace gnrfm::cli {

namespace fs = std::filesystem;
using nlohmann::json;

json spec_to_json(const SyntheticSpec& s);
SyntheticSpec spec_from_json(const json& j);
json config_to_json(const SolverConfig& c);
/// Overrides fields of `base` present in `j`; unknown keys are rejected.
SolverConfig config_from_json(const json& j, SolverConfig base = {});
json report_to_json(const SolveReport& r, const SolverConfig& cfg);

/// Writes X.csv, labels.csv, E0.csv and meta.json into `out_dir`.
void cmd_gen(const SyntheticSpec& spec, const fs::path& out_dir);

struct SolveOptions {
  fs::path data;
  fs::path out_dir;
  SolverConfig cfg;
  bool trace = false;
  std::optional<fs::path> e0;  // adds E-recovery error to the trace
};

/// Writes U.csv, V.csv, E.csv, report.json and optionally trace.csv.
/// Returns the report; throws NumericalError after writing report.json if
/// every factor column was pruned.
SolveReport cmd_solve(const SolveOptions& opt);

struct ClusterOptions {
  fs::path data;
  fs::path u;
  fs::path v;
  fs::path out_dir;
  std::size_t k = 0;
  AffinityMode affinity = AffinityMode::squared;
  std::uint64_t seed = 1;
  double rank_tol = 1e-8;
  bool heatmap = false;
};

/// Writes labels.csv, affinity.csv and optionally affinity.pgm.
Segmentation cmd_cluster(const ClusterOptions& opt);

/// {"acc_percent", "nmi", "n"} for two label files.
json cmd_eval(const fs::path& pred, const fs::path& truth, NmiNorm norm = NmiNorm::sqrt);

struct BenchInstance {
  std::size_t s = 10, p = 20, d_tilde = 200, r_tilde = 5;
  double contamination = 0.2;
  bool fresh_rotation = false;
  std::vector<double> sigmas{0.05};

  std::string id() const;
};

struct ExternalLabels {
  std::string method;
  std::size_t instance = 0;  // index into BenchConfig::instances
  double sigma = 0.0;
  std::vector<fs::path> trials;  // one label file per trial
};

struct BenchConfig {
  std::size_t trials = 3;
  std::uint64_t base_seed = 1;
  std::vector<BenchInstance> instances;
  std::vector<std::pair<double, double>> hyper{{1.0, 10.0}};  // (mu_U, mu_V)
  std::vector<std::string> methods{"aalm"};
  SolverConfig solver;
  AffinityMode affinity = AffinityMode::squared;
  std::size_t k_clusters = 0;  // 0: use s
  bool traces = false;
  std::vector<ExternalLabels> external;

  void validate() const;
};

BenchConfig bench_config_from_json(const json& j);

struct BenchRow {
  std::string instance;
  double sigma = 0.0;
  double mu_U = 0.0;
  double mu_V = 0.0;
  std::string method;
  std::size_t trials_ok = 0;
  double time_s = 0.0;
  double iterations = 0.0;
  double acc_percent = 0.0;
  double nmi = 0.0;
  double final_rank = 0.0;
  double converged = 0.0;     // fraction of trials
  double e_rel_error = 0.0;   // ||E - E0||_F / ||E0||_F, NaN when E0 = 0
  std::string error;          // first trial failure, if any
};

/// Solver configuration for a named method: aalm, aalm_noprune,
/// alm_fixed, alm_converge.
SolverConfig method_config(const std::string& method, const SolverConfig& base, double mu_U, double mu_V);

std::string bench_csv(const std::vector<BenchRow>& rows, bool with_time = true);
std::string bench_markdown(const std::vector<BenchRow>& rows);

/// Runs the sweep; writes bench.csv, bench.md and traces/ into out_dir.
std::vector<BenchRow> cmd_bench(const BenchConfig& cfg, const fs::path& out_dir);

}  // namespace gnrfm::cli
