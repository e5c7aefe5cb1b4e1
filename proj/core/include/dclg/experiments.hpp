#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dclg/estimator.hpp"
#include "dclg/graph_sim.hpp"
#include "dclg/stat_tests.hpp"

namespace dclg {

// Flat experiment description. Parsed from a JSON object whose keys are the
// field names below; unknown keys are rejected.
struct ExperimentConfig {
  ModelFamily family;
  // Truth: (theta, gamma, zeta) or, for in/out degrees, (gamma_plus, gamma_minus, zeta).
  ParamVector params{1.0, 3.0, 1.0};
  SamplingScheme scheme = Equidistant{0.2, 20000};
  std::size_t runs = 100;
  std::uint64_t seed = 1;
  std::string out;
  std::size_t workers = 0;  // 0: hardware concurrency
  Engine engine = Engine::Auto;
  bool estimate = true;
  bool emit_qq = false;
  bool emit_hist = false;
  std::size_t bins = 30;
  std::size_t emit_series = 0;  // number of leading runs whose series are written
  bool full_system = false;
};

ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);
nlohmann::json config_to_json(const ExperimentConfig& config);
// Throws InvalidParameter when a field is out of range.
void validate_config(const ExperimentConfig& config);

GraphModelSpec true_spec(const ExperimentConfig& config);

// Seed of run `index` derived from the root seed.
std::uint64_t run_seed(std::uint64_t root, std::size_t index) noexcept;

struct RunRecord {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  MomentStats stats;
  std::optional<EstimationResult> estimate;
  std::optional<SnapshotSeries> series;
};

struct ParamSummary {
  std::string name;
  double mean = 0.0;
  double std = 0.0;
  std::size_t count = 0;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<RunRecord> runs;
  std::vector<ParamSummary> params;      // over converged runs
  std::vector<ParamSummary> statistics;  // s_hat, rho1_hat, rho2_hat over successful runs
  std::size_t converged = 0;
  std::size_t not_converged = 0;
  std::size_t failed = 0;
  std::optional<Eigen::Matrix3d> sigma_hat;    // K x across-run covariance of the statistics
  std::optional<Eigen::Matrix3d> sigma_circ;   // delta-method covariance at the true parameters
  std::vector<std::string> notes;

  std::vector<double> column(std::size_t param) const;      // converged estimates
  std::vector<double> stat_column(std::size_t which) const;  // 0: s_hat, 1: rho1_hat, 2: rho2_hat
};

using ProgressFn = std::function<void(std::size_t done, std::size_t total)>;

// Runs config.runs seeded simulations (and estimations), distributed over a
// worker pool. The report does not depend on the worker count.
ExperimentReport run_experiment(const ExperimentConfig& config, const ProgressFn& progress = {});

nlohmann::json summary_json(const ExperimentReport& report);
// Parses a runs.csv written by write_report; estimates are restored when the
// row carries them. Only fields present in the file are filled.
std::vector<RunRecord> read_runs_csv(std::istream& is, const ModelFamily& family);
std::vector<RunRecord> read_runs_csv(const std::string& path, const ModelFamily& family);

// runs.csv, summary.json and the optional hist_/qq_/series_ files.
void write_report(const ExperimentReport& report, const std::string& dir);

struct EqualityReport {
  ExperimentReport a;
  ExperimentReport b;
  KsVerdict s_hat;
  KsVerdict rho1_hat;
};

// Throws InvalidParameter unless both configs share N, K, L and the scheme.
EqualityReport run_equality_test(const ExperimentConfig& a, const ExperimentConfig& b,
                                 double level = 0.05, const ProgressFn& progress = {});
nlohmann::json equality_json(const EqualityReport& report);

}  // namespace dclg
