#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fedleak/common.hpp"

namespace fedleak::experiments {

inline constexpr int kSchemaVersion = 1;

struct GraphParams {
  std::string kind = "rgg";  // rgg | ring | path | complete | star | edges
  int nodes = 10;
  std::optional<double> radius;  // rgg only; default radius otherwise
  int dims = 2;                  // rgg: unit square (2) or unit cube (3)
  std::string edges;             // kind == "edges": edge list text
};

struct ProtocolParams {
  double rho = 0.4;
  double theta = 1.0;
  double sigma_z2 = 1.0;
  std::string solver = "gd";  // exact | gd | quadratic_approx
  double mu = 0.1;            // local step of the gd / quadratic_approx solvers
  double cfl_mu = 0.1;        // server step of the centralized baseline
  int t_max = 100;
};

struct DataParams {
  std::string kind = "images";  // images | gaussian
  int per_node = 1;
  int side = 8;
  int classes = 4;
  int hidden = 32;
  double noise = 0.15;
  double weight_decay = 0.0;
};

struct AdversaryParams {
  std::vector<int> corrupt;
  std::optional<double> corrupt_fraction;
  int trials = 20;
  int steps = 800;
  int restarts = 2;
  // Iteration whose observables are attacked (single-iteration scenarios).
  int attack_iter = 1;
};

struct ExperimentConfig {
  std::string scenario;
  std::uint64_t seed = 1;
  GraphParams graph;
  ProtocolParams protocol;
  DataParams data;
  AdversaryParams adversary;
  // Scenario-specific sweep values (sigma_z2 values, n_i, component sizes,
  // corrupt counts, or attacked iterations).
  std::vector<double> sweep;
};

const std::vector<std::string>& scenario_ids();

// Desk-scale defaults for a scenario; throws ConfigError for unknown ids.
ExperimentConfig preset(std::string_view scenario);

struct Diagnostic {
  int line = 0;  // 1-based; 0 when not tied to a line
  std::string field;
  std::string message;
};

std::string format_diagnostic(const Diagnostic& d, std::string_view source = "");

class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<Diagnostic> diagnostics, std::string source = "");
  const std::vector<Diagnostic>& diagnostics() const { return diagnostics_; }

 private:
  std::vector<Diagnostic> diagnostics_;
};

// Parses a config document on top of the preset named by its "scenario"
// key. Unknown keys and out-of-range values raise ConfigError.
ExperimentConfig parse_config(std::string_view text, std::string_view source = "");
ExperimentConfig load_config(const std::filesystem::path& path);
// Value-range checks on a resolved config.
std::vector<Diagnostic> check_config(const ExperimentConfig& cfg);
// Empty when the file is a valid config.
std::vector<Diagnostic> validate_config(const std::filesystem::path& path);

std::string to_json(const ExperimentConfig& cfg);

struct ResultRow {
  std::string scenario;
  std::uint64_t seed = 0;
  int iteration = 0;
  std::string metric;
  double value = 0.0;
};

struct ScenarioResult {
  ExperimentConfig config;
  std::vector<ResultRow> rows;
};

// Seed of trial k: splitmix64(seed + k).
std::uint64_t trial_seed(std::uint64_t seed, int k);

// Runs a scenario. Throws ConfigError for infeasible parameters and
// DivergenceError when a protocol run blows up.
ScenarioResult run_scenario(const ExperimentConfig& cfg);

// Rows sorted by (iteration, metric, seed), '#'-prefixed header lines with
// the schema version and resolved config.
std::string result_csv(const ScenarioResult& result);
std::string result_json(const ScenarioResult& result);
// Writes <scenario>.csv and <scenario>.json into dir; returns both paths.
std::vector<std::filesystem::path> write_outputs(const ScenarioResult& result,
                                                 const std::filesystem::path& dir);

// Mean of every row matching metric (and iteration when given).
double mean_metric(const ScenarioResult& result, std::string_view metric,
                   std::optional<int> iteration = std::nullopt);

}  // namespace fedleak::experiments
