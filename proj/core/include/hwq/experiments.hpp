#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hwq/distributions.hpp"

namespace hwq {

const char* version();

enum class ExperimentKind {
  kValidate,
  kSimulate,
  kBound,
  kGaussian,
  kRenewal,
  kScalingLargeB,
  kScalingSmallB,
  kIdleTail,
  kCompare,
};

std::string to_string(ExperimentKind kind);
ExperimentKind parse_experiment_kind(const std::string& name);

struct ModelConfig {
  std::size_t n = 100;
  double B = 1.0;
  DistributionSpec arrival = DistributionSpec::exponential(1.0);
  DistributionSpec service = DistributionSpec::exponential(1.0);
  std::optional<double> lambda;
  bool allow_zero_service = false;
};

struct SimulationConfig {
  double horizon = 1000.0;
  double warmup = -1.0;
  std::size_t replications = 10;
  std::size_t trace_replication = 0;  // replication written by `simulate`
};

struct BoundConfig {
  std::optional<double> x;  // defaults to n
  bool transient = false;
  double t = 0.0;
  std::vector<double> delta_grid;
  std::vector<std::size_t> eta_grid;
  double horizon_T = 0.0;
  std::size_t replications = 1000;
};

struct GaussianConfig {
  double T = 0.0;  // 0: the truncation cap for each B
  double step = 0.05;
  std::size_t replications = 10000;
};

struct RenewalConfig {
  double t_max = 20.0;
  double step = 0.0;
  std::size_t points = 201;
};

struct GidConfig {
  std::size_t replications = 100000;
  std::size_t max_steps = 1000000;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::kValidate;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  std::string output;
  ModelConfig model;
  SimulationConfig simulation;
  BoundConfig bound;
  GaussianConfig gaussian;
  RenewalConfig renewal;
  GidConfig gid;
  std::vector<double> B_grid;  // empty: {model.B} or the study default
  std::vector<double> x_grid;  // empty: the experiment default
  std::string source = "simulation";
  std::size_t bootstrap_resamples = 2000;
  nlohmann::json raw;  // canonical form, used for the config hash
};

/// Strict parse: unknown keys, wrong types and a missing seed are ConfigError.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

/// FNV-1a 64 of the canonical config (threads and output excluded), hex.
std::string config_hash(const ExperimentConfig& config);

struct Table {
  std::vector<std::string> metadata;  // extra '#' lines
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

struct RunResult {
  Table table;
  int exit_code = 0;
  std::vector<std::string> messages;
};

/// Runs one experiment. Deterministic given the config (including seed);
/// the thread count only changes wall time.
RunResult run(const ExperimentConfig& config);

/// One row per (B, x): simulated tail, sample-path bound, Gaussian-limit
/// bound and the closed-form limit where one is known.
Table compare_table(const ExperimentConfig& config);

/// RFC-4180 body preceded by '#' metadata lines (version, config hash, seed).
void write_csv(std::ostream& out, const ExperimentConfig& config, const Table& table);

/// Covariance matrix of Z on the configured grid, one CSV row per grid point.
void write_covariance_csv(std::ostream& out, const ExperimentConfig& config);

}  // namespace hwq
