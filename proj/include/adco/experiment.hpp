#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "adco/dynamics.hpp"
#include "adco/game.hpp"
#include "adco/payoff.hpp"
#include "adco/strategy.hpp"

namespace adco {

inline constexpr const char* kToolVersion = "0.1.0";

// ---------------------------------------------------------------------------
// Strategy sets used by the presets.

// All 6^4 reactive strategies with probabilities in {0, 0.2, ..., 1}, in
// lexicographic order of (pCC, pCD, pDC, pDD).
std::vector<Memory1> build_mem1_grid();

// GTFT_0.4, GTFT_0.2, WSLS, ALLD, GRIM, ALLC, RANDOM, TFT, ZD_2, ZD_4.
std::vector<Strategy> classics_roster(const GameParams& game);

// Evenly strided subset of `count` items out of `total` (all when count is 0
// or >= total).
std::vector<std::size_t> stride_subsample(std::size_t total, std::size_t count);

// ---------------------------------------------------------------------------
// Configuration.

enum class ExperimentKind {
  CoopRates,
  FixedPoints,
  PairwiseReplicator,
  AonFamily,
  ClassicsVsAdco,
  Mem1GridVsAdco,
  Validate,
};

const char* to_string(ExperimentKind k);

// Either "embedded" (rare-mutation chain) or "agent" (agent-based simulation).
enum class DynamicsMode { Embedded, Agent };

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::CoopRates;
  GameParams game;
  int M = 100;
  double beta = 1.0;
  double mu = 1e-3;
  std::uint64_t steps = 10'000'000;
  std::uint64_t burn_in = 0;
  int replicates = 1;
  DynamicsMode mode = DynamicsMode::Embedded;
  CoopWeighting weighting = CoopWeighting::SelfPlay;
  std::size_t record_every = 10;
  std::vector<std::string> strategies;  // overrides the preset roster
  std::string focal;                    // ADCO spec for the *-vs-adco and replicator presets
  std::vector<int> sweep_K;
  std::vector<int> sweep_N;
  std::vector<int> sweep_t;
  std::vector<double> sweep_epsilon;
  double x0 = 0.5;
  MonteCarloSettings monte_carlo;
  std::optional<std::uint64_t> seed;
  std::filesystem::path output = "results.csv";
  std::optional<std::filesystem::path> payoff_cache;
  bool json_mirror = false;
  std::size_t subsample = 0;

  // Throws ConfigError naming the offending field, or the line and column of
  // a JSON syntax error.
  static ExperimentConfig from_json_text(const std::string& text);
  static ExperimentConfig from_file(const std::filesystem::path& path);

  // Effective configuration; parsing it back yields the same config.
  nlohmann::ordered_json to_json() const;

  // True when the preset draws random numbers with this configuration.
  bool stochastic() const;
};

// ---------------------------------------------------------------------------
// Results.

using Cell = std::variant<std::string, std::int64_t, double>;

struct ResultTable {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  ResultTable(std::string name, std::vector<std::string> columns);
  void add_row(std::vector<Cell> row);
  std::string to_csv(const std::vector<std::string>& metadata) const;
  nlohmann::ordered_json to_json() const;
};

struct ExperimentResult {
  std::vector<ResultTable> tables;  // tables[0] is written to the output path
  nlohmann::ordered_json config;
  double wall_time_s = 0.0;
  bool validation_failed = false;

  // Metadata lines without the leading "# ".
  std::vector<std::string> metadata(const ResultTable& table, bool with_wall_time) const;
};

// Runs the preset. Stochastic presets without a seed are rejected.
ExperimentResult run_experiment(const ExperimentConfig& config);

// Writes tables[0] to config.output and every further table to
// <stem>.<table>.csv next to it (plus .json mirrors when requested). Returns
// the written paths.
std::vector<std::filesystem::path> write_result(const ExperimentResult& result, const ExperimentConfig& config);

// ---------------------------------------------------------------------------
// Self-test suite that triangulates the closed forms, the chains and the
// simulations.

struct CheckResult {
  std::string name;
  bool passed = false;
  double value = 0.0;      // worst observed deviation or statistic
  double threshold = 0.0;
  std::string detail;
};

struct ValidationOptions {
  std::uint64_t seed = 1;
  std::uint64_t mc_rounds = 1'000'000;
};

std::vector<CheckResult> run_validation(const ValidationOptions& opts,
                                        const std::function<void(const CheckResult&)>& on_check = {});

}  // namespace adco
