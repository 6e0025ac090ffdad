#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "adco/game.hpp"
#include "adco/markov.hpp"
#include "adco/strategy.hpp"

namespace adco {

// ---------------------------------------------------------------------------
// Closed forms for homogeneous groups.

// Per-round probability that a group of N players with the same intent all
// implement the same action: eps^N + (1-eps)^N.
double group_coordination_prob(int N, double epsilon);

double aon_group_coop_rate(int K, int N, double epsilon);

// Returns the limit 1 at epsilon = 0.
double adco_group_coop_rate(int K, int t, int N, double epsilon);

// Long-run payoff of AoN_K against itself in the two-player game.
double aon_self_payoff(int K, const GameParams& params);

// ---------------------------------------------------------------------------
// Product chain of two automata under implementation noise.

struct ChainOptions {
  std::size_t max_states = 1'000'000;
};

struct ProductChain {
  std::vector<std::pair<StateIndex, StateIndex>> states;  // states[0] is the joint initial state
  SparseMatrix transition;
  // Outcome probabilities CC, CD, DC, DD from the first automaton's side.
  std::vector<std::array<double, 4>> outcome_dist;
};

// Only states reachable from the joint initial state are kept. Throws
// ResourceError when more than opts.max_states joint states are reachable.
ProductChain build_product_chain(const Automaton& a, const Automaton& b, const GameParams& params,
                                 const ChainOptions& opts = {});

struct PairPayoff {
  double payoff_a = 0.0;
  double payoff_b = 0.0;
  double coop_a = 0.0;
  double coop_b = 0.0;
  // Monte Carlo standard errors; zero for analytical results.
  double se_a = 0.0;
  double se_b = 0.0;
  bool analytic = true;
};

// Expected per-round payoffs and cooperation rates under the stationary
// distribution of the chain.
PairPayoff chain_payoff(const ProductChain& chain, const GameParams& params,
                        const StationaryOptions& opts = {});

struct MonteCarloSettings {
  std::uint64_t rounds = 10'000'000;  // including burn-in
  std::uint64_t burn_in = 10'000;
  int batches = 100;
  std::uint64_t seed = 0;
};

// Time averages after burn-in; standard errors from batch means.
PairPayoff monte_carlo_payoff(const Strategy& a, const Strategy& b, const GameParams& params,
                              const MonteCarloSettings& settings);

struct PairOptions {
  ChainOptions chain;
  StationaryOptions stationary;
  MonteCarloSettings monte_carlo;
};

// Analytical when both strategies are automata, Monte Carlo otherwise.
PairPayoff pair_payoff(const Strategy& a, const Strategy& b, const GameParams& params,
                       const PairOptions& opts = {});

// ---------------------------------------------------------------------------
// Homogeneous N-player groups share one automaton state.

struct GroupChain {
  Eigen::MatrixXd transition;
  Eigen::VectorXd intent;
  StationaryDistribution stationary;
  double coop_rate = 0.0;
};

// Requires epsilon > 0; use the closed forms at epsilon = 0.
GroupChain group_shared_state_chain(const AonStrategy& s, int N, double epsilon);
GroupChain group_shared_state_chain(const AdcoStrategy& s, int N, double epsilon);

struct GroupEstimate {
  double coop_rate = 0.0;
  double se = 0.0;  // batch-means standard error
};

// Simulates N players, each running its own copy of the automaton and
// observing only whether the whole group coordinated.
GroupEstimate monte_carlo_group_coop_rate(const Automaton& machine, int N, double epsilon,
                                          const MonteCarloSettings& settings);

// ---------------------------------------------------------------------------
// Payoff matrix over a strategy list.

struct PayoffMatrix {
  std::vector<std::string> specs;
  GameParams game;
  Eigen::MatrixXd payoff;  // payoff(i, j): strategy i against j
  Eigen::MatrixXd coop;    // coop(i, j): cooperation rate of i against j

  std::size_t size() const { return specs.size(); }
  // Self-play cooperation rates (diagonal of coop).
  std::vector<double> self_coop() const;
};

struct MatrixOptions {
  PairOptions pair;
  // Monte Carlo pairs use seeds derived from this and the two spec strings.
  std::uint64_t master_seed = 0;
};

// Each unordered pair is evaluated once; entries do not depend on evaluation
// order or thread count.
PayoffMatrix payoff_matrix(std::span<const Strategy> strategies, const GameParams& params,
                           const MatrixOptions& opts = {});

bool needs_monte_carlo(std::span<const Strategy> strategies);

// CSV layout: '#' metadata lines with the game parameters, a header row of
// spec strings, then one row of payoffs per strategy. Companion files next to
// it hold the self-play cooperation rates (<stem>.coop.csv) and the pairwise
// cooperation matrix (<stem>.pair_coop.csv).
void write_payoff_csv(const PayoffMatrix& m, const std::filesystem::path& path);
PayoffMatrix read_payoff_csv(const std::filesystem::path& path);

// Loads the cache when it exists and matches specs and game exactly;
// otherwise computes the matrix and writes the cache.
PayoffMatrix cached_payoff_matrix(std::span<const Strategy> strategies, const GameParams& params,
                                  const MatrixOptions& opts, const std::filesystem::path& cache);

}  // namespace adco
