#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "adco/markov.hpp"
#include "adco/payoff.hpp"

namespace adco {

// Payoffs of a two-strategy competition: ii = pi(i, i), ij = pi(i, j), etc.
struct Payoff2x2 {
  double ii = 0.0;
  double ij = 0.0;
  double ji = 0.0;
  double jj = 0.0;

  static Payoff2x2 from(const PayoffMatrix& m, std::size_t i, std::size_t j);
};

// ---------------------------------------------------------------------------
// Replicator dynamics, discrete map x' = x f_i / f_bar.

// Throws InvalidArgument when the mean fitness is not positive.
double replicator_step(double x, const Payoff2x2& payoffs);

// Adds 1 + |min| to every entry when some entry is <= 0; otherwise returns
// the payoffs unchanged.
Payoff2x2 shift_positive(const Payoff2x2& payoffs);

enum class Limit { Zero, One, Interior, None };

const char* to_string(Limit l);

struct ReplicatorOptions {
  std::size_t max_generations = 1'000'000;
  double tol = 1e-12;
  std::size_t record_every = 1;  // 0 records only the endpoints
};

struct ReplicatorTrajectory {
  std::vector<std::size_t> generation;
  std::vector<double> x;
  std::size_t generations = 0;
  double final_x = 0.0;
  Limit converged_to = Limit::None;
};

// Iterates the map on shift_positive(payoffs) until |x' - x| < tol.
ReplicatorTrajectory replicator_trajectory(double x0, const Payoff2x2& payoffs,
                                           const ReplicatorOptions& opts = {});

enum class Stability { Stable, Unstable };
enum class Regime { Bistable, Coexistence, IDominates, JDominates, Neutral };

const char* to_string(Stability s);
const char* to_string(Regime r);

struct FixedPointReport {
  std::optional<double> x_star;
  Stability stability = Stability::Unstable;
  std::optional<double> basin_boundary;  // x_star when unstable
  Regime regime = Regime::Neutral;
};

FixedPointReport interior_fixed_point(const Payoff2x2& payoffs);

// ---------------------------------------------------------------------------
// Finite populations under the pairwise-comparison (Fermi) process.

// Probability that a single mutant (strategy i of the 2x2 block) takes over a
// population of M residents (strategy j). Self-interaction is excluded from
// the finite-population payoffs.
double fixation_probability(const Payoff2x2& mutant_resident, int M, double beta);
double fixation_probability(std::size_t mutant, std::size_t resident, const Eigen::MatrixXd& payoff, int M,
                            double beta);

struct EmbeddedChain {
  Eigen::MatrixXd fixation;    // fixation(r, m): mutant m into residents r
  Eigen::MatrixXd transition;  // off-diagonal fixation / (n - 1)
  StationaryDistribution stationary;
};

// Rare-mutation chain over homogeneous populations with a uniform mutant draw.
EmbeddedChain embedded_chain(const Eigen::MatrixXd& payoff, int M, double beta,
                             const StationaryOptions& opts = {});

enum class CoopWeighting {
  SelfPlay,        // sum_i a_i rho(i, i)
  PairwiseMixture  // sum_ij a_i a_j rho(i, j)
};

double cooperation_level(std::span<const double> abundance, const Eigen::MatrixXd& coop,
                         CoopWeighting weighting = CoopWeighting::SelfPlay);

struct AbundanceDistribution {
  std::vector<std::string> specs;
  std::vector<double> abundance;
  std::vector<double> self_coop;
  double cooperation_level = 0.0;

  std::size_t argmax() const;
};

AbundanceDistribution abundance_from_chain(const PayoffMatrix& m, const EmbeddedChain& chain,
                                           CoopWeighting weighting = CoopWeighting::SelfPlay);

// ---------------------------------------------------------------------------
// Agent-based mutation-selection simulation on a precomputed payoff matrix.

struct SimConfig {
  int M = 100;
  double beta = 1.0;
  double mu = 1e-3;
  std::uint64_t steps = 1'000'000;
  std::uint64_t seed = 0;
  std::uint64_t burn_in = 0;       // steps excluded from the abundance estimate
  std::uint64_t record_every = 0;  // 0: no count series
};

struct AgentRun {
  std::vector<std::uint64_t> step;
  std::vector<std::vector<int>> counts;  // counts[k][s] at step[k]
  std::vector<int> final_counts;
  std::vector<double> abundance;         // time-averaged strategy fractions
};

// Without an initial composition, every individual starts with a strategy
// drawn uniformly at random.
AgentRun agent_simulation(const SimConfig& config, const Eigen::MatrixXd& payoff,
                          std::optional<std::vector<int>> initial_counts = std::nullopt);

}  // namespace adco
