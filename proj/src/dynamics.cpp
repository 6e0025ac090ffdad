#include "adco/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include "adco/error.hpp"
#include "adco/random.hpp"

namespace adco {

Payoff2x2 Payoff2x2::from(const PayoffMatrix& m, std::size_t i, std::size_t j) {
  const auto a = static_cast<Eigen::Index>(i);
  const auto b = static_cast<Eigen::Index>(j);
  return {m.payoff(a, a), m.payoff(a, b), m.payoff(b, a), m.payoff(b, b)};
}

double replicator_step(double x, const Payoff2x2& p) {
  if (!(x >= 0.0 && x <= 1.0)) throw InvalidArgument("replicator state must lie in [0, 1]");
  if (x == 0.0 || x == 1.0) return x;
  const double fi = x * p.ii + (1.0 - x) * p.ij;
  const double fj = x * p.ji + (1.0 - x) * p.jj;
  const double mean = x * fi + (1.0 - x) * fj;
  if (!(mean > 0.0)) {
    throw InvalidArgument("mean fitness is not positive; shift the payoffs (see shift_positive)");
  }
  return std::clamp(x * fi / mean, 0.0, 1.0);
}

Payoff2x2 shift_positive(const Payoff2x2& p) {
  const double lo = std::min({p.ii, p.ij, p.ji, p.jj});
  if (lo > 0.0) return p;
  const double c = 1.0 + std::abs(lo);
  return {p.ii + c, p.ij + c, p.ji + c, p.jj + c};
}

const char* to_string(Limit l) {
  switch (l) {
    case Limit::Zero: return "0";
    case Limit::One: return "1";
    case Limit::Interior: return "interior";
    case Limit::None: return "none";
  }
  return "none";
}

const char* to_string(Stability s) { return s == Stability::Stable ? "stable" : "unstable"; }

const char* to_string(Regime r) {
  switch (r) {
    case Regime::Bistable: return "bistable";
    case Regime::Coexistence: return "coexistence";
    case Regime::IDominates: return "i-dominates";
    case Regime::JDominates: return "j-dominates";
    case Regime::Neutral: return "neutral";
  }
  return "neutral";
}

ReplicatorTrajectory replicator_trajectory(double x0, const Payoff2x2& payoffs, const ReplicatorOptions& opts) {
  const Payoff2x2 p = shift_positive(payoffs);
  ReplicatorTrajectory out;
  double x = x0;
  auto record = [&](std::size_t g) {
    out.generation.push_back(g);
    out.x.push_back(x);
  };
  record(0);
  bool converged = false;
  std::size_t g = 0;
  while (g < opts.max_generations) {
    const double next = replicator_step(x, p);
    ++g;
    const double step = std::abs(next - x);
    x = next;
    if (opts.record_every && g % opts.record_every == 0) record(g);
    if (step < opts.tol) {
      converged = true;
      break;
    }
  }
  if (out.generation.back() != g) record(g);
  out.generations = g;
  out.final_x = x;
  constexpr double kEdge = 1e-6;
  if (x >= 1.0 - kEdge) {
    out.converged_to = Limit::One;
  } else if (x <= kEdge) {
    out.converged_to = Limit::Zero;
  } else {
    out.converged_to = converged ? Limit::Interior : Limit::None;
  }
  return out;
}

FixedPointReport interior_fixed_point(const Payoff2x2& p) {
  // f_i - f_j is affine in x: g(x) = (1 - x) g0 + x g1.
  const double g0 = p.ij - p.jj;
  const double g1 = p.ii - p.ji;
  FixedPointReport r;
  const double denom = g1 - g0;
  if (denom != 0.0) {
    const double x = -g0 / denom;
    if (x > 0.0 && x < 1.0) {
      r.x_star = x;
      if (g0 < 0.0 && g1 > 0.0) {
        r.stability = Stability::Unstable;
        r.regime = Regime::Bistable;
        r.basin_boundary = x;
      } else {
        r.stability = Stability::Stable;
        r.regime = Regime::Coexistence;
      }
      return r;
    }
  }
  if (g0 == 0.0 && g1 == 0.0) {
    r.regime = Regime::Neutral;
  } else if (g0 >= 0.0 && g1 >= 0.0) {
    r.regime = Regime::IDominates;
  } else {
    r.regime = Regime::JDominates;
  }
  return r;
}

double fixation_probability(const Payoff2x2& p, int M, double beta) {
  if (M < 2) throw InvalidArgument("population size M must be >= 2");
  if (!(beta >= 0.0)) throw InvalidArgument("selection intensity must be nonnegative");
  const double denom = M - 1;
  // log of prod_{l<=k} exp(-beta (pi_M(l) - pi_R(l))), accumulated in k.
  std::vector<double> logs(static_cast<std::size_t>(M - 1));
  double acc = 0.0;
  double top = 0.0;  // log of the leading 1
  for (int l = 1; l < M; ++l) {
    const double pi_mutant = ((l - 1) * p.ii + (M - l) * p.ij) / denom;
    const double pi_resident = (l * p.ji + (M - l - 1) * p.jj) / denom;
    acc += -beta * (pi_mutant - pi_resident);
    logs[static_cast<std::size_t>(l - 1)] = acc;
    top = std::max(top, acc);
  }
  double sum = std::exp(-top);
  for (double v : logs) sum += std::exp(v - top);
  return std::exp(-top) / sum;
}

double fixation_probability(std::size_t mutant, std::size_t resident, const Eigen::MatrixXd& payoff, int M,
                            double beta) {
  const auto m = static_cast<Eigen::Index>(mutant);
  const auto r = static_cast<Eigen::Index>(resident);
  if (m >= payoff.rows() || r >= payoff.rows()) throw InvalidArgument("strategy index out of range");
  return fixation_probability(Payoff2x2{payoff(m, m), payoff(m, r), payoff(r, m), payoff(r, r)}, M, beta);
}

EmbeddedChain embedded_chain(const Eigen::MatrixXd& payoff, int M, double beta, const StationaryOptions& opts) {
  const Eigen::Index n = payoff.rows();
  if (n < 2 || payoff.cols() != n) throw InvalidArgument("embedded chain needs a square payoff matrix of >= 2 strategies");
  EmbeddedChain c;
  c.fixation = Eigen::MatrixXd::Zero(n, n);
  c.transition = Eigen::MatrixXd::Zero(n, n);
#pragma omp parallel for schedule(dynamic, 8)
  for (Eigen::Index r = 0; r < n; ++r) {
    double off = 0.0;
    for (Eigen::Index m = 0; m < n; ++m) {
      if (m == r) continue;
      const double rho = fixation_probability(static_cast<std::size_t>(m), static_cast<std::size_t>(r), payoff, M, beta);
      c.fixation(r, m) = rho;
      c.transition(r, m) = rho / static_cast<double>(n - 1);
      off += c.transition(r, m);
    }
    c.transition(r, r) = 1.0 - off;
  }
  c.stationary = stationary(c.transition, opts);
  return c;
}

double cooperation_level(std::span<const double> abundance, const Eigen::MatrixXd& coop, CoopWeighting weighting) {
  const auto n = static_cast<Eigen::Index>(abundance.size());
  if (coop.rows() != n || coop.cols() != n) throw InvalidArgument("abundance and cooperation matrix sizes differ");
  double level = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double ai = abundance[static_cast<std::size_t>(i)];
    if (weighting == CoopWeighting::SelfPlay) {
      level += ai * coop(i, i);
    } else {
      for (Eigen::Index j = 0; j < n; ++j) level += ai * abundance[static_cast<std::size_t>(j)] * coop(i, j);
    }
  }
  return level;
}

std::size_t AbundanceDistribution::argmax() const {
  return static_cast<std::size_t>(std::max_element(abundance.begin(), abundance.end()) - abundance.begin());
}

AbundanceDistribution abundance_from_chain(const PayoffMatrix& m, const EmbeddedChain& chain, CoopWeighting weighting) {
  AbundanceDistribution a;
  a.specs = m.specs;
  const Eigen::VectorXd& pi = chain.stationary.probabilities;
  a.abundance.assign(pi.data(), pi.data() + pi.size());
  a.self_coop = m.self_coop();
  a.cooperation_level = cooperation_level(a.abundance, m.coop, weighting);
  return a;
}

AgentRun agent_simulation(const SimConfig& cfg, const Eigen::MatrixXd& payoff, std::optional<std::vector<int>> initial) {
  const auto n = static_cast<std::size_t>(payoff.rows());
  if (n == 0 || payoff.cols() != payoff.rows()) throw InvalidArgument("agent simulation needs a square payoff matrix");
  if (cfg.M < 2) throw InvalidArgument("population size M must be >= 2");
  if (!(cfg.mu >= 0.0 && cfg.mu <= 1.0)) throw InvalidArgument("mutation probability must lie in [0, 1]");
  if (!(cfg.beta >= 0.0)) throw InvalidArgument("selection intensity must be nonnegative");
  if (cfg.burn_in >= cfg.steps) throw InvalidArgument("burn-in must be shorter than the run");

  Rng rng(cfg.seed);
  const auto M = static_cast<std::size_t>(cfg.M);
  std::vector<std::uint32_t> pop(M);
  std::vector<int> counts(n, 0);
  if (initial) {
    if (initial->size() != n) throw InvalidArgument("initial composition has the wrong length");
    std::size_t k = 0;
    for (std::size_t s = 0; s < n; ++s) {
      if ((*initial)[s] < 0) throw InvalidArgument("negative initial count");
      for (int c = 0; c < (*initial)[s]; ++c) {
        if (k >= M) throw InvalidArgument("initial composition exceeds the population size");
        pop[k++] = static_cast<std::uint32_t>(s);
      }
    }
    if (k != M) throw InvalidArgument("initial composition does not sum to M");
  } else {
    for (auto& s : pop) s = static_cast<std::uint32_t>(rng.below(n));
  }
  for (auto s : pop) ++counts[s];

  // sums[s] = sum_j counts[j] * payoff(s, j); refreshed periodically to bound
  // floating-point drift.
  std::vector<double> sums(n, 0.0);
  auto refresh = [&] {
    for (std::size_t s = 0; s < n; ++s) {
      double v = 0.0;
      for (std::size_t j = 0; j < n; ++j) v += counts[j] * payoff(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(j));
      sums[s] = v;
    }
  };
  refresh();
  const double others = static_cast<double>(M - 1);
  auto payoff_of = [&](std::uint32_t s) {
    return (sums[s] - payoff(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(s))) / others;
  };

  std::vector<double> occupancy(n, 0.0);
  std::vector<std::uint64_t> since(n, 0);
  auto flush = [&](std::size_t s, std::uint64_t now) {
    occupancy[s] += static_cast<double>(counts[s]) * static_cast<double>(now - since[s]);
    since[s] = now;
  };

  AgentRun run;
  auto record = [&](std::uint64_t t) {
    run.step.push_back(t);
    run.counts.push_back(counts);
  };
  if (cfg.record_every) record(0);

  std::uint64_t changes = 0;
  for (std::uint64_t t = 0; t < cfg.steps; ++t) {
    if (t == cfg.burn_in) {
      for (std::size_t s = 0; s < n; ++s) since[s] = t;
      std::fill(occupancy.begin(), occupancy.end(), 0.0);
    }
    const std::size_t learner = rng.below(M);
    const std::uint32_t old_s = pop[learner];
    std::uint32_t new_s = old_s;
    if (cfg.mu > 0.0 && rng.uniform() < cfg.mu) {
      new_s = static_cast<std::uint32_t>(rng.below(n));
    } else {
      std::size_t model = rng.below(M - 1);
      if (model >= learner) ++model;
      const std::uint32_t model_s = pop[model];
      if (model_s != old_s) {
        const double gain = payoff_of(model_s) - payoff_of(old_s);
        if (rng.uniform() < 1.0 / (1.0 + std::exp(-cfg.beta * gain))) new_s = model_s;
      }
    }
    if (new_s != old_s) {
      if (t >= cfg.burn_in) {
        flush(old_s, t + 1);
        flush(new_s, t + 1);
      }
      pop[learner] = new_s;
      --counts[old_s];
      ++counts[new_s];
      for (std::size_t s = 0; s < n; ++s) {
        sums[s] += payoff(static_cast<Eigen::Index>(s), new_s) - payoff(static_cast<Eigen::Index>(s), old_s);
      }
      if (++changes % (1u << 16) == 0) refresh();
    }
    if (cfg.record_every && (t + 1) % cfg.record_every == 0) record(t + 1);
  }
  for (std::size_t s = 0; s < n; ++s) flush(s, cfg.steps);
  const double norm = static_cast<double>(M) * static_cast<double>(cfg.steps - cfg.burn_in);
  run.abundance.resize(n);
  for (std::size_t s = 0; s < n; ++s) run.abundance[s] = occupancy[s] / norm;
  run.final_counts = counts;
  return run;
}

}  // namespace adco
