#include <algorithm>
#include <cmath>
#include <sstream>

#include "adco/csv.hpp"
#include "adco/error.hpp"
#include "adco/experiment.hpp"
#include "adco/random.hpp"

namespace adco {

namespace {

constexpr double kExact = 1e-10;
constexpr double kStochastic = 1e-12;
constexpr double kZ = 3.0;

CheckResult make_check(std::string name, double value, double threshold, std::string detail) {
  CheckResult r;
  r.name = std::move(name);
  r.value = value;
  r.threshold = threshold;
  r.passed = value <= threshold;
  r.detail = std::move(detail);
  return r;
}

Memory1 random_memory1(Rng& rng) {
  Memory1 m;
  for (double& p : m.p) p = rng.uniform();
  return m;
}

double log_uniform(Rng& rng, double lo, double hi) {
  return std::exp(std::log(lo) + rng.uniform() * (std::log(hi) - std::log(lo)));
}

int uniform_int(Rng& rng, int lo, int hi) {
  return lo + static_cast<int>(rng.below(static_cast<std::uint64_t>(hi - lo + 1)));
}

// The roster used by the structural checks: classics, the focal strategy,
// a few AoN_K and random reactive strategies.
std::vector<Strategy> structural_roster(Rng& rng, const GameParams& game) {
  std::vector<Strategy> out = classics_roster(game);
  out.push_back(make_adco(3, 2));
  out.push_back(make_adco(5, 1));
  for (int K : {1, 2, 5, 10}) out.push_back(make_aon(K));
  for (int k = 0; k < 6; ++k) out.push_back(make_memory1(random_memory1(rng)));
  return out;
}

CheckResult closed_forms_vs_chain(Rng& rng) {
  double worst = 0.0;
  std::string where;
  for (int k = 0; k < 50; ++k) {
    const int K = uniform_int(rng, 1, 50), t = uniform_int(rng, 1, 10), N = uniform_int(rng, 2, 20);
    const double eps = log_uniform(rng, 1e-4, 0.3);
    const double d_aon =
        std::abs(aon_group_coop_rate(K, N, eps) - group_shared_state_chain(AonStrategy{K}, N, eps).coop_rate);
    const double d_adco = std::abs(adco_group_coop_rate(K, t, N, eps) -
                                   group_shared_state_chain(AdcoStrategy{K, t}, N, eps).coop_rate);
    if (std::max(d_aon, d_adco) > worst) {
      worst = std::max(d_aon, d_adco);
      where = "K=" + std::to_string(K) + " t=" + std::to_string(t) + " N=" + std::to_string(N) +
              " epsilon=" + csv::format_double(eps);
    }
  }
  return make_check("group-rate-closed-form-vs-chain", worst, kExact, "50 random tuples; worst at " + where);
}

CheckResult closed_forms_vs_monte_carlo(Rng& rng, const ValidationOptions& opts) {
  double worst = 0.0;
  for (int k = 0; k < 5; ++k) {
    const int K = uniform_int(rng, 1, 50), t = uniform_int(rng, 1, 10), N = uniform_int(rng, 2, 20);
    const double eps = log_uniform(rng, 1e-4, 0.3);
    MonteCarloSettings mc;
    mc.rounds = opts.mc_rounds;
    mc.burn_in = std::min<std::uint64_t>(10'000, opts.mc_rounds / 10);
    mc.seed = derive_seed(opts.seed, 2 * static_cast<std::uint64_t>(k));
    const GroupEstimate aon = monte_carlo_group_coop_rate(lower_to_automaton(AonStrategy{K}), N, eps, mc);
    mc.seed = derive_seed(opts.seed, 2 * static_cast<std::uint64_t>(k) + 1);
    const GroupEstimate adco = monte_carlo_group_coop_rate(lower_to_automaton(AdcoStrategy{K, t}), N, eps, mc);
    auto z = [](double exact, const GroupEstimate& g) {
      if (g.se == 0.0) return exact == g.coop_rate ? 0.0 : INFINITY;
      return std::abs(exact - g.coop_rate) / g.se;
    };
    worst = std::max({worst, z(aon_group_coop_rate(K, N, eps), aon), z(adco_group_coop_rate(K, t, N, eps), adco)});
  }
  return make_check("group-rate-closed-form-vs-monte-carlo", worst, kZ,
                    "5 random tuples, " + std::to_string(opts.mc_rounds) + " rounds; max z-score");
}

CheckResult self_payoff_vs_chain() {
  double worst = 0.0;
  for (double eps : {1e-3, 1e-2}) {
    const GameParams g = GameParams::axelrod(eps);
    for (int K = 1; K <= 30; ++K) {
      const Automaton a = lower_to_automaton(AonStrategy{K});
      const PairPayoff p = chain_payoff(build_product_chain(a, a, g), g);
      worst = std::max(worst, std::abs(aon_self_payoff(K, g) - p.payoff_a));
    }
  }
  return make_check("aon-self-payoff-vs-product-chain", worst, kExact, "K=1..30, epsilon in {0.001, 0.01}");
}

CheckResult trivial_limits(Rng& rng) {
  double worst = 0.0;
  const GameParams g0 = GameParams::axelrod(0.0);
  const GameParams gh = GameParams::axelrod(0.5);
  const double mean_payoff = (gh.T + gh.R + gh.P + gh.S) / 4.0;
  for (int K : {1, 3, 10}) {
    for (int N : {2, 5}) {
      worst = std::max(worst, std::abs(aon_group_coop_rate(K, N, 0.0) - 1.0));
      worst = std::max(worst, std::abs(adco_group_coop_rate(K, 2, N, 0.0) - 1.0));
      worst = std::max(worst, std::abs(aon_group_coop_rate(K, N, 0.5) - 0.5));
      worst = std::max(worst, std::abs(adco_group_coop_rate(K, 2, N, 0.5) - 0.5));
    }
    const Automaton a = lower_to_automaton(AonStrategy{K});
    worst = std::max(worst, std::abs(aon_self_payoff(K, g0) - g0.R));
    worst = std::max(worst, std::abs(aon_self_payoff(K, gh) - mean_payoff));
    worst = std::max(worst, std::abs(chain_payoff(build_product_chain(a, a, g0), g0).payoff_a - g0.R));
    worst = std::max(worst, std::abs(chain_payoff(build_product_chain(a, a, gh), gh).payoff_a - mean_payoff));
  }
  for (int k = 0; k < 100; ++k) {
    Payoff2x2 p{5 * rng.uniform(), 5 * rng.uniform(), 5 * rng.uniform(), 5 * rng.uniform()};
    const int M = uniform_int(rng, 2, 500);
    worst = std::max(worst, std::abs(fixation_probability(p, M, 0.0) - 1.0 / M));
  }
  return make_check("trivial-limits", worst, kStochastic,
                    "epsilon=0 and 0.5 rates and self-payoffs; beta=0 fixation = 1/M");
}

CheckResult wsls_is_aon1(Rng& rng, const GameParams& game) {
  const Strategy wsls = make_strategy("WSLS", game);
  const Automaton aon1 = lower_to_automaton(AonStrategy{1});
  const Automaton& w = wsls.automaton();
  double worst = bisimilar(w, aon1) ? 0.0 : 1.0;
  for (int h = 0; h < 1000; ++h) {
    StateIndex sw = w.initial(), sa = aon1.initial();
    for (int r = 0; r < 100; ++r) {
      worst = std::max(worst, std::abs(w.intent(sw) - aon1.intent(sa)));
      const int o = static_cast<int>(rng.below(4));
      sw = w.next(sw, o);
      sa = aon1.next(sa, o);
    }
  }
  const Strategy a1 = make_aon(1);
  for (int k = 0; k < 20; ++k) {
    const Strategy opp = make_memory1(random_memory1(rng));
    const PairPayoff x = pair_payoff(wsls, opp, game);
    const PairPayoff y = pair_payoff(a1, opp, game);
    worst = std::max({worst, std::abs(x.payoff_a - y.payoff_a), std::abs(x.payoff_b - y.payoff_b)});
  }
  return make_check("wsls-equals-aon1", worst, kStochastic,
                    "bisimulation, 1000 random 100-round histories, 20 random reactive opponents");
}

std::vector<CheckResult> chain_checks(const std::vector<Strategy>& roster, const GameParams& game) {
  double rows = 0.0, residual = 0.0, symmetry = 0.0;
  for (std::size_t i = 0; i < roster.size(); ++i) {
    for (std::size_t j = i; j < roster.size(); ++j) {
      const Automaton& a = roster[i].automaton();
      const Automaton& b = roster[j].automaton();
      const ProductChain ab = build_product_chain(a, b, game);
      const ProductChain ba = build_product_chain(b, a, game);
      rows = std::max({rows, row_sum_error(ab.transition), row_sum_error(ba.transition)});
      StationaryOptions so;
      so.start_state = 0;
      residual = std::max(residual, stationary(ab.transition, so).residual);
      const PairPayoff x = chain_payoff(ab, game);
      const PairPayoff y = chain_payoff(ba, game);
      symmetry = std::max({symmetry, std::abs(x.payoff_a - y.payoff_b), std::abs(x.payoff_b - y.payoff_a),
                           std::abs(x.coop_a - y.coop_b), std::abs(x.coop_b - y.coop_a)});
    }
  }
  const std::string detail = std::to_string(roster.size()) + " strategies, all pairs";
  return {make_check("product-chain-rows-stochastic", rows, kStochastic, detail),
          make_check("product-chain-stationary-residual", residual, kExact, detail),
          make_check("product-chain-exchange-symmetry", symmetry, kExact, detail)};
}

std::vector<CheckResult> matrix_checks(const PayoffMatrix& m) {
  double range = 0.0;
  for (Eigen::Index i = 0; i < m.payoff.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.payoff.cols(); ++j) {
      const double p = m.payoff(i, j), c = m.coop(i, j);
      range = std::max({range, m.game.S - p, p - m.game.T, -c, c - 1.0});
      if (!std::isfinite(p) || !std::isfinite(c)) range = INFINITY;
    }
  }
  const EmbeddedChain chain = embedded_chain(m.payoff, 100, 1.0);
  const double rows = row_sum_error(chain.transition);
  const double total = std::abs(chain.stationary.probabilities.sum() - 1.0);
  double fix = 0.0;
  for (Eigen::Index i = 0; i < chain.fixation.rows(); ++i) {
    for (Eigen::Index j = 0; j < chain.fixation.cols(); ++j) {
      if (i == j) continue;
      const double f = chain.fixation(i, j);
      if (!(f > 0.0 && f < 1.0)) fix = 1.0;
    }
  }
  const std::string detail = std::to_string(m.size()) + " strategies, M=100, beta=1";
  return {make_check("payoffs-within-S-T", std::max(range, 0.0), 0.0, "payoffs in [S, T], cooperation in [0, 1]"),
          make_check("embedded-chain-rows-stochastic", rows, kStochastic, detail),
          make_check("embedded-chain-stationary-residual", chain.stationary.residual, kExact, detail),
          make_check("abundances-sum-to-one", total, kStochastic, detail),
          make_check("fixation-probabilities-in-open-unit-interval", fix, 0.0, detail)};
}

CheckResult replicator_simplex(Rng& rng) {
  double worst = 0.0;
  for (int k = 0; k < 10'000; ++k) {
    const Payoff2x2 p{0.01 + 5 * rng.uniform(), 0.01 + 5 * rng.uniform(), 0.01 + 5 * rng.uniform(),
                      0.01 + 5 * rng.uniform()};
    const double x = rng.uniform();
    const double y = replicator_step(x, p);
    worst = std::max({worst, -y, y - 1.0});
    if (replicator_step(0.0, p) != 0.0 || replicator_step(1.0, p) != 1.0) worst = INFINITY;
  }
  return make_check("replicator-simplex", std::max(worst, 0.0), 0.0,
                    "10000 random states and positive payoffs; 0 and 1 fixed exactly");
}

CheckResult determinism(const ValidationOptions& opts, const GameParams& game) {
  double diff = 0.0;
  MonteCarloSettings mc;
  mc.rounds = 200'000;
  mc.burn_in = 1'000;
  mc.seed = derive_seed(opts.seed, "determinism", "monte-carlo");
  const Strategy hm = make_strategy("HardMajority", game);
  const Strategy cure = make_strategy("CURE:delta=2", game);
  const PairPayoff a = monte_carlo_payoff(hm, cure, game, mc);
  const PairPayoff b = monte_carlo_payoff(hm, cure, game, mc);
  diff = std::max({diff, std::abs(a.payoff_a - b.payoff_a), std::abs(a.se_a - b.se_a)});

  std::vector<Strategy> roster = classics_roster(game);
  roster.push_back(hm);
  MatrixOptions mo;
  mo.pair.monte_carlo = mc;
  mo.master_seed = opts.seed;
  const PayoffMatrix m1 = payoff_matrix(roster, game, mo);
  const PayoffMatrix m2 = payoff_matrix(roster, game, mo);
  diff = std::max(diff, (m1.payoff - m2.payoff).cwiseAbs().maxCoeff());

  SimConfig sim;
  sim.steps = 100'000;
  sim.seed = derive_seed(opts.seed, "determinism", "agent");
  sim.record_every = 1'000;
  const AgentRun r1 = agent_simulation(sim, m1.payoff);
  const AgentRun r2 = agent_simulation(sim, m1.payoff);
  if (r1.counts != r2.counts || r1.final_counts != r2.final_counts) diff = INFINITY;
  for (std::size_t s = 0; s < r1.abundance.size(); ++s) diff = std::max(diff, std::abs(r1.abundance[s] - r2.abundance[s]));
  return make_check("determinism-under-fixed-seed", diff, 0.0,
                    "Monte Carlo payoffs, payoff matrix with simulated pairs, agent simulation");
}

CheckResult monte_carlo_vs_chain(Rng& rng, const ValidationOptions& opts, const GameParams& game) {
  double worst = 0.0;
  for (int k = 0; k < 5; ++k) {
    const Strategy a = make_adco(uniform_int(rng, 1, 6), uniform_int(rng, 1, 4));
    const Strategy b = make_memory1(random_memory1(rng));
    MonteCarloSettings mc;
    mc.rounds = opts.mc_rounds;
    mc.burn_in = std::min<std::uint64_t>(10'000, opts.mc_rounds / 10);
    mc.seed = derive_seed(opts.seed, a.spec(), b.spec());
    const PairPayoff exact = pair_payoff(a, b, game);
    const PairPayoff sim = monte_carlo_payoff(a, b, game, mc);
    worst = std::max({worst, std::abs(exact.payoff_a - sim.payoff_a) / sim.se_a,
                      std::abs(exact.payoff_b - sim.payoff_b) / sim.se_b});
  }
  return make_check("pair-payoff-chain-vs-monte-carlo", worst, kZ,
                    "5 random ADCO vs reactive pairs, " + std::to_string(opts.mc_rounds) + " rounds; max z-score");
}

}  // namespace

std::vector<CheckResult> run_validation(const ValidationOptions& opts,
                                        const std::function<void(const CheckResult&)>& on_check) {
  if (opts.mc_rounds < 10'000) throw InvalidArgument("validation needs at least 10000 Monte Carlo rounds");
  std::vector<CheckResult> out;
  auto emit = [&](CheckResult r) {
    if (on_check) on_check(r);
    out.push_back(std::move(r));
  };
  // Every check draws from its own stream so that checks can be reordered.
  auto stream = [&](std::uint64_t k) { return Rng(derive_seed(opts.seed, k)); };
  const GameParams game = GameParams::axelrod(0.01);

  Rng r1 = stream(1);
  emit(closed_forms_vs_chain(r1));
  Rng r2 = stream(2);
  emit(closed_forms_vs_monte_carlo(r2, opts));
  emit(self_payoff_vs_chain());
  Rng r3 = stream(3);
  emit(trivial_limits(r3));
  Rng r4 = stream(4);
  emit(wsls_is_aon1(r4, game));
  Rng r5 = stream(5);
  const std::vector<Strategy> roster = structural_roster(r5, game);
  for (auto& c : chain_checks(roster, game)) emit(std::move(c));
  for (auto& c : matrix_checks(payoff_matrix(roster, game))) emit(std::move(c));
  Rng r6 = stream(6);
  emit(replicator_simplex(r6));
  emit(determinism(opts, game));
  Rng r7 = stream(7);
  emit(monte_carlo_vs_chain(r7, opts, game));
  return out;
}

}  // namespace adco
