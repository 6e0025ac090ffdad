#include "adco/payoff.hpp"

#include <cmath>
#include <limits>
#include <unordered_map>

#include "adco/error.hpp"
#include "adco/random.hpp"

namespace adco {

namespace {

void check_group_args(int K, int N, double epsilon) {
  if (K < 1) throw InvalidArgument("cooperation threshold K must be >= 1");
  if (N < 2) throw InvalidArgument("group size N must be >= 2");
  if (!(epsilon >= 0.0 && epsilon <= 0.5)) throw InvalidArgument("epsilon must lie in [0, 0.5]");
}

// 1 - q computed without cancellation for small epsilon.
double one_minus_coordination(int N, double epsilon) {
  return -std::expm1(N * std::log1p(-epsilon)) - std::pow(epsilon, N);
}

// {q^n, 1 - q^n} given 1 - q.
std::pair<double, double> power_pair(double one_minus_q, int n) {
  const double log_q = std::log1p(-one_minus_q);
  return {std::exp(n * log_q), -std::expm1(n * log_q)};
}

}  // namespace

double group_coordination_prob(int N, double epsilon) {
  if (N < 2) throw InvalidArgument("group size N must be >= 2");
  return std::pow(epsilon, N) + std::pow(1.0 - epsilon, N);
}

double aon_group_coop_rate(int K, int N, double epsilon) {
  check_group_args(K, N, epsilon);
  const auto [qK, one_minus_qK] = power_pair(one_minus_coordination(N, epsilon), K);
  return epsilon + (1.0 - 2.0 * epsilon) * qK;
}

double adco_group_coop_rate(int K, int t, int N, double epsilon) {
  check_group_args(K, N, epsilon);
  if (t < 1) throw InvalidArgument("tolerance t must be >= 1");
  if (epsilon == 0.0) return 1.0;
  // x0 [ (1-q^K)/(1-q) eps + q^K / ((1-q^t)(1-q)) (1-eps) ] with the common
  // factor (1-q) cancelled against x0.
  const double one_minus_q = one_minus_coordination(N, epsilon);
  const auto [qK, one_minus_qK] = power_pair(one_minus_q, K);
  const auto [qt, one_minus_qt] = power_pair(one_minus_q, t);
  const double num = one_minus_qK * one_minus_qt * epsilon + qK * (1.0 - epsilon);
  const double den = one_minus_qK * one_minus_qt + qK;
  return num / den;
}

double aon_self_payoff(int K, const GameParams& p) {
  validate(p);
  if (K < 1) throw InvalidArgument("cooperation threshold K must be >= 1");
  const double e = p.epsilon;
  const auto [cK, unused] = power_pair(one_minus_coordination(2, e), K);
  return (e * e + (1.0 - 2.0 * e) * cK) * p.R + ((1.0 - e) * (1.0 - e) - (1.0 - 2.0 * e) * cK) * p.P +
         e * (1.0 - e) * (p.T + p.S);
}

ProductChain build_product_chain(const Automaton& a, const Automaton& b, const GameParams& params,
                                 const ChainOptions& opts) {
  validate(params);
  const double eps = params.epsilon;
  const std::uint64_t nb = b.state_count();
  const std::uint64_t full = a.state_count() * nb;
  constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();

  // Dense lookup for moderate joint spaces, hash map beyond.
  const bool dense = full <= (std::uint64_t{1} << 22);
  std::vector<std::uint32_t> dense_index(dense ? full : 0, kNone);
  std::unordered_map<std::uint64_t, std::uint32_t> sparse_index;
  auto lookup = [&](std::uint64_t key) -> std::uint32_t& {
    if (dense) return dense_index[key];
    return sparse_index.try_emplace(key, kNone).first->second;
  };

  ProductChain chain;
  std::vector<Eigen::Triplet<double>> trip;
  auto visit = [&](StateIndex sa, StateIndex sb) -> std::uint32_t {
    std::uint32_t& slot = lookup(sa * nb + sb);
    if (slot == kNone) {
      if (chain.states.size() >= opts.max_states) {
        throw ResourceError("product chain of " + a.label() + " and " + b.label() + " exceeds " +
                            std::to_string(opts.max_states) +
                            " reachable joint states");
      }
      slot = static_cast<std::uint32_t>(chain.states.size());
      chain.states.emplace_back(sa, sb);
    }
    return slot;
  };

  visit(a.initial(), b.initial());
  for (std::size_t i = 0; i < chain.states.size(); ++i) {
    const auto [sa, sb] = chain.states[i];
    const double pa = effective_coop_prob(a.intent(sa), eps);
    const double pb = effective_coop_prob(b.intent(sb), eps);
    const std::array<double, 4> dist{pa * pb, pa * (1.0 - pb), (1.0 - pa) * pb, (1.0 - pa) * (1.0 - pb)};
    chain.outcome_dist.push_back(dist);
    for (int o = 0; o < 4; ++o) {
      if (dist[o] <= 0.0) continue;
      const std::uint32_t j = visit(a.next(sa, o), b.next(sb, swap_outcome(o)));
      trip.emplace_back(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j), dist[o]);
    }
  }
  const auto n = static_cast<Eigen::Index>(chain.states.size());
  chain.transition.resize(n, n);
  chain.transition.setFromTriplets(trip.begin(), trip.end());  // sums duplicates
  return chain;
}

PairPayoff chain_payoff(const ProductChain& chain, const GameParams& params, const StationaryOptions& opts) {
  StationaryOptions o = opts;
  if (!o.start_state) o.start_state = 0;
  const StationaryDistribution pi = stationary(chain.transition, o);
  std::array<double, 4> od{};
  for (std::size_t s = 0; s < chain.states.size(); ++s) {
    const double w = pi.probabilities(static_cast<Eigen::Index>(s));
    for (int k = 0; k < 4; ++k) od[k] += w * chain.outcome_dist[s][k];
  }
  const auto pay = params.payoff_vector();
  PairPayoff out;
  for (int k = 0; k < 4; ++k) {
    out.payoff_a += od[k] * pay[k];
    out.payoff_b += od[k] * pay[swap_outcome(k)];
  }
  out.coop_a = od[kCC] + od[kCD];
  out.coop_b = od[kCC] + od[kDC];
  return out;
}

PairPayoff monte_carlo_payoff(const Strategy& a, const Strategy& b, const GameParams& params,
                              const MonteCarloSettings& s) {
  validate(params);
  if (s.batches < 2) throw InvalidArgument("Monte Carlo needs at least two batches");
  if (s.burn_in >= s.rounds) throw InvalidArgument("burn-in must be shorter than the run");
  const std::uint64_t batch_len = (s.rounds - s.burn_in) / static_cast<std::uint64_t>(s.batches);
  if (batch_len == 0) throw InvalidArgument("too few Monte Carlo rounds for the batch count");

  Rng rng(s.seed);
  Player pa(a), pb(b);
  const double eps = params.epsilon;
  const auto pay = params.payoff_vector();
  auto play = [&](int& outcome) {
    const Action xa = rng.uniform() < effective_coop_prob(pa.intent(), eps) ? kC : kD;
    const Action xb = rng.uniform() < effective_coop_prob(pb.intent(), eps) ? kC : kD;
    pa.observe(xa, xb);
    pb.observe(xb, xa);
    outcome = OutcomePair{xa, xb}.index();
  };

  int outcome = 0;
  for (std::uint64_t r = 0; r < s.burn_in; ++r) play(outcome);

  std::vector<double> batch_a(s.batches), batch_b(s.batches);
  double coop_a = 0.0, coop_b = 0.0;
  for (int k = 0; k < s.batches; ++k) {
    std::array<std::uint64_t, 4> counts{};
    for (std::uint64_t r = 0; r < batch_len; ++r) {
      play(outcome);
      ++counts[outcome];
    }
    double sa = 0.0, sb = 0.0;
    for (int o = 0; o < 4; ++o) {
      sa += static_cast<double>(counts[o]) * pay[o];
      sb += static_cast<double>(counts[o]) * pay[swap_outcome(o)];
    }
    batch_a[k] = sa / static_cast<double>(batch_len);
    batch_b[k] = sb / static_cast<double>(batch_len);
    coop_a += static_cast<double>(counts[kCC] + counts[kCD]);
    coop_b += static_cast<double>(counts[kCC] + counts[kDC]);
  }

  auto mean_se = [&](const std::vector<double>& v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    const double var = ss / static_cast<double>(v.size() - 1);
    return std::pair{mean, std::sqrt(var / static_cast<double>(v.size()))};
  };
  PairPayoff out;
  out.analytic = false;
  std::tie(out.payoff_a, out.se_a) = mean_se(batch_a);
  std::tie(out.payoff_b, out.se_b) = mean_se(batch_b);
  const double measured = static_cast<double>(batch_len) * s.batches;
  out.coop_a = coop_a / measured;
  out.coop_b = coop_b / measured;
  return out;
}

PairPayoff pair_payoff(const Strategy& a, const Strategy& b, const GameParams& params, const PairOptions& opts) {
  if (a.is_automaton() && b.is_automaton()) {
    return chain_payoff(build_product_chain(a.automaton(), b.automaton(), params, opts.chain), params,
                        opts.stationary);
  }
  return monte_carlo_payoff(a, b, params, opts.monte_carlo);
}

namespace {

GroupChain shared_state_chain(const Automaton& machine, int N, double epsilon) {
  if (N < 2) throw InvalidArgument("group size N must be >= 2");
  if (!(epsilon > 0.0 && epsilon <= 0.5)) {
    throw InvalidArgument("shared-state chain needs epsilon in (0, 0.5]; use the closed form at epsilon = 0");
  }
  const double q = group_coordination_prob(N, epsilon);
  const auto n = static_cast<Eigen::Index>(machine.state_count());
  GroupChain g;
  g.transition = Eigen::MatrixXd::Zero(n, n);
  g.intent.resize(n);
  for (Eigen::Index s = 0; s < n; ++s) {
    const auto state = static_cast<StateIndex>(s);
    g.intent(s) = machine.intent(state);
    g.transition(s, machine.next(state, kCC)) += q;
    g.transition(s, machine.next(state, kCD)) += 1.0 - q;
  }
  g.stationary = stationary(g.transition);
  for (Eigen::Index s = 0; s < n; ++s) {
    g.coop_rate += g.stationary.probabilities(s) * effective_coop_prob(g.intent(s), epsilon);
  }
  return g;
}

}  // namespace

GroupChain group_shared_state_chain(const AonStrategy& s, int N, double epsilon) {
  return shared_state_chain(lower_to_automaton(s), N, epsilon);
}

GroupChain group_shared_state_chain(const AdcoStrategy& s, int N, double epsilon) {
  return shared_state_chain(lower_to_automaton(s), N, epsilon);
}

GroupEstimate monte_carlo_group_coop_rate(const Automaton& machine, int N, double epsilon,
                                          const MonteCarloSettings& s) {
  if (N < 2) throw InvalidArgument("group size N must be >= 2");
  if (!(epsilon >= 0.0 && epsilon <= 0.5)) throw InvalidArgument("epsilon must lie in [0, 0.5]");
  if (s.batches < 2) throw InvalidArgument("Monte Carlo needs at least two batches");
  if (s.burn_in >= s.rounds) throw InvalidArgument("burn-in must be shorter than the run");
  const std::uint64_t batch_len = (s.rounds - s.burn_in) / static_cast<std::uint64_t>(s.batches);
  if (batch_len == 0) throw InvalidArgument("too few Monte Carlo rounds for the batch count");

  Rng rng(s.seed);
  std::vector<StateIndex> state(static_cast<std::size_t>(N), machine.initial());
  // Returns the number of implemented cooperations in one round.
  auto play = [&] {
    int coop = 0;
    for (StateIndex st : state) coop += rng.uniform() < effective_coop_prob(machine.intent(st), epsilon) ? 1 : 0;
    const int outcome = (coop == 0 || coop == N) ? kCC : kCD;
    for (StateIndex& st : state) st = machine.next(st, outcome);
    return coop;
  };

  for (std::uint64_t r = 0; r < s.burn_in; ++r) play();
  std::vector<double> batch(static_cast<std::size_t>(s.batches));
  for (auto& b : batch) {
    std::uint64_t coop = 0;
    for (std::uint64_t r = 0; r < batch_len; ++r) coop += static_cast<std::uint64_t>(play());
    b = static_cast<double>(coop) / (static_cast<double>(batch_len) * N);
  }
  double mean = 0.0;
  for (double b : batch) mean += b;
  mean /= static_cast<double>(batch.size());
  double ss = 0.0;
  for (double b : batch) ss += (b - mean) * (b - mean);
  return {mean, std::sqrt(ss / static_cast<double>(batch.size() - 1) / static_cast<double>(batch.size()))};
}

}  // namespace adco
