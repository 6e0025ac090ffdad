#include "adco/strategy.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <set>
#include <utility>

#include "adco/error.hpp"

namespace adco {

Automaton::Automaton(std::vector<double> intent, std::vector<Row> next, StateIndex initial,
                     std::string label)
    : intent_(std::move(intent)), next_(std::move(next)), initial_(initial), label_(std::move(label)) {
  if (intent_.empty()) throw InvalidArgument("automaton needs at least one state");
  if (next_.size() != intent_.size()) throw InvalidArgument("automaton transition table size mismatch");
  if (initial_ >= intent_.size()) throw InvalidArgument("automaton initial state out of range");
  for (double p : intent_) {
    if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("automaton intent outside [0, 1]");
  }
  for (const Row& row : next_) {
    for (StateIndex s : row) {
      if (s >= intent_.size()) throw InvalidArgument("automaton transition target out of range");
    }
  }
}

Automaton Automaton::minimized() const {
  // Reachable states in BFS order from the initial state.
  std::vector<int> order_of(state_count(), -1);
  std::vector<StateIndex> reach{initial_};
  order_of[initial_] = 0;
  for (std::size_t i = 0; i < reach.size(); ++i) {
    for (StateIndex s : next_[reach[i]]) {
      if (order_of[s] < 0) {
        order_of[s] = static_cast<int>(reach.size());
        reach.push_back(s);
      }
    }
  }

  // Moore refinement: start from intent classes, split by successor blocks.
  std::vector<int> block(state_count(), -1);
  {
    std::map<double, int> ids;
    for (StateIndex s : reach) {
      block[s] = ids.try_emplace(intent_[s], static_cast<int>(ids.size())).first->second;
    }
  }
  std::size_t block_count = 0;
  while (true) {
    std::map<std::array<int, 5>, int> ids;
    std::vector<int> refined(state_count(), -1);
    for (StateIndex s : reach) {
      std::array<int, 5> sig{block[s], block[next_[s][0]], block[next_[s][1]], block[next_[s][2]],
                             block[next_[s][3]]};
      refined[s] = ids.try_emplace(sig, static_cast<int>(ids.size())).first->second;
    }
    block = std::move(refined);
    if (ids.size() == block_count) break;
    block_count = ids.size();
  }

  // Renumber blocks by first appearance in BFS order.
  std::vector<int> renumber(block_count, -1);
  int count = 0;
  for (StateIndex s : reach) {
    if (renumber[block[s]] < 0) renumber[block[s]] = count++;
  }
  std::vector<double> intent(count);
  std::vector<Row> next(count);
  for (StateIndex s : reach) {
    const int b = renumber[block[s]];
    intent[b] = intent_[s];
    for (int o = 0; o < 4; ++o) next[b][o] = static_cast<StateIndex>(renumber[block[next_[s][o]]]);
  }
  return Automaton(std::move(intent), std::move(next), 0, label_);
}

bool bisimilar(const Automaton& a, StateIndex sa, const Automaton& b, StateIndex sb) {
  std::set<std::pair<StateIndex, StateIndex>> seen{{sa, sb}};
  std::deque<std::pair<StateIndex, StateIndex>> queue{{sa, sb}};
  while (!queue.empty()) {
    auto [x, y] = queue.front();
    queue.pop_front();
    if (a.intent(x) != b.intent(y)) return false;
    for (int o = 0; o < 4; ++o) {
      std::pair<StateIndex, StateIndex> succ{a.next(x, o), b.next(y, o)};
      if (seen.insert(succ).second) queue.push_back(succ);
    }
  }
  return true;
}

bool bisimilar(const Automaton& a, const Automaton& b) {
  return bisimilar(a, a.initial(), b, b.initial());
}

int aon_transition(int state, bool coordinated, int K) {
  if (!coordinated) return 0;
  return std::min(state + 1, K);
}

AdcoState adco_transition(AdcoState state, bool coordinated, int K, int t) {
  if (coordinated) {
    if (state.level < K) return {state.level + 1, 0};
    return {K, std::min(state.streak + 1, t)};
  }
  if (state.level == K && state.streak == t) return {K, 0};
  return {0, 0};
}

namespace {

std::string memory1_label(const Memory1& m) {
  std::string out = "[";
  for (int i = 0; i < 4; ++i) {
    if (i) out += ',';
    out += format_number(m.p[i]);
  }
  return out + "]";
}

std::string memory1_spec(const Memory1& m) {
  std::string out = "M1:";
  if (m.p0) out += format_number(*m.p0) + ",";
  for (int i = 0; i < 4; ++i) {
    if (i) out += ',';
    out += format_number(m.p[i]);
  }
  return out;
}

void check_probability(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw InvalidArgument(std::string(what) + " must lie in [0, 1], got " + format_number(p));
  }
}

}  // namespace

Automaton lower_to_automaton(const Memory1& m, std::string label) {
  for (double p : m.p) check_probability(p, "memory-1 probability");
  if (m.p0) check_probability(*m.p0, "first-round probability");
  if (label.empty()) label = memory1_label(m);

  // State o means "last round ended in outcome o".
  std::vector<double> intent(m.p.begin(), m.p.end());
  std::vector<Automaton::Row> next(4, Automaton::Row{0, 1, 2, 3});
  StateIndex initial = 0;
  if (m.p0) {
    auto hit = std::find(intent.begin(), intent.end(), *m.p0);
    if (hit != intent.end()) {
      initial = static_cast<StateIndex>(hit - intent.begin());
    } else {
      intent.push_back(*m.p0);
      next.push_back(Automaton::Row{0, 1, 2, 3});
      initial = 4;
    }
  }
  return Automaton(std::move(intent), std::move(next), initial, std::move(label)).minimized();
}

Automaton lower_to_automaton(const AonStrategy& s) {
  if (s.K <= 0) throw InvalidArgument("AoN threshold K must be positive");
  const int n = s.K + 1;
  std::vector<double> intent(n, 0.0);
  intent[s.K] = 1.0;
  std::vector<Automaton::Row> next(n);
  for (int i = 0; i < n; ++i) {
    for (int o = 0; o < 4; ++o) {
      next[i][o] = static_cast<StateIndex>(
          aon_transition(i, OutcomePair::from_index(o).coordinated(), s.K));
    }
  }
  // Starts as if the last K rounds were coordinated, matching the memory-1
  // convention of a preceding mutual cooperation.
  return Automaton(std::move(intent), std::move(next), static_cast<StateIndex>(s.K), "AoN_" + std::to_string(s.K));
}

Automaton lower_to_automaton(const AdcoStrategy& s) {
  if (s.K <= 0) throw InvalidArgument("ADCO threshold K must be positive");
  if (s.t <= 0) throw InvalidArgument("ADCO tolerance t must be positive");
  const int n = s.K + 1 + s.t;
  std::vector<double> intent(n, 0.0);
  std::vector<Automaton::Row> next(n);
  for (int i = 0; i < n; ++i) {
    const AdcoState state = i <= s.K ? AdcoState{i, 0} : AdcoState{s.K, i - s.K};
    intent[i] = state.level == s.K ? 1.0 : 0.0;
    for (int o = 0; o < 4; ++o) {
      next[i][o] = adco_state_index(
          adco_transition(state, OutcomePair::from_index(o).coordinated(), s.K, s.t));
    }
  }
  // Starts in A_K like AoN_K, so the two agree on every history shorter
  // than t + 1 rounds.
  return Automaton(std::move(intent), std::move(next), static_cast<StateIndex>(s.K),
                   "ADCO(K=" + std::to_string(s.K) + ",t=" + std::to_string(s.t) + ")");
}

Automaton grim_automaton() {
  // 0: cooperating, 1: triggered. Any implemented D by either side triggers.
  return Automaton({1.0, 0.0}, {Automaton::Row{0, 1, 1, 1}, Automaton::Row{1, 1, 1, 1}}, 0, "GRIM");
}

std::array<double, 4> zd_extortion_vector(double chi, const GameParams& game) {
  if (!(chi >= 1.0) || !std::isfinite(chi)) throw InvalidArgument("ZD extortion factor chi must be >= 1");
  const auto sx = game.payoff_vector();
  const std::array<double, 4> base{1.0, 1.0, 0.0, 0.0};
  std::array<double, 4> dir{};
  double phi = std::numeric_limits<double>::infinity();
  for (int o = 0; o < 4; ++o) {
    const double sy = sx[swap_outcome(o)];
    dir[o] = (sx[o] - game.P) - chi * (sy - game.P);
    if (dir[o] > 0.0) phi = std::min(phi, (1.0 - base[o]) / dir[o]);
    if (dir[o] < 0.0) phi = std::min(phi, -base[o] / dir[o]);
  }
  if (!(phi > 0.0) || !std::isfinite(phi)) throw InvalidArgument("no feasible ZD normalisation");
  std::array<double, 4> p{};
  for (int o = 0; o < 4; ++o) p[o] = std::clamp(base[o] + phi * dir[o], 0.0, 1.0);
  return p;
}

Strategy::Strategy(std::string spec, std::string label, Automaton automaton)
    : spec_(std::move(spec)), label_(std::move(label)), body_(std::move(automaton)) {}

Strategy::Strategy(std::string spec, std::string label, InfiniteMemory infinite)
    : spec_(std::move(spec)), label_(std::move(label)), body_(infinite) {}

Strategy make_memory1(const Memory1& m) {
  std::string label = memory1_label(m);
  return Strategy(memory1_spec(m), label, lower_to_automaton(m, label));
}

Strategy make_aon(int K) {
  Automaton a = lower_to_automaton(AonStrategy{K});
  std::string label = a.label();  // copied before `a` is moved
  return Strategy("AoN:K=" + std::to_string(K), std::move(label), std::move(a));
}

Strategy make_adco(int K, int t) {
  Automaton a = lower_to_automaton(AdcoStrategy{K, t});
  std::string label = a.label();
  return Strategy("ADCO:K=" + std::to_string(K) + ",t=" + std::to_string(t), std::move(label), std::move(a));
}

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

double parse_double(std::string_view text, std::string_view spec) {
  const std::string t = trim(text);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    throw InvalidArgument("bad number '" + t + "' in strategy spec '" + std::string(spec) + "'");
  }
  return v;
}

int parse_int(std::string_view text, std::string_view spec) {
  const std::string t = trim(text);
  int v = 0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    throw InvalidArgument("bad integer '" + t + "' in strategy spec '" + std::string(spec) + "'");
  }
  return v;
}

struct ParsedSpec {
  std::string name;                          // lower-cased
  std::vector<std::string> positional;
  std::map<std::string, std::string> named;  // lower-cased keys
};

ParsedSpec split_spec(std::string_view spec) {
  ParsedSpec out;
  const auto colon = spec.find(':');
  out.name = lower(trim(spec.substr(0, colon)));
  if (colon == std::string_view::npos) return out;
  std::string_view rest = spec.substr(colon + 1);
  while (true) {
    const auto comma = rest.find(',');
    const std::string item = trim(rest.substr(0, comma));
    if (item.empty()) throw InvalidArgument("empty parameter in strategy spec '" + std::string(spec) + "'");
    if (const auto eq = item.find('='); eq != std::string::npos) {
      out.named[lower(trim(item.substr(0, eq)))] = trim(item.substr(eq + 1));
    } else {
      out.positional.push_back(item);
    }
    if (comma == std::string_view::npos) break;
    rest = rest.substr(comma + 1);
  }
  return out;
}

void expect_no_params(const ParsedSpec& p, std::string_view spec) {
  if (!p.positional.empty() || !p.named.empty()) {
    throw InvalidArgument("strategy '" + std::string(spec) + "' takes no parameters");
  }
}

// Accepts either "name=value" or a single positional value.
std::string single_param(const ParsedSpec& p, const std::string& key, std::string_view spec) {
  if (p.named.size() == 1 && p.positional.empty() && p.named.count(key)) return p.named.at(key);
  if (p.named.empty() && p.positional.size() == 1) return p.positional.front();
  throw InvalidArgument("strategy spec '" + std::string(spec) + "' expects exactly one parameter '" +
                        key + "'");
}

Strategy named_memory1(const std::string& spec, const std::string& label, std::array<double, 4> p) {
  return Strategy(spec, label, lower_to_automaton(Memory1{p, std::nullopt}, label));
}

}  // namespace

Strategy make_strategy(std::string_view spec, const GameParams& game) {
  const ParsedSpec p = split_spec(spec);
  const std::string& n = p.name;
  struct Classic {
    const char* key;
    const char* name;
    std::array<double, 4> p;
  };
  static const Classic classics[] = {
      {"allc", "ALLC", {1, 1, 1, 1}},           {"alld", "ALLD", {0, 0, 0, 0}},
      {"random", "RANDOM", {0.5, 0.5, 0.5, 0.5}}, {"tft", "TFT", {1, 0, 1, 0}},
      {"wsls", "WSLS", {1, 0, 0, 1}},
  };
  for (const Classic& c : classics) {
    if (n == c.key) {
      expect_no_params(p, spec);
      return named_memory1(c.name, c.name, c.p);
    }
  }
  if (n == "grim") {
    expect_no_params(p, spec);
    return Strategy("GRIM", "GRIM", grim_automaton());
  }
  if (n == "gtft") {
    const double q = parse_double(single_param(p, "q", spec), spec);
    check_probability(q, "GTFT generosity q");
    return named_memory1("GTFT:q=" + format_number(q), "GTFT_" + format_number(q), {1, q, 1, q});
  }
  if (n == "zd") {
    const double chi = parse_double(single_param(p, "chi", spec), spec);
    return named_memory1("ZD:chi=" + format_number(chi), "ZD_" + format_number(chi),
                         zd_extortion_vector(chi, game));
  }
  if (n == "aon") return make_aon(parse_int(single_param(p, "k", spec), spec));
  if (n == "adco") {
    int K = 0, t = 0;
    if (p.positional.size() == 2 && p.named.empty()) {
      K = parse_int(p.positional[0], spec);
      t = parse_int(p.positional[1], spec);
    } else if (p.positional.empty() && p.named.size() == 2 && p.named.count("k") && p.named.count("t")) {
      K = parse_int(p.named.at("k"), spec);
      t = parse_int(p.named.at("t"), spec);
    } else {
      throw InvalidArgument("ADCO spec needs K and t, e.g. 'ADCO:K=3,t=2'");
    }
    return make_adco(K, t);
  }
  if (n == "hardmajority" || n == "hard_majority" || n == "hm") {
    expect_no_params(p, spec);
    return Strategy("HardMajority", "HardMajority", InfiniteMemory{InfiniteMemory::Kind::HardMajority, 0});
  }
  if (n == "cure") {
    const int delta = parse_int(single_param(p, "delta", spec), spec);
    if (delta < 0) throw InvalidArgument("CURE tolerance delta must be nonnegative");
    return Strategy("CURE:delta=" + std::to_string(delta), "CURE_" + std::to_string(delta),
                    InfiniteMemory{InfiniteMemory::Kind::CumulativeReciprocity, delta});
  }
  if (n == "m1") {
    if (!p.named.empty() || (p.positional.size() != 4 && p.positional.size() != 5)) {
      throw InvalidArgument("M1 spec needs 4 or 5 probabilities, e.g. 'M1:1,0,0,0.6'");
    }
    Memory1 m;
    std::size_t off = 0;
    if (p.positional.size() == 5) {
      m.p0 = parse_double(p.positional[0], spec);
      off = 1;
    }
    for (int i = 0; i < 4; ++i) m.p[i] = parse_double(p.positional[off + i], spec);
    return make_memory1(m);
  }
  throw InvalidArgument("unknown strategy '" + std::string(spec) + "'; see list-strategies");
}

const std::vector<CatalogEntry>& catalog() {
  static const std::vector<CatalogEntry> entries{
      {"ALLC", "ALLC", "always cooperate, memory-1 [1,1,1,1]"},
      {"ALLD", "ALLD", "always defect, memory-1 [0,0,0,0]"},
      {"RANDOM", "RANDOM", "cooperate with probability 0.5"},
      {"TFT", "TFT", "tit-for-tat [1,0,1,0]"},
      {"GTFT", "GTFT:q=<q>", "generous tit-for-tat [1,q,1,q]"},
      {"WSLS", "WSLS", "win-stay lose-shift [1,0,0,1]"},
      {"GRIM", "GRIM", "cooperate until any implemented defection, then defect forever"},
      {"ZD", "ZD:chi=<chi>", "extortionate zero-determinant strategy with factor chi >= 1"},
      {"HardMajority", "HardMajority",
       "defect first, then cooperate iff co-player cooperations >= defections (Monte Carlo)"},
      {"CURE", "CURE:delta=<d>",
       "cumulative reciprocity: cooperate iff defection imbalance <= d (Monte Carlo)"},
      {"AoN", "AoN:K=<K>", "All-or-None: cooperate iff the last K rounds were coordinated"},
      {"ADCO", "ADCO:K=<K>,t=<t>", "adaptive coordination: AoN_K that forgives one miscoordination "
                                   "after t further coordinated rounds"},
      {"M1", "M1:[p0,]pCC,pCD,pDC,pDD", "arbitrary memory-1 strategy"},
  };
  return entries;
}

Player::Player(const Strategy& s) {
  if (s.is_automaton()) {
    state_ = AutomatonState{&s.automaton(), s.automaton().initial()};
    return;
  }
  const InfiniteMemory& im = s.infinite();
  if (im.kind == InfiniteMemory::Kind::HardMajority) {
    state_ = HardMajorityState{};
  } else {
    state_ = CureState{0, im.delta};
  }
}

double Player::intent() const {
  struct Visitor {
    double operator()(const AutomatonState& a) const { return a.machine->intent(a.state); }
    double operator()(const HardMajorityState& h) const {
      if (h.first) return 0.0;
      return h.opp_coop >= h.opp_defect ? 1.0 : 0.0;
    }
    double operator()(const CureState& c) const { return c.imbalance <= c.delta ? 1.0 : 0.0; }
  };
  return std::visit(Visitor{}, state_);
}

void Player::observe(Action own, Action opponent) {
  struct Visitor {
    Action own, opp;
    void operator()(AutomatonState& a) const { a.state = a.machine->next(a.state, OutcomePair{own, opp}); }
    void operator()(HardMajorityState& h) const {
      h.first = false;
      (opp == kC ? h.opp_coop : h.opp_defect) += 1;
    }
    void operator()(CureState& c) const {
      c.imbalance += (opp == kD ? 1 : 0) - (own == kD ? 1 : 0);
      c.imbalance = std::max<std::int64_t>(c.imbalance, 0);
    }
  };
  std::visit(Visitor{own, opponent}, state_);
}

std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace adco
