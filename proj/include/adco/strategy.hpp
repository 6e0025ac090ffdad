#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "adco/game.hpp"

namespace adco {

using StateIndex = std::uint32_t;

// Deterministic finite automaton with a cooperation intent per state. The
// successor state depends only on the implemented outcome of the round, seen
// from the owner's side; noise is applied by whoever drives the automaton.
class Automaton {
 public:
  using Row = std::array<StateIndex, 4>;

  Automaton(std::vector<double> intent, std::vector<Row> next, StateIndex initial,
            std::string label);

  std::size_t state_count() const { return intent_.size(); }
  double intent(StateIndex s) const { return intent_[s]; }
  StateIndex next(StateIndex s, int outcome) const { return next_[s][outcome]; }
  StateIndex next(StateIndex s, OutcomePair outcome) const { return next(s, outcome.index()); }
  StateIndex initial() const { return initial_; }
  const std::string& label() const { return label_; }
  std::span<const double> intents() const { return intent_; }

  // Drops states unreachable from the initial state and merges behaviourally
  // equivalent ones (Moore partition refinement). State 0 of the result is the
  // initial state; the rest are numbered in breadth-first order.
  Automaton minimized() const;

  // True iff the two machines emit the same intent on every implemented
  // history when started from their initial states.
  friend bool bisimilar(const Automaton& a, const Automaton& b);
  friend bool bisimilar(const Automaton& a, StateIndex sa, const Automaton& b, StateIndex sb);

 private:
  std::vector<double> intent_;
  std::vector<Row> next_;
  StateIndex initial_;
  std::string label_;
};

// Reactive strategy [p_CC, p_CD, p_DC, p_DD] with an optional first-round
// probability. p0 only selects the start state; long-run payoffs ignore it.
struct Memory1 {
  std::array<double, 4> p{};
  std::optional<double> p0;
};

// All-or-None with cooperation threshold K: states A_0..A_K, cooperates in A_K.
// The lowered automaton starts in A_K.
struct AonStrategy {
  int K = 1;
};

// Adaptive coordination: A_0..A_K followed by the observation states
// A_{K,1}..A_{K,t}. Cooperates from A_K on and starts in A_K.
struct AdcoStrategy {
  int K = 1;
  int t = 1;
};

// A_i is {level = i, streak = 0}; A_{K,j} is {level = K, streak = j}.
struct AdcoState {
  int level = 0;
  int streak = 0;
  friend bool operator==(AdcoState, AdcoState) = default;
};

int aon_transition(int state, bool coordinated, int K);
AdcoState adco_transition(AdcoState state, bool coordinated, int K, int t);
inline StateIndex adco_state_index(AdcoState s) { return static_cast<StateIndex>(s.level + s.streak); }

Automaton lower_to_automaton(const Memory1& m, std::string label = {});
Automaton lower_to_automaton(const AonStrategy& s);
Automaton lower_to_automaton(const AdcoStrategy& s);
Automaton grim_automaton();

// Extortionate zero-determinant vector enforcing pi_X - P = chi (pi_Y - P),
// with the largest normalisation that keeps all probabilities in [0, 1].
std::array<double, 4> zd_extortion_vector(double chi, const GameParams& game);

// Strategies whose state is an unbounded counter. They only have Monte Carlo
// payoffs.
struct InfiniteMemory {
  enum class Kind { HardMajority, CumulativeReciprocity };
  Kind kind = Kind::HardMajority;
  int delta = 0;
};

class Strategy {
 public:
  Strategy(std::string spec, std::string label, Automaton automaton);
  Strategy(std::string spec, std::string label, InfiniteMemory infinite);

  // Canonical spec string, e.g. "ADCO:K=3,t=2". Parsing it reproduces the
  // strategy.
  const std::string& spec() const { return spec_; }
  const std::string& label() const { return label_; }

  bool is_automaton() const { return std::holds_alternative<Automaton>(body_); }
  const Automaton& automaton() const { return std::get<Automaton>(body_); }
  const InfiniteMemory& infinite() const { return std::get<InfiniteMemory>(body_); }

 private:
  std::string spec_;
  std::string label_;
  std::variant<Automaton, InfiniteMemory> body_;
};

// Builds a strategy from its spec string. Names are case-insensitive:
//   ALLC ALLD RANDOM TFT WSLS GRIM HardMajority
//   GTFT:q=0.2  ZD:chi=3  CURE:delta=2  AoN:K=16  ADCO:K=3,t=2
//   M1:pCC,pCD,pDC,pDD  or  M1:p0,pCC,pCD,pDC,pDD
// ZD depends on the payoffs, hence the game argument.
Strategy make_strategy(std::string_view spec, const GameParams& game);

Strategy make_memory1(const Memory1& m);
Strategy make_aon(int K);
Strategy make_adco(int K, int t);

struct CatalogEntry {
  std::string name;
  std::string syntax;
  std::string description;
};

const std::vector<CatalogEntry>& catalog();

// Round-by-round simulator usable for every strategy kind.
class Player {
 public:
  explicit Player(const Strategy& s);

  double intent() const;
  void observe(Action own, Action opponent);

 private:
  struct AutomatonState {
    const Automaton* machine;
    StateIndex state;
  };
  struct HardMajorityState {
    std::uint64_t opp_coop = 0;
    std::uint64_t opp_defect = 0;
    bool first = true;
  };
  struct CureState {
    std::int64_t imbalance = 0;
    int delta = 0;
  };
  std::variant<AutomatonState, HardMajorityState, CureState> state_;
};

// Shortest round-trip decimal form, used in spec strings.
std::string format_number(double v);

}  // namespace adco
