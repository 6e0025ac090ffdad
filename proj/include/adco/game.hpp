#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>

namespace adco {

enum class Action : std::uint8_t { Cooperate = 0, Defect = 1 };

constexpr Action kC = Action::Cooperate;
constexpr Action kD = Action::Defect;

inline char to_char(Action a) { return a == kC ? 'C' : 'D'; }

// Outcome of one two-player round seen from the focal player. The index order
// CC, CD, DC, DD is used by every vector and matrix in the library.
struct OutcomePair {
  Action own = kC;
  Action opponent = kC;

  constexpr int index() const {
    return 2 * static_cast<int>(own) + static_cast<int>(opponent);
  }
  static constexpr OutcomePair from_index(int i) {
    return {static_cast<Action>(i >> 1), static_cast<Action>(i & 1)};
  }
  constexpr OutcomePair swapped() const { return {opponent, own}; }
  constexpr bool coordinated() const { return own == opponent; }
  friend constexpr bool operator==(OutcomePair, OutcomePair) = default;
};

constexpr int kCC = 0, kCD = 1, kDC = 2, kDD = 3;

// Outcome index as seen by the co-player (CD <-> DC).
constexpr int swap_outcome(int index) { return OutcomePair::from_index(index).swapped().index(); }

struct GameParams {
  double T = 5.0;
  double R = 3.0;
  double P = 1.0;
  double S = 0.0;
  double epsilon = 0.0;

  static GameParams axelrod(double epsilon) { return {5.0, 3.0, 1.0, 0.0, epsilon}; }

  // Payoff of the focal player, indexed CC, CD, DC, DD.
  std::array<double, 4> payoff_vector() const { return {R, S, T, P}; }
};

// Empty on success, otherwise names the violated inequality.
std::optional<std::string> check(const GameParams& params);

// Throws InvalidArgument with the message from check().
void validate(const GameParams& params);

double payoff_of(OutcomePair pair, const GameParams& params);

// Probability that an intended cooperation probability turns into an
// implemented cooperation under trembling hands.
constexpr double effective_coop_prob(double intent_prob, double epsilon) {
  return (1.0 - epsilon) * intent_prob + epsilon * (1.0 - intent_prob);
}

// True iff every member implemented the same action. Requires at least two.
bool is_coordinated(std::span<const Action> outcome);

}  // namespace adco
