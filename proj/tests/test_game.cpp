#include <doctest.h>

#include <vector>

#include "adco/error.hpp"
#include "adco/game.hpp"

using namespace adco;

TEST_CASE("Axelrod parameters are accepted") {
  CHECK_FALSE(check(GameParams::axelrod(0.001)).has_value());
  CHECK_NOTHROW(validate(GameParams::axelrod(0.5)));
}

TEST_CASE("invalid games name the violated condition") {
  CHECK(check(GameParams{6, 3, 1, 0.5, 0}).value() == "T + S < 2R violated");
  CHECK(check(GameParams{3, 3, 1, 0, 0}).value() == "T > R violated");
  CHECK(check(GameParams::axelrod(0.6)).has_value());
  CHECK(check(GameParams::axelrod(-0.1)).has_value());
  CHECK_THROWS_AS(validate(GameParams{6, 3, 1, 0.5, 0}), InvalidArgument);
}

TEST_CASE("one-shot payoffs") {
  const auto g = GameParams::axelrod(0.0);
  CHECK(payoff_of({kC, kC}, g) == 3);
  CHECK(payoff_of({kD, kC}, g) == 5);
  CHECK(payoff_of({kC, kD}, g) == 0);
  CHECK(payoff_of({kD, kD}, g) == 1);
}

TEST_CASE("outcome indexing and swap") {
  for (int i = 0; i < 4; ++i) {
    CHECK(OutcomePair::from_index(i).index() == i);
    CHECK(swap_outcome(swap_outcome(i)) == i);
  }
  CHECK(swap_outcome(kCD) == kDC);
  CHECK(swap_outcome(kCC) == kCC);
}

TEST_CASE("effective cooperation under trembling hands") {
  CHECK(effective_coop_prob(1.0, 0.001) == doctest::Approx(0.999).epsilon(1e-15));
  CHECK(effective_coop_prob(0.0, 0.1) == doctest::Approx(0.1).epsilon(1e-15));
  for (double e : {0.0, 0.01, 0.3, 0.5}) CHECK(effective_coop_prob(0.5, e) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(effective_coop_prob(0.7, 0.5) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(effective_coop_prob(0.3, 0.0) == 0.3);
}

TEST_CASE("group coordination") {
  const std::vector<Action> ccc{kC, kC, kC}, cdc{kC, kD, kC}, dd{kD, kD};
  CHECK(is_coordinated(ccc));
  CHECK_FALSE(is_coordinated(cdc));
  CHECK(is_coordinated(dd));
  const std::vector<Action> single{kC};
  CHECK_THROWS_AS(is_coordinated(single), InvalidArgument);
}
