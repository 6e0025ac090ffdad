#include <doctest.h>

#include <random>

#include "adco/error.hpp"
#include "adco/payoff.hpp"
#include "adco/strategy.hpp"
#include "oracles.hpp"

using namespace adco;

namespace {

// Drives an automaton along an implemented history.
struct Walker {
  const Automaton& a;
  StateIndex s;
  explicit Walker(const Automaton& m) : a(m), s(m.initial()) {}
  double intent() const { return a.intent(s); }
  void step(int outcome) { s = a.next(s, outcome); }
};

}  // namespace

TEST_CASE("AoN transitions") {
  CHECK(aon_transition(0, true, 4) == 1);
  CHECK(aon_transition(4, true, 4) == 4);
  CHECK(aon_transition(3, false, 4) == 0);
}

TEST_CASE("ADCO transitions") {
  const int K = 3, t = 2;
  CHECK(adco_transition({K, t}, false, K, t) == AdcoState{K, 0});
  CHECK(adco_transition({K, 1}, true, K, t) == AdcoState{K, 2});
  CHECK(adco_transition({K, 1}, false, K, t) == AdcoState{0, 0});
  CHECK(adco_transition({K, 0}, true, K, t) == AdcoState{K, 1});
  CHECK(adco_transition({K, t}, true, K, t) == AdcoState{K, t});
  CHECK(adco_transition({1, 0}, true, K, t) == AdcoState{2, 0});
  CHECK(adco_transition({K, 0}, false, K, t) == AdcoState{0, 0});
}

TEST_CASE("AoN automaton shape and K-step closure") {
  for (int K : {1, 2, 5, 16}) {
    const Automaton a = lower_to_automaton(AonStrategy{K});
    REQUIRE(a.state_count() == static_cast<std::size_t>(K + 1));
    int cooperative = 0;
    for (StateIndex s = 0; s < a.state_count(); ++s) cooperative += a.intent(s) == 1.0;
    CHECK(cooperative == 1);
    for (StateIndex s = 0; s < a.state_count(); ++s) {
      StateIndex x = s;
      for (int k = 0; k < K; ++k) x = a.next(x, k % 2 ? kCC : kDD);
      CHECK(a.intent(x) == 1.0);
    }
  }
  CHECK_THROWS_AS(lower_to_automaton(AonStrategy{0}), InvalidArgument);
}

TEST_CASE("ADCO automaton shape and forgiveness") {
  for (auto [K, t] : {std::pair{1, 1}, {3, 2}, {5, 4}}) {
    const Automaton a = lower_to_automaton(AdcoStrategy{K, t});
    REQUIRE(a.state_count() == static_cast<std::size_t>(K + 1 + t));
    const StateIndex top = adco_state_index({K, t});
    CHECK(a.intent(top) == 1.0);
    // One miscoordination then one coordinated round leaves it cooperating.
    CHECK(a.intent(a.next(a.next(top, kCD), kCC)) == 1.0);
    CHECK(a.intent(a.next(top, kDC)) == 1.0);
    for (int i = 0; i < K; ++i) CHECK(a.intent(adco_state_index({i, 0})) == 0.0);
  }
  CHECK_THROWS_AS(lower_to_automaton(AdcoStrategy{3, 0}), InvalidArgument);
  CHECK_THROWS_AS(lower_to_automaton(AdcoStrategy{0, 2}), InvalidArgument);
}

TEST_CASE("ADCO(K,t) and AoN_K agree on histories no longer than t") {
  std::mt19937_64 gen(11);
  for (auto [K, t] : {std::pair{2, 5}, {4, 8}, {1, 12}}) {
    const Automaton adco = lower_to_automaton(AdcoStrategy{K, t});
    const Automaton aon = lower_to_automaton(AonStrategy{K});
    for (int h = 0; h < 2000; ++h) {
      Walker x(adco), y(aon);
      for (int r = 0; r <= t; ++r) {
        REQUIRE(x.intent() == y.intent());
        const int o = static_cast<int>(gen() % 4);
        x.step(o);
        y.step(o);
      }
    }
  }
}

TEST_CASE("automata agree with the history-based definitions") {
  std::mt19937_64 gen(5);
  for (auto [K, t] : {std::pair{1, 1}, {3, 2}, {6, 3}}) {
    const Automaton aon = lower_to_automaton(AonStrategy{K});
    const Automaton adco = lower_to_automaton(AdcoStrategy{K, t});
    oracle::HistoryAon ha(K);
    oracle::RunAdco ra(K, t);
    Walker x(aon), y(adco);
    for (int r = 0; r < 20000; ++r) {
      REQUIRE(x.intent() == ha.intent());
      REQUIRE(y.intent() == ra.intent());
      // Bias towards coordination so the cooperative states are visited.
      const int o = gen() % 5 < 4 ? (gen() % 2 ? kCC : kDD) : (gen() % 2 ? kCD : kDC);
      const auto pair = OutcomePair::from_index(o);
      x.step(o);
      y.step(o);
      ha.see(pair.own == kC, pair.opponent == kC);
      ra.see(pair.own == kC, pair.opponent == kC);
    }
  }
}

TEST_CASE("WSLS lowers to the AoN_1 machine") {
  const auto g = GameParams::axelrod(0.01);
  const Strategy wsls = make_strategy("WSLS", g);
  const Automaton aon1 = lower_to_automaton(AonStrategy{1});
  CHECK(wsls.automaton().state_count() == 2);
  CHECK(bisimilar(wsls.automaton(), aon1));
  CHECK_FALSE(bisimilar(make_strategy("TFT", g).automaton(), aon1));
}

TEST_CASE("memory-1 lowering") {
  const auto g = GameParams::axelrod(0.0);
  CHECK(make_strategy("ALLD", g).automaton().state_count() == 1);
  CHECK(make_strategy("ALLD", g).automaton().intent(0) == 0.0);
  CHECK(make_strategy("ALLC", g).automaton().state_count() == 1);

  // Round trip: after each outcome the automaton's intent is p[outcome].
  const Memory1 m{{0.9, 0.1, 0.6, 0.3}, std::nullopt};
  const Automaton a = lower_to_automaton(m, "probe");
  std::mt19937_64 gen(3);
  Walker w(a);
  CHECK(w.intent() == 0.9);  // starts as after mutual cooperation
  for (int r = 0; r < 1000; ++r) {
    const int o = static_cast<int>(gen() % 4);
    w.step(o);
    CHECK(w.intent() == m.p[static_cast<std::size_t>(o)]);
  }

  const Automaton first = lower_to_automaton(Memory1{{1, 0, 0, 1}, 0.25}, "p0");
  CHECK(first.intent(first.initial()) == 0.25);
}

TEST_CASE("GRIM matches a direct trigger simulation") {
  const Strategy grim = make_strategy("GRIM", GameParams::axelrod(0.0));
  CHECK(grim.automaton().state_count() == 2);
  std::mt19937_64 gen(17);
  for (int h = 0; h < 200; ++h) {
    Walker w(grim.automaton());
    oracle::Grim direct;
    for (int r = 0; r < 1000; ++r) {
      REQUIRE(w.intent() == direct.intent());
      // Mostly cooperative histories so the trigger fires at varied times.
      const bool own_c = gen() % 400 != 0, other_c = gen() % 400 != 0;
      w.step(OutcomePair{own_c ? kC : kD, other_c ? kC : kD}.index());
      direct.see(own_c, other_c);
    }
  }
}

TEST_CASE("catalog specs and labels") {
  const auto g = GameParams::axelrod(0.01);
  CHECK(make_strategy("gtft:q=0.2", g).spec() == "GTFT:q=0.2");
  CHECK(make_strategy("GTFT:q=0.2", g).label() == "GTFT_0.2");
  CHECK(make_strategy("ADCO:K=3,t=2", g).spec() == "ADCO:K=3,t=2");
  CHECK(make_strategy("AoN:K=16", g).spec() == "AoN:K=16");
  CHECK(make_aon(16).label() == "AoN_16");
  CHECK(make_adco(3, 2).label() == "ADCO(K=3,t=2)");
  CHECK(make_strategy("M1:1,0,0,0.6", g).label() == "[1,0,0,0.6]");
  CHECK(make_strategy("M1:1,0,0,0.6", g).spec() == "M1:1,0,0,0.6");
  CHECK_FALSE(make_strategy("HardMajority", g).is_automaton());
  CHECK_FALSE(make_strategy("CURE:delta=2", g).is_automaton());

  const Automaton gtft = make_strategy("GTFT:q=0.2", g).automaton();
  const Automaton rnd = make_strategy("RANDOM", g).automaton();
  CHECK(rnd.state_count() == 1);
  CHECK(rnd.intent(0) == 0.5);
  Walker w(gtft);
  w.step(kCD);
  CHECK(w.intent() == 0.2);
  w.step(kDC);
  CHECK(w.intent() == 1.0);

  CHECK_THROWS_AS(make_strategy("NOPE", g), InvalidArgument);
  CHECK_THROWS_AS(make_strategy("GTFT:q=1.5", g), InvalidArgument);
  CHECK_THROWS_AS(make_strategy("ZD:chi=0.5", g), InvalidArgument);
  CHECK_THROWS_AS(make_strategy("ALLC:x=1", g), InvalidArgument);
  CHECK_THROWS_AS(make_strategy("M1:1,0,0", g), InvalidArgument);
  CHECK_THROWS_AS(make_strategy("AoN:K=0", g), InvalidArgument);
}

TEST_CASE("extortionate ZD vector") {
  const auto g = GameParams::axelrod(0.0);
  const auto p = zd_extortion_vector(2.0, g);
  CHECK(p[0] == doctest::Approx(7.0 / 9.0).epsilon(1e-14));
  CHECK(p[1] == doctest::Approx(0.0));
  CHECK(p[2] == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(p[3] == doctest::Approx(0.0));

  // The enforced relation pi_X - P = chi (pi_Y - P) holds against arbitrary
  // reactive opponents.
  std::mt19937_64 gen(23);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  for (double chi : {2.0, 3.0, 4.0}) {
    const Strategy zd = make_strategy("ZD:chi=" + format_number(chi), g);
    for (int k = 0; k < 100; ++k) {
      const Strategy opp = make_memory1(Memory1{{u(gen), u(gen), u(gen), u(gen)}, std::nullopt});
      const PairPayoff r = pair_payoff(zd, opp, g);
      CHECK(r.payoff_a - g.P == doctest::Approx(chi * (r.payoff_b - g.P)).epsilon(1e-9).scale(1.0));
    }
  }
}

TEST_CASE("players reproduce the infinite-memory rules") {
  const auto g = GameParams::axelrod(0.0);
  const Strategy hm = make_strategy("HardMajority", g);
  const Strategy cure = make_strategy("CURE:delta=2", g);
  std::mt19937_64 gen(29);
  Player ph(hm), pc(cure);
  oracle::Majority oh;
  oracle::Cure oc(2);
  for (int r = 0; r < 5000; ++r) {
    REQUIRE(ph.intent() == oh.intent());
    REQUIRE(pc.intent() == oc.intent());
    const bool a = gen() % 3 != 0, b = gen() % 2 != 0;
    ph.observe(a ? kC : kD, b ? kC : kD);
    pc.observe(a ? kC : kD, b ? kC : kD);
    oh.see(a, b);
    oc.see(a, b);
  }
}
