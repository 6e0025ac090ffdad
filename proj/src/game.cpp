#include "adco/game.hpp"

#include <algorithm>
#include <cmath>

#include "adco/error.hpp"

namespace adco {

std::optional<std::string> check(const GameParams& p) {
  const auto fail = [](const std::string& what) { return std::optional<std::string>(what); };
  for (double v : {p.T, p.R, p.P, p.S, p.epsilon}) {
    if (!std::isfinite(v)) return fail("payoff parameters must be finite");
  }
  if (!(p.T > p.R)) return fail("T > R violated");
  if (!(p.R > p.P)) return fail("R > P violated");
  if (!(p.P > p.S)) return fail("P > S violated");
  if (!(p.T + p.S < 2.0 * p.R)) return fail("T + S < 2R violated");
  if (!(p.epsilon >= 0.0 && p.epsilon <= 0.5)) return fail("epsilon must lie in [0, 0.5]");
  return std::nullopt;
}

void validate(const GameParams& params) {
  if (auto err = check(params)) throw InvalidArgument("invalid game parameters: " + *err);
}

double payoff_of(OutcomePair pair, const GameParams& params) {
  return params.payoff_vector()[pair.index()];
}

bool is_coordinated(std::span<const Action> outcome) {
  if (outcome.size() < 2) throw InvalidArgument("a group outcome needs at least two actions");
  return std::all_of(outcome.begin(), outcome.end(),
                     [&](Action a) { return a == outcome.front(); });
}

void rethrow_with_context(const Error& e, const std::string& prefix) {
  const std::string what = prefix + e.what();
  switch (e.kind()) {
    case ErrorKind::InvalidArgument: throw InvalidArgument(what);
    case ErrorKind::Config: throw ConfigError(what);
    case ErrorKind::Resource: throw ResourceError(what);
    case ErrorKind::Convergence: {
      const auto* c = dynamic_cast<const ConvergenceError*>(&e);
      throw ConvergenceError(what, c ? c->residual() : 0.0);
    }
    case ErrorKind::Io: throw IoError(what);
    case ErrorKind::Validation: break;
  }
  throw Error(e.kind(), what);
}

}  // namespace adco
