#include "adco/adco.h"

#include <exception>
#include <filesystem>
#include <memory>
#include <new>
#include <string>

#include "adco/dynamics.hpp"
#include "adco/error.hpp"
#include "adco/experiment.hpp"
#include "adco/payoff.hpp"
#include "adco/strategy.hpp"

struct adco_strategy {
  adco::Strategy strategy;
};

struct adco_payoff_matrix {
  adco::PayoffMatrix matrix;
};

namespace {

thread_local std::string g_last_error;

adco_status status_of(adco::ErrorKind k) {
  switch (k) {
    case adco::ErrorKind::InvalidArgument: return ADCO_ERR_INVALID_ARGUMENT;
    case adco::ErrorKind::Config: return ADCO_ERR_CONFIG;
    case adco::ErrorKind::Resource: return ADCO_ERR_RESOURCE;
    case adco::ErrorKind::Convergence: return ADCO_ERR_CONVERGENCE;
    case adco::ErrorKind::Validation: return ADCO_ERR_VALIDATION;
    case adco::ErrorKind::Io: return ADCO_ERR_IO;
  }
  return ADCO_ERR_INTERNAL;
}

// Runs f, translating exceptions into status codes.
template <class F>
adco_status guarded(F&& f) {
  try {
    g_last_error.clear();
    return f();
  } catch (const adco::Error& e) {
    g_last_error = e.what();
    return status_of(e.kind());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return ADCO_ERR_RESOURCE;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return ADCO_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return ADCO_ERR_INTERNAL;
  }
}

template <class... P>
void require(P*... ptrs) {
  if (((ptrs == nullptr) || ...)) throw adco::InvalidArgument("null pointer argument");
}

adco::GameParams to_game(const adco_game* g) {
  require(g);
  adco::GameParams p{g->T, g->R, g->P, g->S, g->epsilon};
  adco::validate(p);
  return p;
}

adco::MonteCarloSettings to_mc(const adco_mc_settings* mc) {
  adco::MonteCarloSettings s;
  if (mc) {
    s.rounds = mc->rounds;
    s.burn_in = mc->burn_in;
    s.batches = mc->batches;
    s.seed = mc->seed;
  }
  return s;
}

void to_pair(const adco::PairPayoff& p, adco_pair_result* out) {
  *out = adco_pair_result{p.payoff_a, p.payoff_b, p.coop_a, p.coop_b, p.se_a, p.se_b, p.analytic ? 1 : 0};
}

adco::Payoff2x2 to_2x2(const double* p) {
  require(p);
  return adco::Payoff2x2{p[0], p[1], p[2], p[3]};
}

void check_index(const adco_payoff_matrix* m, std::size_t i) {
  if (i >= m->matrix.size()) throw adco::InvalidArgument("strategy index out of range");
}

}  // namespace

extern "C" {

const char* adco_version(void) { return adco::kToolVersion; }

const char* adco_last_error(void) { return g_last_error.c_str(); }

const char* adco_status_name(adco_status s) {
  switch (s) {
    case ADCO_OK: return "ok";
    case ADCO_ERR_VALIDATION: return "validation failure";
    case ADCO_ERR_CONFIG: return "config error";
    case ADCO_ERR_RESOURCE: return "resource error";
    case ADCO_ERR_INVALID_ARGUMENT: return "invalid argument";
    case ADCO_ERR_CONVERGENCE: return "convergence failure";
    case ADCO_ERR_IO: return "i/o error";
    case ADCO_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

adco_game adco_game_axelrod(double epsilon) {
  const auto g = adco::GameParams::axelrod(epsilon);
  return adco_game{g.T, g.R, g.P, g.S, g.epsilon};
}

adco_status adco_game_validate(const adco_game* game) {
  return guarded([&] {
    to_game(game);
    return ADCO_OK;
  });
}

adco_mc_settings adco_mc_defaults(void) {
  const adco::MonteCarloSettings s;
  return adco_mc_settings{s.rounds, s.burn_in, s.batches, s.seed};
}

adco_status adco_strategy_parse(const char* spec, const adco_game* game, adco_strategy** out) {
  return guarded([&] {
    require(spec, out);
    *out = nullptr;
    *out = new adco_strategy{adco::make_strategy(spec, to_game(game))};
    return ADCO_OK;
  });
}

void adco_strategy_free(adco_strategy* s) { delete s; }

const char* adco_strategy_spec(const adco_strategy* s) { return s ? s->strategy.spec().c_str() : ""; }

const char* adco_strategy_label(const adco_strategy* s) { return s ? s->strategy.label().c_str() : ""; }

size_t adco_strategy_state_count(const adco_strategy* s) {
  return s && s->strategy.is_automaton() ? s->strategy.automaton().state_count() : 0;
}

size_t adco_catalog_size(void) { return adco::catalog().size(); }

adco_status adco_catalog_entry(size_t index, const char** name, const char** syntax, const char** description) {
  return guarded([&] {
    require(name, syntax, description);
    const auto& c = adco::catalog();
    if (index >= c.size()) throw adco::InvalidArgument("catalog index out of range");
    *name = c[index].name.c_str();
    *syntax = c[index].syntax.c_str();
    *description = c[index].description.c_str();
    return ADCO_OK;
  });
}

adco_status adco_group_coop_rate_aon(int K, int N, double epsilon, double* out) {
  return guarded([&] {
    require(out);
    *out = adco::aon_group_coop_rate(K, N, epsilon);
    return ADCO_OK;
  });
}

adco_status adco_group_coop_rate_adco(int K, int t, int N, double epsilon, double* out) {
  return guarded([&] {
    require(out);
    *out = adco::adco_group_coop_rate(K, t, N, epsilon);
    return ADCO_OK;
  });
}

adco_status adco_aon_self_payoff(int K, const adco_game* game, double* out) {
  return guarded([&] {
    require(out);
    *out = adco::aon_self_payoff(K, to_game(game));
    return ADCO_OK;
  });
}

adco_status adco_pair_payoff(const adco_strategy* a, const adco_strategy* b, const adco_game* game,
                             const adco_mc_settings* mc, adco_pair_result* out) {
  return guarded([&] {
    require(a, b, out);
    adco::PairOptions po;
    po.monte_carlo = to_mc(mc);
    to_pair(adco::pair_payoff(a->strategy, b->strategy, to_game(game), po), out);
    return ADCO_OK;
  });
}

adco_status adco_monte_carlo_payoff(const adco_strategy* a, const adco_strategy* b, const adco_game* game,
                                    const adco_mc_settings* mc, adco_pair_result* out) {
  return guarded([&] {
    require(a, b, out);
    to_pair(adco::monte_carlo_payoff(a->strategy, b->strategy, to_game(game), to_mc(mc)), out);
    return ADCO_OK;
  });
}

adco_status adco_payoff_matrix_compute(const adco_strategy* const* strategies, size_t count, const adco_game* game,
                                       const adco_mc_settings* mc, uint64_t master_seed, adco_payoff_matrix** out) {
  return guarded([&] {
    require(strategies, out);
    *out = nullptr;
    std::vector<adco::Strategy> list;
    list.reserve(count);
    for (size_t i = 0; i < count; ++i) {
      require(strategies[i]);
      list.push_back(strategies[i]->strategy);
    }
    adco::MatrixOptions mo;
    mo.pair.monte_carlo = to_mc(mc);
    mo.master_seed = master_seed;
    *out = new adco_payoff_matrix{adco::payoff_matrix(list, to_game(game), mo)};
    return ADCO_OK;
  });
}

adco_status adco_payoff_matrix_load(const char* path, adco_payoff_matrix** out) {
  return guarded([&] {
    require(path, out);
    *out = nullptr;
    *out = new adco_payoff_matrix{adco::read_payoff_csv(path)};
    return ADCO_OK;
  });
}

adco_status adco_payoff_matrix_save(const adco_payoff_matrix* m, const char* path) {
  return guarded([&] {
    require(m, path);
    adco::write_payoff_csv(m->matrix, path);
    return ADCO_OK;
  });
}

void adco_payoff_matrix_free(adco_payoff_matrix* m) { delete m; }

size_t adco_payoff_matrix_size(const adco_payoff_matrix* m) { return m ? m->matrix.size() : 0; }

const char* adco_payoff_matrix_spec(const adco_payoff_matrix* m, size_t i) {
  return m && i < m->matrix.size() ? m->matrix.specs[i].c_str() : "";
}

adco_status adco_payoff_matrix_get(const adco_payoff_matrix* m, size_t i, size_t j, double* payoff, double* coop) {
  return guarded([&] {
    require(m);
    check_index(m, i);
    check_index(m, j);
    const auto a = static_cast<Eigen::Index>(i), b = static_cast<Eigen::Index>(j);
    if (payoff) *payoff = m->matrix.payoff(a, b);
    if (coop) *coop = m->matrix.coop(a, b);
    return ADCO_OK;
  });
}

adco_status adco_replicator_step(double x, const double payoffs[4], double* out) {
  return guarded([&] {
    require(out);
    if (!(x >= 0.0 && x <= 1.0)) throw adco::InvalidArgument("fraction must lie in [0, 1]");
    *out = adco::replicator_step(x, to_2x2(payoffs));
    return ADCO_OK;
  });
}

adco_status adco_interior_fixed_point(const double payoffs[4], adco_fixed_point* out) {
  return guarded([&] {
    require(out);
    const adco::FixedPointReport r = adco::interior_fixed_point(to_2x2(payoffs));
    out->has_x_star = r.x_star ? 1 : 0;
    out->x_star = r.x_star.value_or(0.0);
    out->stable = r.stability == adco::Stability::Stable ? 1 : 0;
    out->regime = adco::to_string(r.regime);
    return ADCO_OK;
  });
}

adco_status adco_fixation_probability(const adco_payoff_matrix* m, size_t mutant, size_t resident, int M,
                                      double beta, double* out) {
  return guarded([&] {
    require(m, out);
    check_index(m, mutant);
    check_index(m, resident);
    *out = adco::fixation_probability(mutant, resident, m->matrix.payoff, M, beta);
    return ADCO_OK;
  });
}

adco_status adco_embedded_chain(const adco_payoff_matrix* m, int M, double beta, double* abundance,
                                double* cooperation_level) {
  return guarded([&] {
    require(m, abundance);
    const auto chain = adco::embedded_chain(m->matrix.payoff, M, beta);
    const auto dist = adco::abundance_from_chain(m->matrix, chain);
    for (size_t i = 0; i < dist.abundance.size(); ++i) abundance[i] = dist.abundance[i];
    if (cooperation_level) *cooperation_level = dist.cooperation_level;
    return ADCO_OK;
  });
}

adco_status adco_agent_simulation(const adco_payoff_matrix* m, int M, double beta, double mu, uint64_t steps,
                                  uint64_t seed, double* abundance) {
  return guarded([&] {
    require(m, abundance);
    adco::SimConfig cfg;
    cfg.M = M;
    cfg.beta = beta;
    cfg.mu = mu;
    cfg.steps = steps;
    cfg.seed = seed;
    const auto run = adco::agent_simulation(cfg, m->matrix.payoff);
    for (size_t i = 0; i < run.abundance.size(); ++i) abundance[i] = run.abundance[i];
    return ADCO_OK;
  });
}

adco_status adco_config_check(const char* config_path) {
  return guarded([&] {
    require(config_path);
    adco::ExperimentConfig::from_file(config_path);
    return ADCO_OK;
  });
}

adco_status adco_experiment_run(const char* config_path, const adco_run_options* options,
                                adco_path_callback on_written, void* user) {
  return guarded([&] {
    require(config_path);
    adco::ExperimentConfig cfg = adco::ExperimentConfig::from_file(config_path);
    if (options) {
      if (options->output) cfg.output = options->output;
      if (options->has_seed) cfg.seed = options->seed;
      if (options->subsample >= 0) {
        if (cfg.experiment != adco::ExperimentKind::Mem1GridVsAdco) {
          throw adco::ConfigError("--subsample only applies to the mem1-grid-vs-adco preset");
        }
        cfg.subsample = static_cast<std::size_t>(options->subsample);
      }
      if (options->json_mirror >= 0) cfg.json_mirror = options->json_mirror != 0;
    }
    // The JSON mirror lands on <stem>.json, which may be the config itself.
    const auto config_file = std::filesystem::weakly_canonical(config_path);
    auto mirror = cfg.output;
    mirror.replace_filename(cfg.output.stem().string() + ".json");
    if (std::filesystem::weakly_canonical(cfg.output) == config_file ||
        (cfg.json_mirror && std::filesystem::weakly_canonical(mirror) == config_file)) {
      throw adco::ConfigError("output " + (cfg.json_mirror ? mirror : cfg.output).string() +
                              " would overwrite the config file; choose another output path");
    }
    const adco::ExperimentResult res = adco::run_experiment(cfg);
    for (const auto& path : adco::write_result(res, cfg)) {
      if (on_written) on_written(path.string().c_str(), user);
    }
    if (res.validation_failed) {
      g_last_error = "one or more validation checks failed";
      return ADCO_ERR_VALIDATION;
    }
    return ADCO_OK;
  });
}

adco_status adco_validate(uint64_t seed, uint64_t mc_rounds, adco_check_callback on_check, void* user) {
  return guarded([&] {
    adco::ValidationOptions vo;
    vo.seed = seed;
    if (mc_rounds) vo.mc_rounds = mc_rounds;
    bool failed = false;
    adco::run_validation(vo, [&](const adco::CheckResult& r) {
      failed = failed || !r.passed;
      if (on_check) on_check(r.name.c_str(), r.passed ? 1 : 0, r.value, r.threshold, r.detail.c_str(), user);
    });
    if (failed) {
      g_last_error = "one or more validation checks failed";
      return ADCO_ERR_VALIDATION;
    }
    return ADCO_OK;
  });
}

}  // extern "C"
