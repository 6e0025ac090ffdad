/* C interface to the adco library: repeated-game strategies as automata,
 * long-run payoffs under implementation noise, and evolutionary dynamics.
 *
 * Every function returns an adco_status; on failure adco_last_error() holds
 * a message for the calling thread. Handles are opaque and owned by the
 * caller, who releases them with the matching *_free function. Strings
 * returned through handles stay valid until the handle is freed.
 */
#ifndef ADCO_ADCO_H
#define ADCO_ADCO_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32) && defined(ADCO_BUILDING)
#define ADCO_API __declspec(dllexport)
#elif defined(_WIN32)
#define ADCO_API __declspec(dllimport)
#elif defined(__GNUC__)
#define ADCO_API __attribute__((visibility("default")))
#else
#define ADCO_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* The first four values double as the CLI exit codes. */
typedef enum adco_status {
  ADCO_OK = 0,
  ADCO_ERR_VALIDATION = 1,
  ADCO_ERR_CONFIG = 2,
  ADCO_ERR_RESOURCE = 3,
  ADCO_ERR_INVALID_ARGUMENT = 4,
  ADCO_ERR_CONVERGENCE = 5,
  ADCO_ERR_IO = 6,
  ADCO_ERR_INTERNAL = 7
} adco_status;

typedef struct adco_game {
  double T, R, P, S;
  double epsilon; /* probability that an intended action is flipped */
} adco_game;

typedef struct adco_mc_settings {
  uint64_t rounds; /* including burn-in */
  uint64_t burn_in;
  int batches;
  uint64_t seed;
} adco_mc_settings;

typedef struct adco_pair_result {
  double payoff_a, payoff_b;
  double coop_a, coop_b;
  double se_a, se_b; /* zero when analytic */
  int analytic;
} adco_pair_result;

typedef struct adco_fixed_point {
  int has_x_star;
  double x_star;
  int stable;       /* 1 stable, 0 unstable */
  const char* regime; /* static string */
} adco_fixed_point;

typedef struct adco_run_options {
  const char* output; /* NULL keeps the config value */
  int has_seed;
  uint64_t seed;
  long subsample;  /* < 0 keeps the config value */
  int json_mirror; /* < 0 keeps the config value */
} adco_run_options;

typedef struct adco_strategy adco_strategy;
typedef struct adco_payoff_matrix adco_payoff_matrix;

typedef void (*adco_check_callback)(const char* name, int passed, double value, double threshold,
                                    const char* detail, void* user);
typedef void (*adco_path_callback)(const char* path, void* user);

ADCO_API const char* adco_version(void);
ADCO_API const char* adco_last_error(void);
ADCO_API const char* adco_status_name(adco_status status);

ADCO_API adco_game adco_game_axelrod(double epsilon);
ADCO_API adco_status adco_game_validate(const adco_game* game);
ADCO_API adco_mc_settings adco_mc_defaults(void);

/* Strategies ---------------------------------------------------------- */

ADCO_API adco_status adco_strategy_parse(const char* spec, const adco_game* game, adco_strategy** out);
ADCO_API void adco_strategy_free(adco_strategy* s);
ADCO_API const char* adco_strategy_spec(const adco_strategy* s);
ADCO_API const char* adco_strategy_label(const adco_strategy* s);
/* 0 for strategies without a finite automaton. */
ADCO_API size_t adco_strategy_state_count(const adco_strategy* s);

ADCO_API size_t adco_catalog_size(void);
ADCO_API adco_status adco_catalog_entry(size_t index, const char** name, const char** syntax,
                                        const char** description);

/* Payoffs ------------------------------------------------------------- */

ADCO_API adco_status adco_group_coop_rate_aon(int K, int N, double epsilon, double* out);
ADCO_API adco_status adco_group_coop_rate_adco(int K, int t, int N, double epsilon, double* out);
ADCO_API adco_status adco_aon_self_payoff(int K, const adco_game* game, double* out);

/* Analytic for two automata; otherwise Monte Carlo with `mc` (NULL uses the
 * defaults with seed 0). */
ADCO_API adco_status adco_pair_payoff(const adco_strategy* a, const adco_strategy* b, const adco_game* game,
                                      const adco_mc_settings* mc, adco_pair_result* out);
ADCO_API adco_status adco_monte_carlo_payoff(const adco_strategy* a, const adco_strategy* b,
                                             const adco_game* game, const adco_mc_settings* mc,
                                             adco_pair_result* out);

/* Simulated pairs use seeds derived from master_seed and the two specs. */
ADCO_API adco_status adco_payoff_matrix_compute(const adco_strategy* const* strategies, size_t count,
                                                const adco_game* game, const adco_mc_settings* mc,
                                                uint64_t master_seed, adco_payoff_matrix** out);
ADCO_API adco_status adco_payoff_matrix_load(const char* path, adco_payoff_matrix** out);
ADCO_API adco_status adco_payoff_matrix_save(const adco_payoff_matrix* m, const char* path);
ADCO_API void adco_payoff_matrix_free(adco_payoff_matrix* m);
ADCO_API size_t adco_payoff_matrix_size(const adco_payoff_matrix* m);
ADCO_API const char* adco_payoff_matrix_spec(const adco_payoff_matrix* m, size_t i);
ADCO_API adco_status adco_payoff_matrix_get(const adco_payoff_matrix* m, size_t i, size_t j, double* payoff,
                                            double* coop);

/* Dynamics ------------------------------------------------------------ */

/* payoffs = {pi(i,i), pi(i,j), pi(j,i), pi(j,j)} */
ADCO_API adco_status adco_replicator_step(double x, const double payoffs[4], double* out);
ADCO_API adco_status adco_interior_fixed_point(const double payoffs[4], adco_fixed_point* out);
ADCO_API adco_status adco_fixation_probability(const adco_payoff_matrix* m, size_t mutant, size_t resident,
                                               int M, double beta, double* out);
/* abundance must hold adco_payoff_matrix_size(m) values. */
ADCO_API adco_status adco_embedded_chain(const adco_payoff_matrix* m, int M, double beta, double* abundance,
                                         double* cooperation_level);
ADCO_API adco_status adco_agent_simulation(const adco_payoff_matrix* m, int M, double beta, double mu,
                                           uint64_t steps, uint64_t seed, double* abundance);

/* Experiments --------------------------------------------------------- */

/* Checks a config file without running it. */
ADCO_API adco_status adco_config_check(const char* config_path);
/* Runs a preset and writes its tables; `on_written` (nullable) receives each
 * output path. A failed validation preset returns ADCO_ERR_VALIDATION after
 * writing its table. */
ADCO_API adco_status adco_experiment_run(const char* config_path, const adco_run_options* options,
                                         adco_path_callback on_written, void* user);
/* Runs the self-test suite; ADCO_ERR_VALIDATION when any check fails. */
ADCO_API adco_status adco_validate(uint64_t seed, uint64_t mc_rounds, adco_check_callback on_check, void* user);

#ifdef __cplusplus
}
#endif

#endif /* ADCO_ADCO_H */
