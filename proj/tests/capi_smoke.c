/* Exercises the C interface from plain C, linking only the shared library. */
#include <math.h>
#include <stdio.h>
#include <string.h>

#include "adco/adco.h"

static int failures = 0;

#define EXPECT(cond)                                              \
  do {                                                            \
    if (!(cond)) {                                                \
      fprintf(stderr, "%s:%d: failed: %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                 \
    }                                                             \
  } while (0)

int main(void) {
  adco_game g = adco_game_axelrod(0.01);
  adco_game bad = g;
  adco_strategy *adco = NULL, *alld = NULL, *wsls = NULL, *nope = NULL;
  adco_pair_result r;
  adco_payoff_matrix* m = NULL;
  double rate = 0, x = 0, coop = 0, pay = 0, rho = 0;
  double abundance[3];
  const double pd[4] = {3, 0, 5, 1};
  adco_fixed_point fp;

  EXPECT(strcmp(adco_version(), "0.1.0") == 0);
  EXPECT(adco_game_validate(&g) == ADCO_OK);
  bad.S = 2;
  EXPECT(adco_game_validate(&bad) == ADCO_ERR_INVALID_ARGUMENT);
  EXPECT(strlen(adco_last_error()) > 0);

  EXPECT(adco_strategy_parse("ADCO:K=3,t=2", &g, &adco) == ADCO_OK);
  EXPECT(adco_strategy_parse("ALLD", &g, &alld) == ADCO_OK);
  EXPECT(adco_strategy_parse("WSLS", &g, &wsls) == ADCO_OK);
  EXPECT(adco_strategy_parse("NOPE", &g, &nope) == ADCO_ERR_INVALID_ARGUMENT);
  EXPECT(nope == NULL);
  EXPECT(strcmp(adco_strategy_label(adco), "ADCO(K=3,t=2)") == 0);
  EXPECT(adco_strategy_state_count(adco) == 6);
  EXPECT(adco_catalog_size() > 10);

  EXPECT(adco_group_coop_rate_aon(5, 5, 0.01, &rate) == ADCO_OK);
  EXPECT(fabs(rate - 0.7723) < 5e-5);
  EXPECT(adco_group_coop_rate_aon(0, 5, 0.01, &rate) == ADCO_ERR_INVALID_ARGUMENT);

  EXPECT(adco_pair_payoff(alld, alld, &g, NULL, &r) == ADCO_OK);
  EXPECT(r.analytic == 1);
  /* Both defect by intent and cooperate only by error. */
  EXPECT(fabs(r.payoff_a - (0.01 * 0.01 * 3 + 0.99 * 0.01 * 5 + 0.99 * 0.99 * 1)) < 1e-12);

  EXPECT(adco_replicator_step(0.5, pd, &x) == ADCO_OK);
  EXPECT(x < 0.5);
  EXPECT(adco_interior_fixed_point(pd, &fp) == ADCO_OK);
  EXPECT(fp.has_x_star == 0);

  {
    const adco_strategy* list[3];
    list[0] = alld;
    list[1] = wsls;
    list[2] = adco;
    EXPECT(adco_payoff_matrix_compute(list, 3, &g, NULL, 0, &m) == ADCO_OK);
  }
  EXPECT(adco_payoff_matrix_size(m) == 3);
  EXPECT(strcmp(adco_payoff_matrix_spec(m, 1), "WSLS") == 0);
  EXPECT(adco_payoff_matrix_get(m, 2, 2, &pay, &coop) == ADCO_OK);
  EXPECT(pay > 2.9 && coop > 0.9);
  EXPECT(adco_payoff_matrix_get(m, 3, 0, &pay, &coop) == ADCO_ERR_INVALID_ARGUMENT);
  EXPECT(adco_fixation_probability(m, 2, 0, 100, 0.0, &rho) == ADCO_OK);
  EXPECT(fabs(rho - 0.01) < 1e-12);
  EXPECT(adco_embedded_chain(m, 100, 1.0, abundance, &coop) == ADCO_OK);
  EXPECT(fabs(abundance[0] + abundance[1] + abundance[2] - 1) < 1e-12);
  EXPECT(abundance[2] > abundance[0]);
  EXPECT(adco_agent_simulation(m, 20, 1.0, 0.01, 10000, 4, abundance) == ADCO_OK);
  EXPECT(fabs(abundance[0] + abundance[1] + abundance[2] - 1) < 1e-9);

  EXPECT(adco_config_check("/nonexistent/config.json") == ADCO_ERR_CONFIG);

  adco_payoff_matrix_free(m);
  adco_strategy_free(adco);
  adco_strategy_free(alld);
  adco_strategy_free(wsls);
  adco_strategy_free(NULL);

  if (failures == 0) printf("C API smoke test passed\n");
  return failures == 0 ? 0 : 1;
}
