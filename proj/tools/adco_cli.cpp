// Command-line front end. Talks to the library only through the C interface.

#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "adco/adco.h"

namespace {

// 0 success, 1 validation failure, 2 config error, 3 resource error,
// 4 internal error.
int exit_code(adco_status s) {
  switch (s) {
    case ADCO_OK: return 0;
    case ADCO_ERR_VALIDATION: return 1;
    case ADCO_ERR_CONFIG:
    case ADCO_ERR_INVALID_ARGUMENT: return 2;
    case ADCO_ERR_RESOURCE:
    case ADCO_ERR_CONVERGENCE:
    case ADCO_ERR_IO: return 3;
    case ADCO_ERR_INTERNAL: break;
  }
  return 4;
}

int report(adco_status s) {
  if (s != ADCO_OK) {
    std::fprintf(stderr, "adco: %s: %s\n", adco_status_name(s), adco_last_error());
    if (s == ADCO_ERR_RESOURCE) {
      std::fprintf(stderr, "hint: shrink the problem (smaller K or t sweeps, --subsample, fewer Monte Carlo rounds)\n");
    }
  }
  return exit_code(s);
}

void print_check(const char* name, int passed, double value, double threshold, const char* detail, void*) {
  std::printf("%s %-46s value=%-12.6g threshold=%-8.3g %s\n", passed ? "PASS" : "FAIL", name, value, threshold,
              detail);
  std::fflush(stdout);
}

void print_path(const char* path, void*) { std::printf("wrote %s\n", path); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Repeated prisoner's dilemma strategies, long-run payoffs and evolutionary dynamics"};
  app.set_version_flag("--version", std::string("adco ") + adco_version());
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run an experiment preset described by a JSON config");
  std::string config;
  std::string output;
  std::uint64_t seed = 0;
  long subsample = -1;
  bool json_mirror = false;
  run->add_option("config", config, "Path to the JSON config")->required();
  auto* seed_opt = run->add_option("--seed", seed, "Master seed (required by stochastic presets)");
  run->add_option("--output", output, "Output CSV path (overrides the config)");
  run->add_option("--subsample", subsample, "Use an evenly strided subset of the strategy grid")
      ->check(CLI::NonNegativeNumber);
  auto* json_flag = run->add_flag("--json", json_mirror, "Also write a JSON mirror of the tables");

  auto* val = app.add_subcommand("validate", "Run the self-test suite");
  std::uint64_t val_seed = 1;
  std::uint64_t val_rounds = 1'000'000;
  val->add_option("--seed", val_seed, "Seed for the randomized checks")->capture_default_str();
  val->add_option("--mc-rounds", val_rounds, "Monte Carlo rounds per simulated check")->capture_default_str();

  auto* list = app.add_subcommand("list-strategies", "List the strategy catalog");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (*run) {
    adco_run_options opts{};
    opts.output = output.empty() ? nullptr : output.c_str();
    opts.has_seed = *seed_opt ? 1 : 0;
    opts.seed = seed;
    opts.subsample = subsample;
    opts.json_mirror = *json_flag ? 1 : -1;
    return report(adco_experiment_run(config.c_str(), &opts, print_path, nullptr));
  }
  if (*val) {
    const adco_status s = adco_validate(val_seed, val_rounds, print_check, nullptr);
    if (s == ADCO_ERR_VALIDATION) std::printf("validation FAILED\n");
    if (s == ADCO_OK) std::printf("all checks passed\n");
    return report(s);
  }
  if (*list) {
    for (std::size_t i = 0; i < adco_catalog_size(); ++i) {
      const char *name, *syntax, *description;
      if (adco_catalog_entry(i, &name, &syntax, &description) != ADCO_OK) return report(ADCO_ERR_INTERNAL);
      std::printf("%-14s %-26s %s\n", name, syntax, description);
    }
    return 0;
  }
  return 2;
}
