#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "adco/error.hpp"
#include "adco/experiment.hpp"

using namespace adco;

namespace {

std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("adco_experiment_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string config_error(const std::string& text) {
  try {
    ExperimentConfig::from_json_text(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Drops the wall-time line so two runs can be compared byte for byte.
std::string without_wall_time(const std::string& text) {
  std::istringstream in(text);
  std::string line, out;
  while (std::getline(in, line)) {
    if (line.rfind("# wall_time_s=", 0) == 0) continue;
    out += line + "\n";
  }
  return out;
}

}  // namespace

TEST_CASE("memory-1 grid") {
  const auto grid = build_mem1_grid();
  CHECK(grid.size() == 1296);
  CHECK(grid.front().p == std::array<double, 4>{0, 0, 0, 0});
  CHECK(grid.back().p == std::array<double, 4>{1, 1, 1, 1});
  const bool has_probe = std::any_of(grid.begin(), grid.end(), [](const Memory1& m) {
    return std::abs(m.p[0] - 1) < 1e-12 && m.p[1] == 0 && m.p[2] == 0 && std::abs(m.p[3] - 0.6) < 1e-12;
  });
  CHECK(has_probe);
  for (const auto& m : grid)
    for (double v : m.p) CHECK(std::abs(v * 5 - std::round(v * 5)) < 1e-12);
}

TEST_CASE("classic roster") {
  const auto roster = classics_roster(GameParams::axelrod(0.01));
  REQUIRE(roster.size() == 10);
  std::vector<std::string> labels;
  for (const auto& s : roster) labels.push_back(s.label());
  CHECK(std::find(labels.begin(), labels.end(), "GRIM") != labels.end());
  CHECK(std::find(labels.begin(), labels.end(), "GTFT_0.2") != labels.end());
  for (const auto& l : labels) CHECK(l.find("ADCO") == std::string::npos);
}

TEST_CASE("stride subsample") {
  CHECK(stride_subsample(10, 0).size() == 10);
  CHECK(stride_subsample(10, 20).size() == 10);
  const auto s = stride_subsample(1296, 100);
  CHECK(s.size() == 100);
  CHECK(s.front() == 0);
  CHECK(std::is_sorted(s.begin(), s.end()));
  CHECK(std::adjacent_find(s.begin(), s.end()) == s.end());
}

TEST_CASE("config errors name the field and line") {
  CHECK(config_error("{\"experiment\": \"coop-rates\",\n \"game\": {\"epsilon\": 0.9}}").find("'game' (line 2)") !=
        std::string::npos);
  CHECK(config_error("{\"experiment\": \"nope\"}").find("unknown experiment 'nope'") != std::string::npos);
  CHECK(config_error("{}").find("'experiment' is missing") != std::string::npos);
  CHECK(config_error("{\"experiment\": \"coop-rates\", \"colour\": 1}").find("colour") != std::string::npos);
  CHECK(config_error("{\"experiment\": \"coop-rates\",\n\n \"sweep\": {\"K\": {\"from\": 5, \"to\": 2}}}")
            .find("line 3") != std::string::npos);
  CHECK(config_error("{\"experiment\": \"classics-vs-adco\",\n \"strategies\": [\"ALLC\", \"BOGUS\"]}")
            .find("'strategies[1]' (line 2)") != std::string::npos);
  CHECK(config_error("{\"experiment\": \"coop-rates\",\n \"x0\": 0.5}").find("x0") != std::string::npos);
  CHECK(config_error("{\"experiment\": \"coop-rates\",\n \"sweep\": [1,]}").find("not valid JSON (line 2)") !=
        std::string::npos);
  CHECK(config_error("{\"experiment\": \"aon-family\", \"dynamics\": {\"mu\": 2}}").find("dynamics.mu") !=
        std::string::npos);
}

TEST_CASE("effective config round trips") {
  for (const char* text : {
           R"({"experiment": "coop-rates", "sweep": {"K": {"from": 1, "to": 9, "step": 4}, "N": [2, 3]}})",
           R"({"experiment": "classics-vs-adco", "seed": 7, "dynamics": {"mode": "agent", "steps": 1000}})",
           R"({"experiment": "pairwise-replicator", "x0": 0.25, "strategies": ["TFT"], "seed": 3})",
       }) {
    const ExperimentConfig c = ExperimentConfig::from_json_text(text);
    const auto echo = c.to_json();
    const ExperimentConfig back = ExperimentConfig::from_json_text(echo.dump());
    CHECK(back.to_json() == echo);
  }
  const auto c = ExperimentConfig::from_json_text(R"({"experiment": "coop-rates", "sweep": {"K": {"from": 1, "to": 9, "step": 4}}})");
  CHECK(c.sweep_K == std::vector<int>{1, 5, 9});
}

TEST_CASE("stochastic presets need a seed") {
  auto c = ExperimentConfig::from_json_text(R"({"experiment": "classics-vs-adco", "strategies": ["ALLC", "HardMajority"]})");
  CHECK(c.stochastic());
  CHECK_THROWS_AS(run_experiment(c), ConfigError);
  CHECK_FALSE(ExperimentConfig::from_json_text(R"({"experiment": "coop-rates"})").stochastic());
  CHECK_FALSE(ExperimentConfig::from_json_text(R"({"experiment": "aon-family", "sweep": {"K": [1, 2]}})").stochastic());
}

TEST_CASE("coop-rates preset") {
  const auto c = ExperimentConfig::from_json_text(R"({"experiment": "coop-rates"})");
  const ExperimentResult r = run_experiment(c);
  REQUIRE(!r.tables.empty());
  const ResultTable& t = r.tables[0];
  CHECK(t.rows.size() == 100);
  const auto col = [&](const std::string& name) {
    return static_cast<std::size_t>(std::find(t.columns.begin(), t.columns.end(), name) - t.columns.begin());
  };
  const std::size_t aon = col("aon_coop_rate"), adco = col("adco_coop_rate");
  REQUIRE(adco < t.columns.size());
  for (const auto& row : t.rows) CHECK(std::get<double>(row[adco]) >= std::get<double>(row[aon]));
}

TEST_CASE("outputs are reproducible and echo the config") {
  const auto dir = scratch_dir("repro");
  auto c = ExperimentConfig::from_json_text(R"({"experiment": "classics-vs-adco",
      "strategies": ["ALLD", "WSLS", "HardMajority"], "monte_carlo": {"rounds": 20000}, "seed": 9,
      "json_mirror": true})");
  c.output = dir / "a.csv";
  const auto first = write_result(run_experiment(c), c);
  c.output = dir / "b.csv";
  const auto second = write_result(run_experiment(c), c);
  REQUIRE(first.size() == second.size());
  CHECK(std::filesystem::exists(dir / "a.json"));
  CHECK(std::filesystem::exists(dir / "a.summary.csv"));

  const std::string a = slurp(dir / "a.csv");
  const std::string b = slurp(dir / "b.csv");
  CHECK(a.find("# tool=adco 0.1.0") == 0);
  CHECK(a.find("# wall_time_s=") != std::string::npos);
  // The outputs differ only in the output path inside the config echo.
  std::string bb = without_wall_time(b);
  for (auto p = bb.find("b.csv"); p != std::string::npos; p = bb.find("b.csv", p)) bb.replace(p, 5, "a.csv");
  CHECK(without_wall_time(a) == bb);

  // Rerunning from the echoed config reproduces the file.
  const auto line_start = a.find("# config=");
  REQUIRE(line_start != std::string::npos);
  const auto line_end = a.find('\n', line_start);
  auto echoed = ExperimentConfig::from_json_text(a.substr(line_start + 9, line_end - line_start - 9));
  echoed.output = dir / "c.csv";
  echoed.json_mirror = true;
  write_result(run_experiment(echoed), echoed);
  std::string cc = without_wall_time(slurp(dir / "c.csv"));
  for (auto p = cc.find("c.csv"); p != std::string::npos; p = cc.find("c.csv", p)) cc.replace(p, 5, "a.csv");
  CHECK(without_wall_time(a) == cc);
}

TEST_CASE("CSV numbers keep 17 significant digits") {
  ResultTable t("demo", {"name", "n", "x"});
  t.add_row({std::string("a,b"), std::int64_t{3}, 0.1});
  const std::string csv = t.to_csv({"tool=adco"});
  CHECK(csv.find("# tool=adco\n") == 0);
  CHECK(csv.find("name,n,x\n") != std::string::npos);
  CHECK(csv.find("0.10000000000000001") != std::string::npos);
  CHECK(csv.find("\"a,b\"") != std::string::npos);
  CHECK_THROWS_AS(t.add_row({std::int64_t{1}}), InvalidArgument);
}
