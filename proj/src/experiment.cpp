#include "adco/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "adco/csv.hpp"
#include "adco/error.hpp"
#include "adco/random.hpp"

namespace adco {

using json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Strategy sets.

std::vector<Memory1> build_mem1_grid() {
  std::vector<Memory1> grid;
  grid.reserve(1296);
  for (int a = 0; a <= 5; ++a)
    for (int b = 0; b <= 5; ++b)
      for (int c = 0; c <= 5; ++c)
        for (int d = 0; d <= 5; ++d) grid.push_back(Memory1{{a / 5.0, b / 5.0, c / 5.0, d / 5.0}, std::nullopt});
  return grid;
}

std::vector<Strategy> classics_roster(const GameParams& game) {
  static const char* const kRoster[] = {"GTFT:q=0.4", "GTFT:q=0.2", "WSLS", "ALLD",   "GRIM",
                                        "ALLC",       "RANDOM",     "TFT",  "ZD:chi=2", "ZD:chi=4"};
  std::vector<Strategy> out;
  for (const char* spec : kRoster) out.push_back(make_strategy(spec, game));
  return out;
}

std::vector<std::size_t> stride_subsample(std::size_t total, std::size_t count) {
  std::vector<std::size_t> idx;
  if (count == 0 || count >= total) {
    for (std::size_t i = 0; i < total; ++i) idx.push_back(i);
    return idx;
  }
  for (std::size_t k = 0; k < count; ++k) idx.push_back(k * total / count);
  return idx;
}

// ---------------------------------------------------------------------------
// Configuration parsing.

namespace {

struct KindName {
  ExperimentKind kind;
  const char* name;
};

constexpr KindName kKinds[] = {
    {ExperimentKind::CoopRates, "coop-rates"},
    {ExperimentKind::FixedPoints, "fixed-points"},
    {ExperimentKind::PairwiseReplicator, "pairwise-replicator"},
    {ExperimentKind::AonFamily, "aon-family"},
    {ExperimentKind::ClassicsVsAdco, "classics-vs-adco"},
    {ExperimentKind::Mem1GridVsAdco, "mem1-grid-vs-adco"},
    {ExperimentKind::Validate, "validate"},
};

// Field errors name the JSON path and, when the key can be found in the
// source text, its line.
class FieldReader {
 public:
  explicit FieldReader(const std::string& text) : text_(text) {}

  [[noreturn]] void fail(const std::string& path, const std::string& msg) const {
    std::string where = "config field '" + path + "'";
    std::string key = path.substr(path.find_last_of('.') + 1);
    key = key.substr(0, key.find('['));
    const auto pos = text_.find("\"" + key + "\"");
    if (pos != std::string::npos) where += " (line " + std::to_string(line_of(pos)) + ")";
    throw ConfigError(where + ": " + msg);
  }

  std::size_t line_of(std::size_t byte) const {
    return 1 + static_cast<std::size_t>(std::count(text_.begin(), text_.begin() + static_cast<std::ptrdiff_t>(
                                                                      std::min(byte, text_.size())), '\n'));
  }

  void only_keys(const json& obj, const std::string& path, std::initializer_list<const char*> keys) const {
    if (!obj.is_object()) fail(path.empty() ? "<root>" : path, "expected an object");
    for (const auto& [k, v] : obj.items()) {
      bool known = false;
      for (const char* key : keys) known = known || k == key;
      if (!known) fail(join(path, k), "unknown field");
    }
  }

  static std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
  }

  double number(const json& v, const std::string& path) const {
    if (!v.is_number()) fail(path, "expected a number");
    return v.get<double>();
  }

  std::int64_t integer(const json& v, const std::string& path, std::int64_t lo) const {
    if (v.is_number_integer()) {
      const auto x = v.get<std::int64_t>();
      if (x < lo) fail(path, "must be >= " + std::to_string(lo));
      return x;
    }
    if (v.is_number_float()) {
      const double d = v.get<double>();
      if (d == std::floor(d) && std::abs(d) < 9e15) {
        if (d < static_cast<double>(lo)) fail(path, "must be >= " + std::to_string(lo));
        return static_cast<std::int64_t>(d);
      }
    }
    fail(path, "expected an integer");
  }

  std::uint64_t unsigned_integer(const json& v, const std::string& path) const {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    return static_cast<std::uint64_t>(integer(v, path, 0));
  }

  std::string string(const json& v, const std::string& path) const {
    if (!v.is_string()) fail(path, "expected a string");
    return v.get<std::string>();
  }

  bool boolean(const json& v, const std::string& path) const {
    if (!v.is_boolean()) fail(path, "expected true or false");
    return v.get<bool>();
  }

  // A list of integers or {"from": a, "to": b, "step": s}.
  std::vector<int> int_range(const json& v, const std::string& path, int lo) const {
    std::vector<int> out;
    if (v.is_array()) {
      for (std::size_t i = 0; i < v.size(); ++i) {
        out.push_back(static_cast<int>(integer(v[i], path + "[" + std::to_string(i) + "]", lo)));
      }
    } else if (v.is_object()) {
      only_keys(v, path, {"from", "to", "step"});
      if (!v.contains("from") || !v.contains("to")) fail(path, "range needs 'from' and 'to'");
      const auto from = integer(v["from"], path + ".from", lo);
      const auto to = integer(v["to"], path + ".to", lo);
      const auto step = v.contains("step") ? integer(v["step"], path + ".step", 1) : 1;
      if (to < from) fail(path, "'to' is smaller than 'from'");
      if ((to - from) / step >= 1'000'000) fail(path, "range has too many points");
      for (auto k = from; k <= to; k += step) out.push_back(static_cast<int>(k));
    } else {
      fail(path, "expected a list of integers or a {from, to, step} range");
    }
    if (out.empty()) fail(path, "sweep range is empty");
    if (std::any_of(out.begin(), out.end(), [](int x) { return x > 1'000'000; })) fail(path, "value too large");
    return out;
  }

  std::vector<double> real_list(const json& v, const std::string& path) const {
    std::vector<double> out;
    if (v.is_number()) {
      out.push_back(v.get<double>());
    } else if (v.is_array()) {
      for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], path + "[" + std::to_string(i) + "]"));
    } else {
      fail(path, "expected a number or a list of numbers");
    }
    if (out.empty()) fail(path, "sweep range is empty");
    return out;
  }

 private:
  const std::string& text_;
};

std::vector<int> iota_range(int from, int to) {
  std::vector<int> out;
  for (int k = from; k <= to; ++k) out.push_back(k);
  return out;
}

// Preset defaults, applied before the user's fields.
void apply_defaults(ExperimentConfig& c) {
  switch (c.experiment) {
    case ExperimentKind::CoopRates:
      c.game.epsilon = 0.01;
      c.sweep_K = iota_range(1, 100);
      c.sweep_N = {5};
      c.sweep_t = {1};
      break;
    case ExperimentKind::FixedPoints:
      c.game.epsilon = 0.001;
      c.sweep_K = iota_range(1, 20);
      c.sweep_t = {2};
      c.strategies = {"ALLD"};
      break;
    case ExperimentKind::PairwiseReplicator:
      c.game.epsilon = 0.001;
      c.sweep_K = {3, 30};
      c.sweep_t = {1};
      c.strategies = {"ALLC", "ALLD",     "TFT",          "GTFT:q=0.2",     "GTFT:q=0.5",
                      "WSLS", "ZD:chi=3", "HardMajority", "CURE:delta=2"};
      c.record_every = 10;
      break;
    case ExperimentKind::AonFamily:
      c.game.epsilon = 0.01;
      c.sweep_K = iota_range(1, 50);
      c.record_every = 0;
      break;
    case ExperimentKind::ClassicsVsAdco:
    case ExperimentKind::Mem1GridVsAdco:
      c.game.epsilon = 0.01;
      c.focal = "ADCO:K=3,t=2";
      c.record_every = 0;
      break;
    case ExperimentKind::Validate:
      c.monte_carlo.rounds = 1'000'000;
      break;
  }
}

}  // namespace

const char* to_string(ExperimentKind k) {
  for (const auto& e : kKinds) {
    if (e.kind == k) return e.name;
  }
  return "?";
}

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    FieldReader r(text);
    const std::size_t line = r.line_of(e.byte > 0 ? e.byte - 1 : 0);
    std::string msg = e.what();
    // Drop the library prefix "[json.exception.parse_error.101] ".
    if (const auto p = msg.find("] "); p != std::string::npos) msg = msg.substr(p + 2);
    throw ConfigError("config is not valid JSON (line " + std::to_string(line) + "): " + msg);
  }
  FieldReader r(text);
  r.only_keys(root, "", {"experiment", "game", "dynamics", "strategies", "focal", "sweep", "x0", "monte_carlo",
                         "seed", "output", "payoff_cache", "json_mirror", "subsample"});

  ExperimentConfig c;
  if (!root.contains("experiment")) throw ConfigError("config field 'experiment' is missing");
  {
    const std::string name = r.string(root["experiment"], "experiment");
    bool found = false;
    for (const auto& e : kKinds) {
      if (name == e.name) {
        c.experiment = e.kind;
        found = true;
      }
    }
    if (!found) {
      std::string all;
      for (const auto& e : kKinds) all += std::string(all.empty() ? "" : ", ") + e.name;
      r.fail("experiment", "unknown experiment '" + name + "' (one of: " + all + ")");
    }
  }
  apply_defaults(c);
  const ExperimentKind kind = c.experiment;
  const bool population = kind == ExperimentKind::AonFamily || kind == ExperimentKind::ClassicsVsAdco ||
                          kind == ExperimentKind::Mem1GridVsAdco;

  if (root.contains("game")) {
    const json& g = root["game"];
    r.only_keys(g, "game", {"T", "R", "P", "S", "epsilon"});
    if (g.contains("T")) c.game.T = r.number(g["T"], "game.T");
    if (g.contains("R")) c.game.R = r.number(g["R"], "game.R");
    if (g.contains("P")) c.game.P = r.number(g["P"], "game.P");
    if (g.contains("S")) c.game.S = r.number(g["S"], "game.S");
    if (g.contains("epsilon")) c.game.epsilon = r.number(g["epsilon"], "game.epsilon");
    if (auto problem = check(c.game)) r.fail("game", *problem);
  }

  if (root.contains("dynamics")) {
    const json& d = root["dynamics"];
    r.only_keys(d, "dynamics",
                {"M", "beta", "mu", "steps", "burn_in", "replicates", "mode", "cooperation_weighting", "record_every"});
    if (d.contains("M")) c.M = static_cast<int>(r.integer(d["M"], "dynamics.M", 2));
    if (d.contains("beta")) {
      c.beta = r.number(d["beta"], "dynamics.beta");
      if (!(c.beta >= 0.0)) r.fail("dynamics.beta", "selection intensity must be >= 0");
    }
    if (d.contains("mu")) {
      c.mu = r.number(d["mu"], "dynamics.mu");
      if (!(c.mu >= 0.0 && c.mu <= 1.0)) r.fail("dynamics.mu", "mutation probability must lie in [0, 1]");
    }
    if (d.contains("steps")) c.steps = r.unsigned_integer(d["steps"], "dynamics.steps");
    if (d.contains("burn_in")) c.burn_in = r.unsigned_integer(d["burn_in"], "dynamics.burn_in");
    if (d.contains("replicates")) c.replicates = static_cast<int>(r.integer(d["replicates"], "dynamics.replicates", 1));
    if (d.contains("record_every")) c.record_every = r.unsigned_integer(d["record_every"], "dynamics.record_every");
    if (d.contains("mode")) {
      const std::string m = r.string(d["mode"], "dynamics.mode");
      if (m == "embedded") c.mode = DynamicsMode::Embedded;
      else if (m == "agent") c.mode = DynamicsMode::Agent;
      else r.fail("dynamics.mode", "expected 'embedded' or 'agent'");
      if (c.mode == DynamicsMode::Agent && !population) {
        r.fail("dynamics.mode", "agent mode applies only to the population presets");
      }
    }
    if (d.contains("cooperation_weighting")) {
      const std::string w = r.string(d["cooperation_weighting"], "dynamics.cooperation_weighting");
      if (w == "self-play") c.weighting = CoopWeighting::SelfPlay;
      else if (w == "pairwise-mixture") c.weighting = CoopWeighting::PairwiseMixture;
      else r.fail("dynamics.cooperation_weighting", "expected 'self-play' or 'pairwise-mixture'");
    }
    if (c.mode == DynamicsMode::Agent && c.burn_in >= c.steps) r.fail("dynamics.burn_in", "must be smaller than steps");
  }

  if (root.contains("strategies")) {
    const json& s = root["strategies"];
    if (kind == ExperimentKind::CoopRates || kind == ExperimentKind::AonFamily ||
        kind == ExperimentKind::Mem1GridVsAdco || kind == ExperimentKind::Validate) {
      r.fail("strategies", std::string("not used by the ") + to_string(kind) + " preset");
    }
    if (!s.is_array() || s.empty()) r.fail("strategies", "expected a nonempty list of strategy specs");
    c.strategies.clear();
    for (std::size_t i = 0; i < s.size(); ++i) {
      const std::string path = "strategies[" + std::to_string(i) + "]";
      const std::string spec = r.string(s[i], path);
      try {
        c.strategies.push_back(make_strategy(spec, c.game).spec());
      } catch (const InvalidArgument& e) {
        r.fail(path, e.what());
      }
    }
  }

  if (root.contains("focal")) {
    if (kind != ExperimentKind::ClassicsVsAdco && kind != ExperimentKind::Mem1GridVsAdco) {
      r.fail("focal", std::string("not used by the ") + to_string(kind) + " preset");
    }
    try {
      c.focal = make_strategy(r.string(root["focal"], "focal"), c.game).spec();
    } catch (const InvalidArgument& e) {
      r.fail("focal", e.what());
    }
  }

  if (root.contains("sweep")) {
    const json& s = root["sweep"];
    switch (kind) {
      case ExperimentKind::CoopRates: r.only_keys(s, "sweep", {"K", "N", "t", "epsilon"}); break;
      case ExperimentKind::FixedPoints:
      case ExperimentKind::PairwiseReplicator: r.only_keys(s, "sweep", {"K", "t"}); break;
      case ExperimentKind::AonFamily: r.only_keys(s, "sweep", {"K"}); break;
      default: r.fail("sweep", std::string("not used by the ") + to_string(kind) + " preset");
    }
    if (s.contains("K")) c.sweep_K = r.int_range(s["K"], "sweep.K", 1);
    if (s.contains("N")) c.sweep_N = r.int_range(s["N"], "sweep.N", 2);
    if (s.contains("t")) c.sweep_t = r.int_range(s["t"], "sweep.t", 1);
    if (s.contains("epsilon")) {
      c.sweep_epsilon = r.real_list(s["epsilon"], "sweep.epsilon");
      for (double e : c.sweep_epsilon) {
        if (!(e >= 0.0 && e <= 0.5)) r.fail("sweep.epsilon", "epsilon must lie in [0, 0.5]");
      }
    }
  }
  if (kind == ExperimentKind::CoopRates && c.sweep_epsilon.empty()) c.sweep_epsilon = {c.game.epsilon};

  if (root.contains("x0")) {
    if (kind != ExperimentKind::PairwiseReplicator) r.fail("x0", "only used by the pairwise-replicator preset");
    c.x0 = r.number(root["x0"], "x0");
    if (!(c.x0 >= 0.0 && c.x0 <= 1.0)) r.fail("x0", "initial fraction must lie in [0, 1]");
  }

  if (root.contains("monte_carlo")) {
    const json& m = root["monte_carlo"];
    r.only_keys(m, "monte_carlo", {"rounds", "burn_in", "batches"});
    if (m.contains("rounds")) c.monte_carlo.rounds = r.unsigned_integer(m["rounds"], "monte_carlo.rounds");
    if (m.contains("burn_in")) c.monte_carlo.burn_in = r.unsigned_integer(m["burn_in"], "monte_carlo.burn_in");
    if (m.contains("batches")) c.monte_carlo.batches = static_cast<int>(r.integer(m["batches"], "monte_carlo.batches", 2));
    if (c.monte_carlo.burn_in >= c.monte_carlo.rounds) r.fail("monte_carlo.burn_in", "must be smaller than rounds");
    if ((c.monte_carlo.rounds - c.monte_carlo.burn_in) / static_cast<std::uint64_t>(c.monte_carlo.batches) == 0) {
      r.fail("monte_carlo.rounds", "too few rounds for the batch count");
    }
  }

  if (root.contains("seed")) c.seed = r.unsigned_integer(root["seed"], "seed");
  if (root.contains("output")) {
    c.output = r.string(root["output"], "output");
    if (c.output.empty()) r.fail("output", "must not be empty");
  }
  if (root.contains("payoff_cache")) {
    if (!population && kind != ExperimentKind::PairwiseReplicator) {
      r.fail("payoff_cache", std::string("not used by the ") + to_string(kind) + " preset");
    }
    c.payoff_cache = r.string(root["payoff_cache"], "payoff_cache");
  }
  if (root.contains("json_mirror")) c.json_mirror = r.boolean(root["json_mirror"], "json_mirror");
  if (root.contains("subsample")) {
    if (kind != ExperimentKind::Mem1GridVsAdco) r.fail("subsample", "only used by the mem1-grid-vs-adco preset");
    c.subsample = static_cast<std::size_t>(r.integer(root["subsample"], "subsample", 0));
  }
  return c;
}

ExperimentConfig ExperimentConfig::from_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return from_json_text(buf.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

json ExperimentConfig::to_json() const {
  json j;
  j["experiment"] = to_string(experiment);
  j["game"] = {{"T", game.T}, {"R", game.R}, {"P", game.P}, {"S", game.S}, {"epsilon", game.epsilon}};
  const bool population = experiment == ExperimentKind::AonFamily || experiment == ExperimentKind::ClassicsVsAdco ||
                          experiment == ExperimentKind::Mem1GridVsAdco;
  if (population) {
    j["dynamics"] = {{"M", M},
                     {"beta", beta},
                     {"mu", mu},
                     {"steps", steps},
                     {"burn_in", burn_in},
                     {"replicates", replicates},
                     {"mode", mode == DynamicsMode::Embedded ? "embedded" : "agent"},
                     {"cooperation_weighting", weighting == CoopWeighting::SelfPlay ? "self-play" : "pairwise-mixture"},
                     {"record_every", record_every}};
  } else if (experiment == ExperimentKind::PairwiseReplicator) {
    j["dynamics"] = {{"record_every", record_every}};
  }
  if (experiment == ExperimentKind::FixedPoints || experiment == ExperimentKind::PairwiseReplicator ||
      experiment == ExperimentKind::ClassicsVsAdco) {
    if (!strategies.empty()) j["strategies"] = strategies;
  }
  if (experiment == ExperimentKind::ClassicsVsAdco || experiment == ExperimentKind::Mem1GridVsAdco) j["focal"] = focal;
  json sweep = json::object();
  if (!sweep_K.empty() && experiment != ExperimentKind::ClassicsVsAdco &&
      experiment != ExperimentKind::Mem1GridVsAdco && experiment != ExperimentKind::Validate) {
    sweep["K"] = sweep_K;
  }
  if (experiment == ExperimentKind::CoopRates) {
    sweep["N"] = sweep_N;
    sweep["t"] = sweep_t;
    sweep["epsilon"] = sweep_epsilon;
  } else if (experiment == ExperimentKind::FixedPoints || experiment == ExperimentKind::PairwiseReplicator) {
    sweep["t"] = sweep_t;
  }
  if (!sweep.empty()) j["sweep"] = sweep;
  if (experiment == ExperimentKind::PairwiseReplicator) j["x0"] = x0;
  j["monte_carlo"] = {{"rounds", monte_carlo.rounds}, {"burn_in", monte_carlo.burn_in}, {"batches", monte_carlo.batches}};
  if (seed) j["seed"] = *seed;
  j["output"] = output.string();
  if (payoff_cache) j["payoff_cache"] = payoff_cache->string();
  j["json_mirror"] = json_mirror;
  if (experiment == ExperimentKind::Mem1GridVsAdco) j["subsample"] = subsample;
  return j;
}

bool ExperimentConfig::stochastic() const {
  switch (experiment) {
    case ExperimentKind::Validate: return true;
    case ExperimentKind::CoopRates: return false;
    default: break;
  }
  if (mode == DynamicsMode::Agent) return true;
  std::vector<std::string> specs = strategies;
  if (!focal.empty()) specs.push_back(focal);
  for (const auto& spec : specs) {
    if (!make_strategy(spec, game).is_automaton()) return true;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Result tables.

ResultTable::ResultTable(std::string n, std::vector<std::string> cols) : name(std::move(n)), columns(std::move(cols)) {}

void ResultTable::add_row(std::vector<Cell> row) {
  if (row.size() != columns.size()) {
    throw InvalidArgument("table '" + name + "' expects " + std::to_string(columns.size()) + " cells per row");
  }
  rows.push_back(std::move(row));
}

namespace {

std::string cell_text(const Cell& c) {
  if (const auto* s = std::get_if<std::string>(&c)) return csv::quote(*s);
  if (const auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
  return csv::format_double(std::get<double>(c));
}

json cell_json(const Cell& c) {
  if (const auto* s = std::get_if<std::string>(&c)) return *s;
  if (const auto* i = std::get_if<std::int64_t>(&c)) return *i;
  return std::get<double>(c);
}

}  // namespace

std::string ResultTable::to_csv(const std::vector<std::string>& metadata) const {
  std::string out;
  for (const auto& m : metadata) out += "# " + m + "\n";
  out += csv::join(columns) + "\n";
  for (const auto& row : rows) {
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (k) out += ',';
      out += cell_text(row[k]);
    }
    out += "\n";
  }
  return out;
}

json ResultTable::to_json() const {
  json rs = json::array();
  for (const auto& row : rows) {
    json r = json::array();
    for (const auto& c : row) r.push_back(cell_json(c));
    rs.push_back(std::move(r));
  }
  return json{{"name", name}, {"columns", columns}, {"rows", std::move(rs)}};
}

std::vector<std::string> ExperimentResult::metadata(const ResultTable& table, bool with_wall_time) const {
  std::vector<std::string> m{
      std::string("tool=adco ") + kToolVersion,
      "experiment=" + config.value("experiment", std::string()),
      "table=" + table.name,
      "config=" + config.dump(),
  };
  if (with_wall_time) m.push_back("wall_time_s=" + csv::format_double(wall_time_s));
  return m;
}

namespace {

std::filesystem::path companion_path(const std::filesystem::path& path, const std::string& tag,
                                     const std::string& ext) {
  std::filesystem::path out = path;
  out.replace_filename(path.stem().string() + (tag.empty() ? "" : "." + tag) + ext);
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace

std::vector<std::filesystem::path> write_result(const ExperimentResult& result, const ExperimentConfig& config) {
  std::vector<std::filesystem::path> written;
  const std::string ext = config.output.has_extension() ? config.output.extension().string() : ".csv";
  for (std::size_t k = 0; k < result.tables.size(); ++k) {
    const ResultTable& t = result.tables[k];
    const auto path = k == 0 ? config.output : companion_path(config.output, t.name, ext);
    write_text(path, t.to_csv(result.metadata(t, true)));
    written.push_back(path);
  }
  if (config.json_mirror) {
    json doc;
    doc["tool"] = std::string("adco ") + kToolVersion;
    doc["config"] = result.config;
    doc["wall_time_s"] = result.wall_time_s;
    json tables = json::array();
    for (const auto& t : result.tables) tables.push_back(t.to_json());
    doc["tables"] = std::move(tables);
    const auto path = companion_path(config.output, "", ".json");
    write_text(path, doc.dump(1) + "\n");
    written.push_back(path);
  }
  return written;
}

// ---------------------------------------------------------------------------
// Presets.

namespace {

std::vector<Strategy> parse_all(const std::vector<std::string>& specs, const GameParams& game) {
  std::vector<Strategy> out;
  for (const auto& s : specs) out.push_back(make_strategy(s, game));
  return out;
}

MatrixOptions matrix_options(const ExperimentConfig& c) {
  MatrixOptions o;
  o.pair.monte_carlo = c.monte_carlo;
  o.master_seed = c.seed.value_or(0);
  return o;
}

PayoffMatrix compute_matrix(const ExperimentConfig& c, std::span<const Strategy> strategies) {
  const MatrixOptions opts = matrix_options(c);
  if (c.payoff_cache) return cached_payoff_matrix(strategies, c.game, opts, *c.payoff_cache);
  return payoff_matrix(strategies, c.game, opts);
}

PayoffMatrix sub_matrix(const PayoffMatrix& m, const std::vector<std::size_t>& idx) {
  PayoffMatrix out;
  out.game = m.game;
  const auto n = static_cast<Eigen::Index>(idx.size());
  out.payoff.resize(n, n);
  out.coop.resize(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    out.specs.push_back(m.specs[idx[static_cast<std::size_t>(a)]]);
    for (Eigen::Index b = 0; b < n; ++b) {
      const auto i = static_cast<Eigen::Index>(idx[static_cast<std::size_t>(a)]);
      const auto j = static_cast<Eigen::Index>(idx[static_cast<std::size_t>(b)]);
      out.payoff(a, b) = m.payoff(i, j);
      out.coop(a, b) = m.coop(i, j);
    }
  }
  return out;
}

ResultTable coop_rates(const ExperimentConfig& c) {
  ResultTable t("coop_rates", {"K", "N", "t", "epsilon", "aon_coop_rate", "adco_coop_rate"});
  for (double eps : c.sweep_epsilon)
    for (int N : c.sweep_N)
      for (int tol : c.sweep_t)
        for (int K : c.sweep_K) {
          t.add_row({std::int64_t{K}, std::int64_t{N}, std::int64_t{tol}, eps, aon_group_coop_rate(K, N, eps),
                     adco_group_coop_rate(K, tol, N, eps)});
        }
  return t;
}

Payoff2x2 two_by_two(const Strategy& a, const Strategy& b, const ExperimentConfig& c, bool& analytic) {
  PairOptions po;
  po.monte_carlo = c.monte_carlo;
  const std::uint64_t master = c.seed.value_or(0);
  auto seeded = [&](const Strategy& x, const Strategy& y) {
    po.monte_carlo.seed = derive_seed(master, x.spec(), y.spec());
    return pair_payoff(x, y, c.game, po);
  };
  const PairPayoff aa = seeded(a, a);
  const PairPayoff ab = seeded(a, b);
  const PairPayoff bb = seeded(b, b);
  analytic = aa.analytic && ab.analytic && bb.analytic;
  return Payoff2x2{aa.payoff_a, ab.payoff_a, ab.payoff_b, bb.payoff_a};
}

Cell optional_cell(const std::optional<double>& v) {
  if (v) return *v;
  return std::string();
}

ResultTable fixed_points(const ExperimentConfig& c) {
  ResultTable t("fixed_points", {"opponent", "K", "t", "adco_x_star", "adco_stability", "adco_regime", "aon_x_star",
                                 "aon_stability", "aon_regime"});
  for (const auto& spec : c.strategies) {
    const Strategy opp = make_strategy(spec, c.game);
    for (int tol : c.sweep_t)
      for (int K : c.sweep_K) {
        bool analytic = true;
        const FixedPointReport adco = interior_fixed_point(two_by_two(make_adco(K, tol), opp, c, analytic));
        const FixedPointReport aon = interior_fixed_point(two_by_two(make_aon(K), opp, c, analytic));
        auto stab = [](const FixedPointReport& r) -> Cell {
          return r.x_star ? Cell{std::string(to_string(r.stability))} : Cell{std::string()};
        };
        t.add_row({opp.spec(), std::int64_t{K}, std::int64_t{tol}, optional_cell(adco.x_star), stab(adco),
                   std::string(to_string(adco.regime)), optional_cell(aon.x_star), stab(aon),
                   std::string(to_string(aon.regime))});
      }
  }
  return t;
}

std::vector<ResultTable> pairwise_replicator(const ExperimentConfig& c) {
  ResultTable summary("replicator", {"K", "t", "opponent", "pi_focal_focal", "pi_focal_opponent", "pi_opponent_focal",
                                     "pi_opponent_opponent", "analytic", "x_star", "regime", "x0", "final_x",
                                     "converged_to", "generations"});
  ResultTable traj("trajectory", {"K", "t", "opponent", "generation", "x"});
  ReplicatorOptions ro;
  ro.record_every = c.record_every;
  for (int tol : c.sweep_t)
    for (int K : c.sweep_K) {
      const Strategy focal = make_adco(K, tol);
      for (const auto& spec : c.strategies) {
        const Strategy opp = make_strategy(spec, c.game);
        bool analytic = true;
        const Payoff2x2 p = two_by_two(focal, opp, c, analytic);
        const FixedPointReport fp = interior_fixed_point(p);
        const ReplicatorTrajectory tr = replicator_trajectory(c.x0, p, ro);
        summary.add_row({std::int64_t{K}, std::int64_t{tol}, opp.spec(), p.ii, p.ij, p.ji, p.jj,
                         std::int64_t{analytic ? 1 : 0}, optional_cell(fp.x_star), std::string(to_string(fp.regime)),
                         c.x0, tr.final_x, std::string(to_string(tr.converged_to)),
                         static_cast<std::int64_t>(tr.generations)});
        for (std::size_t k = 0; k < tr.x.size(); ++k) {
          traj.add_row({std::int64_t{K}, std::int64_t{tol}, opp.spec(), static_cast<std::int64_t>(tr.generation[k]),
                        tr.x[k]});
        }
      }
    }
  return {std::move(summary), std::move(traj)};
}

struct Scenario {
  std::string name;
  PayoffMatrix matrix;
};

std::vector<ResultTable> population(const ExperimentConfig& c, const std::vector<Scenario>& scenarios) {
  ResultTable abundance("abundance", {"scenario", "strategy", "label", "abundance", "self_coop_rate"});
  ResultTable summary("summary", {"scenario", "strategies", "most_abundant", "max_abundance", "cooperation_level",
                                  "weighting", "mode"});
  ResultTable series("trajectory", {"scenario", "replicate", "step", "strategy", "count"});
  const bool agent = c.mode == DynamicsMode::Agent;

  for (const Scenario& sc : scenarios) {
    const PayoffMatrix& m = sc.matrix;
    const std::size_t n = m.size();
    AbundanceDistribution dist;
    if (!agent) {
      dist = abundance_from_chain(m, embedded_chain(m.payoff, c.M, c.beta), c.weighting);
    } else {
      const auto reps = static_cast<std::size_t>(c.replicates);
      std::vector<AgentRun> runs(reps);
      std::vector<std::exception_ptr> errors(reps);
#pragma omp parallel for schedule(dynamic, 1)
      for (std::ptrdiff_t r = 0; r < static_cast<std::ptrdiff_t>(reps); ++r) {
        try {
          SimConfig sim;
          sim.M = c.M;
          sim.beta = c.beta;
          sim.mu = c.mu;
          sim.steps = c.steps;
          sim.burn_in = c.burn_in;
          sim.record_every = c.record_every;
          sim.seed = derive_seed(*c.seed, sc.name, "replicate " + std::to_string(r));
          runs[static_cast<std::size_t>(r)] = agent_simulation(sim, m.payoff);
        } catch (...) {
          errors[static_cast<std::size_t>(r)] = std::current_exception();
        }
      }
      for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
      }
      dist.specs = m.specs;
      dist.self_coop = m.self_coop();
      dist.abundance.assign(n, 0.0);
      for (const auto& run : runs) {
        for (std::size_t s = 0; s < n; ++s) dist.abundance[s] += run.abundance[s] / static_cast<double>(reps);
      }
      dist.cooperation_level = cooperation_level(dist.abundance, m.coop, c.weighting);
      for (std::size_t r = 0; r < reps; ++r) {
        for (std::size_t k = 0; k < runs[r].step.size(); ++k) {
          for (std::size_t s = 0; s < n; ++s) {
            if (runs[r].counts[k][s] == 0) continue;
            series.add_row({sc.name, static_cast<std::int64_t>(r), static_cast<std::int64_t>(runs[r].step[k]),
                            m.specs[s], std::int64_t{runs[r].counts[k][s]}});
          }
        }
      }
    }
    for (std::size_t s = 0; s < n; ++s) {
      abundance.add_row({sc.name, m.specs[s], make_strategy(m.specs[s], m.game).label(), dist.abundance[s],
                         dist.self_coop[s]});
    }
    const std::size_t top = dist.argmax();
    summary.add_row({sc.name, static_cast<std::int64_t>(n), m.specs[top], dist.abundance[top], dist.cooperation_level,
                     std::string(c.weighting == CoopWeighting::SelfPlay ? "self-play" : "pairwise-mixture"),
                     std::string(agent ? "agent" : "embedded")});
  }
  std::vector<ResultTable> out;
  out.push_back(std::move(abundance));
  out.push_back(std::move(summary));
  if (agent && c.record_every > 0) out.push_back(std::move(series));
  return out;
}

// Matrix over `roster` followed by the focal strategy; the scenario without
// the focal strategy reuses the corresponding block.
std::vector<Scenario> with_and_without(const ExperimentConfig& c, std::vector<Strategy> roster) {
  const std::size_t n = roster.size();
  roster.push_back(make_strategy(c.focal, c.game));
  PayoffMatrix full = compute_matrix(c, roster);
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  std::vector<Scenario> out;
  out.push_back({"without_focal", sub_matrix(full, idx)});
  out.push_back({"with_focal", std::move(full)});
  return out;
}

ResultTable validation_table(const ExperimentConfig& c, bool& failed) {
  ResultTable t("validation", {"check", "passed", "value", "threshold", "detail"});
  ValidationOptions vo;
  vo.seed = *c.seed;
  vo.mc_rounds = c.monte_carlo.rounds;
  failed = false;
  for (const auto& r : run_validation(vo)) {
    failed = failed || !r.passed;
    t.add_row({r.name, std::int64_t{r.passed ? 1 : 0}, r.value, r.threshold, r.detail});
  }
  return t;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& c) {
  if (c.stochastic() && !c.seed) {
    throw ConfigError(std::string("the ") + to_string(c.experiment) +
                      " preset draws random numbers with this configuration; set 'seed' in the config or pass --seed");
  }
  validate(c.game);
  const auto start = std::chrono::steady_clock::now();
  ExperimentResult res;
  res.config = c.to_json();
  switch (c.experiment) {
    case ExperimentKind::CoopRates: res.tables.push_back(coop_rates(c)); break;
    case ExperimentKind::FixedPoints: res.tables.push_back(fixed_points(c)); break;
    case ExperimentKind::PairwiseReplicator: res.tables = pairwise_replicator(c); break;
    case ExperimentKind::AonFamily: {
      std::vector<Strategy> family;
      for (int K : c.sweep_K) family.push_back(make_aon(K));
      res.tables = population(c, {Scenario{"aon_family", compute_matrix(c, family)}});
      break;
    }
    case ExperimentKind::ClassicsVsAdco: {
      auto roster = c.strategies.empty() ? classics_roster(c.game) : parse_all(c.strategies, c.game);
      res.tables = population(c, with_and_without(c, std::move(roster)));
      break;
    }
    case ExperimentKind::Mem1GridVsAdco: {
      const auto grid = build_mem1_grid();
      std::vector<Strategy> roster;
      for (std::size_t i : stride_subsample(grid.size(), c.subsample)) roster.push_back(make_memory1(grid[i]));
      res.tables = population(c, with_and_without(c, std::move(roster)));
      break;
    }
    case ExperimentKind::Validate: res.tables.push_back(validation_table(c, res.validation_failed)); break;
  }
  res.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

}  // namespace adco
