#include <exception>
#include <fstream>
#include <map>
#include <sstream>

#include "adco/csv.hpp"
#include "adco/error.hpp"
#include "adco/payoff.hpp"
#include "adco/random.hpp"

namespace adco {

std::vector<double> PayoffMatrix::self_coop() const {
  std::vector<double> out(size());
  for (std::size_t i = 0; i < size(); ++i) out[i] = coop(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i));
  return out;
}

bool needs_monte_carlo(std::span<const Strategy> strategies) {
  for (const Strategy& s : strategies) {
    if (!s.is_automaton()) return true;
  }
  return false;
}

PayoffMatrix payoff_matrix(std::span<const Strategy> strategies, const GameParams& params,
                           const MatrixOptions& opts) {
  validate(params);
  if (strategies.empty()) throw InvalidArgument("payoff matrix needs at least one strategy");
  const std::size_t n = strategies.size();
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  pairs.reserve(n * (n + 1) / 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) pairs.emplace_back(i, j);
  }
  std::vector<PairPayoff> results(pairs.size());
  std::vector<std::exception_ptr> errors(pairs.size());

  const auto count = static_cast<std::ptrdiff_t>(pairs.size());
#pragma omp parallel for schedule(dynamic, 64)
  for (std::ptrdiff_t k = 0; k < count; ++k) {
    const auto [i, j] = pairs[static_cast<std::size_t>(k)];
    try {
      PairOptions po = opts.pair;
      po.monte_carlo.seed = derive_seed(opts.master_seed, strategies[i].spec(), strategies[j].spec());
      results[static_cast<std::size_t>(k)] = pair_payoff(strategies[i], strategies[j], params, po);
    } catch (...) {
      errors[static_cast<std::size_t>(k)] = std::current_exception();
    }
  }

  for (std::size_t k = 0; k < pairs.size(); ++k) {
    if (!errors[k]) continue;
    const std::string where = "pair (" + strategies[pairs[k].first].spec() + ", " +
                              strategies[pairs[k].second].spec() + "): ";
    try {
      std::rethrow_exception(errors[k]);
    } catch (const Error& e) {
      rethrow_with_context(e, where);
    }
  }

  PayoffMatrix m;
  m.game = params;
  for (const Strategy& s : strategies) m.specs.push_back(s.spec());
  const auto dim = static_cast<Eigen::Index>(n);
  m.payoff = Eigen::MatrixXd::Zero(dim, dim);
  m.coop = Eigen::MatrixXd::Zero(dim, dim);
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(pairs[k].first);
    const auto j = static_cast<Eigen::Index>(pairs[k].second);
    const PairPayoff& r = results[k];
    if (i == j) {
      m.payoff(i, i) = r.payoff_a;
      m.coop(i, i) = r.coop_a;
    } else {
      m.payoff(i, j) = r.payoff_a;
      m.payoff(j, i) = r.payoff_b;
      m.coop(i, j) = r.coop_a;
      m.coop(j, i) = r.coop_b;
    }
  }
  return m;
}

namespace {

std::filesystem::path companion(const std::filesystem::path& path, const std::string& tag) {
  std::filesystem::path out = path;
  out.replace_filename(path.stem().string() + "." + tag + path.extension().string());
  return out;
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

void write_game_metadata(std::ostream& out, const GameParams& g) {
  out << "# T=" << csv::format_double(g.T) << "\n# R=" << csv::format_double(g.R)
      << "\n# P=" << csv::format_double(g.P) << "\n# S=" << csv::format_double(g.S)
      << "\n# epsilon=" << csv::format_double(g.epsilon) << "\n";
}

void write_matrix(std::ostream& out, const std::vector<std::string>& specs, const Eigen::MatrixXd& v) {
  out << csv::join(specs) << "\n";
  for (Eigen::Index i = 0; i < v.rows(); ++i) {
    for (Eigen::Index j = 0; j < v.cols(); ++j) {
      if (j) out << ',';
      out << csv::format_double(v(i, j));
    }
    out << "\n";
  }
}

struct MatrixFile {
  std::map<std::string, std::string> meta;
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

MatrixFile read_matrix_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  MatrixFile f;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq != std::string::npos) f.meta[line.substr(2, eq - 2)] = line.substr(eq + 1);
      continue;
    }
    auto fields = csv::split(line);
    if (!have_header) {
      f.header = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != f.header.size()) throw IoError(path.string() + ": ragged row");
    std::vector<double> row;
    for (const auto& x : fields) row.push_back(csv::parse_double(x));
    f.rows.push_back(std::move(row));
  }
  if (!have_header || f.rows.size() != f.header.size()) throw IoError(path.string() + ": not a square matrix");
  return f;
}

Eigen::MatrixXd to_eigen(const std::vector<std::vector<double>>& rows) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  return m;
}

}  // namespace

void write_payoff_csv(const PayoffMatrix& m, const std::filesystem::path& path) {
  {
    auto out = open_out(path);
    write_game_metadata(out, m.game);
    write_matrix(out, m.specs, m.payoff);
  }
  {
    auto out = open_out(companion(path, "coop"));
    write_game_metadata(out, m.game);
    out << "strategy,self_coop_rate\n";
    const auto self = m.self_coop();
    for (std::size_t i = 0; i < m.size(); ++i) {
      out << csv::quote(m.specs[i]) << ',' << csv::format_double(self[i]) << "\n";
    }
  }
  {
    auto out = open_out(companion(path, "pair_coop"));
    write_game_metadata(out, m.game);
    write_matrix(out, m.specs, m.coop);
  }
}

PayoffMatrix read_payoff_csv(const std::filesystem::path& path) {
  const MatrixFile pay = read_matrix_file(path);
  const MatrixFile coop = read_matrix_file(companion(path, "pair_coop"));
  if (coop.header != pay.header) throw IoError(path.string() + ": companion cooperation matrix does not match");
  PayoffMatrix m;
  m.specs = pay.header;
  auto meta = [&](const char* key) {
    auto it = pay.meta.find(key);
    if (it == pay.meta.end()) throw IoError(path.string() + ": missing metadata '" + key + "'");
    return csv::parse_double(it->second);
  };
  m.game = GameParams{meta("T"), meta("R"), meta("P"), meta("S"), meta("epsilon")};
  m.payoff = to_eigen(pay.rows);
  m.coop = to_eigen(coop.rows);
  return m;
}

PayoffMatrix cached_payoff_matrix(std::span<const Strategy> strategies, const GameParams& params,
                                  const MatrixOptions& opts, const std::filesystem::path& cache) {
  const bool mc = needs_monte_carlo(strategies);
  const std::filesystem::path seed_file = companion(cache, "seed");
  const std::string seed_key = std::to_string(opts.master_seed) + "," +
                               std::to_string(opts.pair.monte_carlo.rounds) + "," +
                               std::to_string(opts.pair.monte_carlo.burn_in);
  if (std::filesystem::exists(cache)) {
    try {
      PayoffMatrix m = read_payoff_csv(cache);
      bool match = m.size() == strategies.size() && m.game.T == params.T && m.game.R == params.R &&
                   m.game.P == params.P && m.game.S == params.S && m.game.epsilon == params.epsilon;
      for (std::size_t i = 0; match && i < strategies.size(); ++i) match = m.specs[i] == strategies[i].spec();
      if (match && mc) {
        std::ifstream in(seed_file);
        std::string stored;
        match = in && std::getline(in, stored) && stored == seed_key;
      }
      if (match) return m;
    } catch (const IoError&) {
      // Unreadable cache: recompute and overwrite.
    }
  }
  PayoffMatrix m = payoff_matrix(strategies, params, opts);
  write_payoff_csv(m, cache);
  if (mc) open_out(seed_file) << seed_key << "\n";
  return m;
}

}  // namespace adco
