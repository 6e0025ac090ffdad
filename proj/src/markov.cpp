#include "adco/markov.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "adco/error.hpp"

namespace adco {

namespace {

constexpr double kStochasticSlack = 1e-9;

void check_stochastic(const SparseMatrix& t) {
  if (t.rows() != t.cols()) throw InvalidArgument("transition matrix must be square");
  if (t.rows() == 0) throw InvalidArgument("transition matrix is empty");
  for (Eigen::Index i = 0; i < t.outerSize(); ++i) {
    double sum = 0.0;
    for (SparseMatrix::InnerIterator it(t, i); it; ++it) {
      if (!(it.value() >= 0.0)) throw InvalidArgument("transition matrix has a negative entry");
      sum += it.value();
    }
    if (std::abs(sum - 1.0) > kStochasticSlack) {
      throw InvalidArgument("transition matrix row " + std::to_string(i) + " sums to " + std::to_string(sum));
    }
  }
}

double residual_of(const SparseMatrix& t, const Eigen::VectorXd& pi) {
  const Eigen::VectorXd moved = (pi.transpose() * t).transpose();
  return (moved - pi).cwiseAbs().maxCoeff();
}

// Iterative Tarjan over the positive-entry graph restricted to `active`.
std::vector<std::vector<std::size_t>> strongly_connected(const SparseMatrix& t,
                                                         const std::vector<char>& active) {
  const std::size_t n = static_cast<std::size_t>(t.rows());
  constexpr std::size_t kUnset = static_cast<std::size_t>(-1);
  std::vector<std::size_t> index(n, kUnset), low(n, 0);
  std::vector<char> on_stack(n, 0);
  std::vector<std::size_t> stack;
  std::vector<std::vector<std::size_t>> components;
  std::size_t counter = 0;

  struct Frame {
    std::size_t v;
    SparseMatrix::InnerIterator it;
  };
  for (std::size_t root = 0; root < n; ++root) {
    if (!active[root] || index[root] != kUnset) continue;
    std::vector<Frame> frames;
    auto open = [&](std::size_t v) {
      index[v] = low[v] = counter++;
      stack.push_back(v);
      on_stack[v] = 1;
      frames.push_back({v, SparseMatrix::InnerIterator(t, static_cast<Eigen::Index>(v))});
    };
    open(root);
    while (!frames.empty()) {
      Frame& f = frames.back();
      bool descended = false;
      for (; f.it; ++f.it) {
        if (f.it.value() <= 0.0) continue;
        const auto w = static_cast<std::size_t>(f.it.col());
        if (!active[w]) continue;
        if (index[w] == kUnset) {
          ++f.it;
          open(w);
          descended = true;
          break;
        }
        if (on_stack[w]) low[f.v] = std::min(low[f.v], index[w]);
      }
      if (descended) continue;
      const std::size_t v = f.v;
      frames.pop_back();
      if (!frames.empty()) low[frames.back().v] = std::min(low[frames.back().v], low[v]);
      if (low[v] == index[v]) {
        std::vector<std::size_t> comp;
        std::size_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          comp.push_back(w);
        } while (w != v);
        std::sort(comp.begin(), comp.end());
        components.push_back(std::move(comp));
      }
    }
  }
  return components;
}

Eigen::VectorXd solve_dense(const Eigen::MatrixXd& sub) {
  const Eigen::Index m = sub.rows();
  Eigen::MatrixXd a = sub.transpose() - Eigen::MatrixXd::Identity(m, m);
  a.row(m - 1).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
  b(m - 1) = 1.0;
  return a.partialPivLu().solve(b);
}

}  // namespace

double row_sum_error(const Eigen::MatrixXd& t) {
  return (t.rowwise().sum().array() - 1.0).abs().maxCoeff();
}

double row_sum_error(const SparseMatrix& t) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < t.outerSize(); ++i) {
    double sum = 0.0;
    for (SparseMatrix::InnerIterator it(t, i); it; ++it) sum += it.value();
    worst = std::max(worst, std::abs(sum - 1.0));
  }
  return worst;
}

std::vector<std::vector<std::size_t>> closed_classes(const SparseMatrix& t, std::optional<std::size_t> from) {
  const std::size_t n = static_cast<std::size_t>(t.rows());
  std::vector<char> active(n, 1);
  if (from) {
    if (*from >= n) throw InvalidArgument("start state out of range");
    std::fill(active.begin(), active.end(), 0);
    std::vector<std::size_t> todo{*from};
    active[*from] = 1;
    while (!todo.empty()) {
      const std::size_t v = todo.back();
      todo.pop_back();
      for (SparseMatrix::InnerIterator it(t, static_cast<Eigen::Index>(v)); it; ++it) {
        const auto w = static_cast<std::size_t>(it.col());
        if (it.value() > 0.0 && !active[w]) {
          active[w] = 1;
          todo.push_back(w);
        }
      }
    }
  }
  auto comps = strongly_connected(t, active);
  std::vector<std::size_t> comp_of(n, static_cast<std::size_t>(-1));
  for (std::size_t c = 0; c < comps.size(); ++c) {
    for (std::size_t v : comps[c]) comp_of[v] = c;
  }
  std::vector<std::vector<std::size_t>> closed;
  for (std::size_t c = 0; c < comps.size(); ++c) {
    bool leaks = false;
    for (std::size_t v : comps[c]) {
      for (SparseMatrix::InnerIterator it(t, static_cast<Eigen::Index>(v)); it && !leaks; ++it) {
        if (it.value() > 0.0 && comp_of[static_cast<std::size_t>(it.col())] != c) leaks = true;
      }
      if (leaks) break;
    }
    if (!leaks) closed.push_back(std::move(comps[c]));
  }
  std::sort(closed.begin(), closed.end());
  return closed;
}

StationaryDistribution stationary(const SparseMatrix& t, const StationaryOptions& opts) {
  check_stochastic(t);
  const auto closed = closed_classes(t, opts.start_state);
  if (closed.size() != 1) {
    throw InvalidArgument("chain is reducible (" + std::to_string(closed.size()) +
                          " closed classes); supply a start state");
  }
  const std::vector<std::size_t>& cls = closed.front();
  const auto m = static_cast<Eigen::Index>(cls.size());
  std::vector<Eigen::Index> local(static_cast<std::size_t>(t.rows()), -1);
  for (Eigen::Index k = 0; k < m; ++k) local[cls[static_cast<std::size_t>(k)]] = k;

  StationaryDistribution out;
  out.probabilities = Eigen::VectorXd::Zero(t.rows());
  Eigen::VectorXd pi_sub;
  if (cls.size() <= opts.dense_limit) {
    Eigen::MatrixXd sub = Eigen::MatrixXd::Zero(m, m);
    for (Eigen::Index k = 0; k < m; ++k) {
      for (SparseMatrix::InnerIterator it(t, static_cast<Eigen::Index>(cls[static_cast<std::size_t>(k)])); it; ++it) {
        sub(k, local[static_cast<std::size_t>(it.col())]) += it.value();
      }
    }
    pi_sub = solve_dense(sub);
  } else {
    std::vector<Eigen::Triplet<double>> trip;
    for (Eigen::Index k = 0; k < m; ++k) {
      for (SparseMatrix::InnerIterator it(t, static_cast<Eigen::Index>(cls[static_cast<std::size_t>(k)])); it; ++it) {
        trip.emplace_back(k, local[static_cast<std::size_t>(it.col())], it.value());
      }
    }
    SparseMatrix sub(m, m);
    sub.setFromTriplets(trip.begin(), trip.end());
    // Lazy chain (I + T) / 2: same fixed point, aperiodic.
    Eigen::VectorXd pi = Eigen::VectorXd::Constant(m, 1.0 / static_cast<double>(m));
    double res = 1.0;
    std::size_t it = 0;
    while (it < opts.max_iterations) {
      const Eigen::VectorXd moved = (pi.transpose() * sub).transpose();
      ++it;
      res = (moved - pi).cwiseAbs().maxCoeff();
      pi = 0.5 * (pi + moved);
      pi /= pi.sum();
      if (res < 0.1 * opts.tol) break;
    }
    if (!(res < opts.tol)) throw ConvergenceError("power iteration did not converge", res);
    out.iterations = it;
    pi_sub = std::move(pi);
  }
  for (Eigen::Index k = 0; k < m; ++k) out.probabilities(static_cast<Eigen::Index>(cls[static_cast<std::size_t>(k)])) = std::max(0.0, pi_sub(k));
  out.probabilities /= out.probabilities.sum();
  out.residual = residual_of(t, out.probabilities);
  if (!(out.residual < opts.tol)) {
    throw ConvergenceError("stationary residual " + std::to_string(out.residual) + " above tolerance",
                           out.residual);
  }
  return out;
}

StationaryDistribution stationary(const Eigen::MatrixXd& t, const StationaryOptions& opts) {
  return stationary(SparseMatrix(t.sparseView(0.0, 0.0)), opts);
}

}  // namespace adco
