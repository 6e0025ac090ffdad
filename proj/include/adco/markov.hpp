#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace adco {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

struct StationaryOptions {
  double tol = 1e-10;
  // Closed classes up to this size are solved directly; larger ones by power
  // iteration.
  std::size_t dense_limit = 2000;
  std::size_t max_iterations = 1'000'000;
  // Without a start state a chain with more than one closed class is
  // rejected. With one, only states reachable from it are considered.
  std::optional<std::size_t> start_state;
};

struct StationaryDistribution {
  Eigen::VectorXd probabilities;
  double residual = 0.0;  // max |pi T - pi|
  std::size_t iterations = 0;  // 0 for the direct solve
};

StationaryDistribution stationary(const Eigen::MatrixXd& transition, const StationaryOptions& opts = {});
StationaryDistribution stationary(const SparseMatrix& transition, const StationaryOptions& opts = {});

// Largest |row sum - 1|.
double row_sum_error(const Eigen::MatrixXd& transition);
double row_sum_error(const SparseMatrix& transition);

// Closed communicating classes among the states reachable from `from` (all
// states when empty). Each class is listed in increasing state order.
std::vector<std::vector<std::size_t>> closed_classes(const SparseMatrix& transition,
                                                     std::optional<std::size_t> from = std::nullopt);

}  // namespace adco
