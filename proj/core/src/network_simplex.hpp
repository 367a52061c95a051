// Internal exact solver for the dense transportation problem. Not installed.
#pragma once

#include <Eigen/Dense>
#include <vector>

#include "semisplit/ot.hpp"

namespace semisplit {

struct TransportInstance {
  // Supports flattened to coordinate matrices: rows = points.
  Eigen::MatrixXd src_pts;  // m x k
  Eigen::MatrixXd dst_pts;  // n x k
  std::vector<double> supply;  // size m, positive, sums to 1
  std::vector<double> demand;  // size n, positive, sums to 1
  CostKind kind = CostKind::squared_euclidean;
};

struct TransportSolution {
  double cost = 0.0;  // optimal sum of flow * cost (raw cost units)
  std::vector<Coupling::Entry> plan;
  long long pivots = 0;
};

// Primal network simplex with block pricing on the implicit dense arc set;
// costs are computed on demand from the coordinates. Deterministic.
// max_pivots == 0 chooses an automatic cap; exceeding it throws NonConvergence.
TransportSolution solve_transport(const TransportInstance& inst, long long max_pivots = 0);

double transport_cost(const Eigen::MatrixXd& a, int i, const Eigen::MatrixXd& b, int j,
                      CostKind kind);

}  // namespace semisplit
