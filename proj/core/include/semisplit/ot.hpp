#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "semisplit/classical.hpp"

namespace semisplit {

// Finitely supported probability measure on R^k (k = 2d phase-space dims).
struct DiscreteMeasure {
  std::vector<Eigen::VectorXd> support;
  std::vector<double> weights;

  void validate(bool check_distinct = false) const;
  int point_dim() const;
};

// Sparse transport plan between two discrete measures.
struct Coupling {
  struct Entry {
    int source;
    int target;
    double mass;
  };
  std::vector<Entry> entries;

  // Row/column sums must reproduce the marginals within tol.
  void validate(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                double tol = 1e-9) const;
};

enum class TransportMethod { exact_lp, entropic, identity_upper_bound };

enum class CostKind {
  squared_euclidean,   // c(a,b) = |a-b|^2, distance reported as sqrt(cost)
  truncated_euclidean  // c(a,b) = min(1, |a-b|), distance reported as cost
};

struct TransportResult {
  double distance = 0.0;
  std::optional<Coupling> plan;
  TransportMethod method = TransportMethod::exact_lp;
  double tolerance = 0.0;  // certified bound on the relative error
};

struct OtConfig {
  int exact_cap = 2000;    // largest support size solved by the exact LP
  double tol = 1e-4;       // relative duality-gap target for the entropic tier
  bool want_plan = false;  // attach the optimal plan to the result
  long long max_pivots = 0;      // 0 = automatic cap for the exact LP
  int max_sinkhorn_iters = 50000;
};

// Quadratic Wasserstein distance: exact transportation LP (network simplex)
// when both supports are within cfg.exact_cap, otherwise log-domain entropic
// regularization with an epsilon ladder, certified by a duality gap.
TransportResult wasserstein2(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                             const OtConfig& cfg = {});

// Bounded transport distance with cost min(1, |a-b|); value in [0,1].
TransportResult dist1_truncated(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                const OtConfig& cfg = {});

// sqrt(sum_i w_i |a_i - b_i|^2) for two equally-weighted particle systems with
// shared provenance; an upper bound for the exact quadratic distance.
TransportResult coupled_particle_upper_bound(const PhaseEnsemble& a, const PhaseEnsemble& b);

// Exact optimum by enumerating basic feasible solutions (spanning trees of the
// transportation polytope); supports of at most 4 points each.
double brute_force_oracle(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                          CostKind kind = CostKind::squared_euclidean);

// Empirical measure of a particle ensemble (duplicate points merged).
DiscreteMeasure ensemble_to_measure(const PhaseEnsemble& ens);

}  // namespace semisplit
