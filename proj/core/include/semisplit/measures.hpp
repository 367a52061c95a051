#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace semisplit {

// Initial phase-space probability measure mu_in on R^d x R^d.
// Supported kinds: a Dirac point, a diagonal Gaussian, or a finite mixture
// of those. All moments the error bounds need are available in closed form.
struct InitialMeasure {
  enum class Kind { dirac, gaussian, mixture };

  struct Component {
    Kind kind = Kind::gaussian;
    Eigen::VectorXd q0, p0;          // centers (length d)
    Eigen::VectorXd sigma_q, sigma_p;  // per-axis std deviations (gaussian)
    double weight = 1.0;             // mixture weight
  };

  int dim = 1;
  std::vector<Component> components;  // one entry unless a mixture

  static InitialMeasure dirac(const Eigen::VectorXd& q0, const Eigen::VectorXd& p0);
  static InitialMeasure gaussian(const Eigen::VectorXd& q0, const Eigen::VectorXd& p0,
                                 const Eigen::VectorXd& sigma_q,
                                 const Eigen::VectorXd& sigma_p);
  static InitialMeasure mixture(const std::vector<Component>& components);

  void validate() const;

  // E[|q|^2 + |p|^2]: the initial second moment entering the first-order
  // splitting constant.
  double second_moment() const;

  // E[|p|^2 + |p|^4]: the momentum moment entering the Strang constant.
  double momentum_moment_24() const;

  // E[|p|]: exact for d=1; a closed-form upper bound |p0| + sigma*E|chi_d|
  // for d >= 2 (conservative, hence valid inside the bound constants).
  double abs_momentum_moment() const;

  // alpha-quantile of |p| (exact for d=1 by bisection; an upper bound via the
  // chi-distribution quantile for d >= 2). Used for grid sizing.
  double abs_momentum_quantile(double alpha) const;
};

// One sampled phase-space point list: low-discrepancy (Halton) draws pushed
// through the component quantile transforms. Deterministic given (n, seed);
// mixtures allocate counts by largest remainder and sample each component
// from its own contiguous block of the sequence.
std::vector<Eigen::VectorXd> sample_measure_points(const InitialMeasure& mu, int n,
                                                   std::uint64_t seed);

}  // namespace semisplit
