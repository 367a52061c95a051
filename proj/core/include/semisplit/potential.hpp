#pragma once

#include <Eigen/Dense>
#include <functional>
#include <limits>
#include <string>

namespace semisplit {

// External potential V together with the derivative sup-norms the error
// bounds need. Infinite sup-norms are allowed; they mark the potential as
// ineligible for the uniform-in-hbar corollaries.
struct Potential {
  enum class Kind { zero, harmonic, pendulum, custom };

  Kind kind = Kind::custom;
  std::string name = "custom";
  int dim = 1;
  // Kind-specific parameter: omega for harmonic, amplitude for pendulum.
  double param = 0.0;

  std::function<double(const Eigen::VectorXd&)> eval;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> grad;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> hess;

  double sup_grad = std::numeric_limits<double>::infinity();   // sup |grad V|
  double sup_hess = std::numeric_limits<double>::infinity();   // sup |hess V| (operator norm)
  double sup_third = std::numeric_limits<double>::infinity();  // sup |third derivative| (norm)
  double lip_grad = std::numeric_limits<double>::infinity();   // Lip(grad V)
  double grad_at_origin_norm = 0.0;                            // E = |grad V(0)|
  bool constants_exact = true;  // false when sup-norms were grid-estimated
  // Spatial period of V per axis when periodic (pendulum: 2*pi), else 0.
  double period = 0.0;

  bool has_zero_force() const { return sup_grad == 0.0; }
};

// V == 0: free dynamics oracle.
Potential make_zero_potential(int dim = 1);

// V(x) = (omega^2/2)|x|^2: exact-solution oracle; gradient unbounded.
Potential make_harmonic_potential(double omega, int dim = 1);

// V(x) = amplitude * sum_i (1 - cos x_i): smooth bounded-derivative potential
// used for every uniform-in-hbar experiment.
Potential make_pendulum_potential(double amplitude, int dim = 1);

// Grid-search estimate of the derivative sup-norms of a user-supplied
// potential over [-half_width, half_width]^dim with `samples` points per
// axis. Fills sup_grad/sup_hess/sup_third/lip_grad and marks the result as
// estimated (constants_exact = false).
void estimate_derivative_bounds(Potential& v, double half_width, int samples);

// max(1, E, sup|hess V|).
double lambda_constant(const Potential& v);

// max(1, sup|grad V|^2, sup|hess V|^2, sup|third V|^2).
// Throws UnboundedDerivative if any sup-norm is infinite.
double m_constant(const Potential& v);

// max(2 sup|grad V|, sup|hess V|). Throws UnboundedDerivative if infinite.
double mv_constant(const Potential& v);

}  // namespace semisplit
