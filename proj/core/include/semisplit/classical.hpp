#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "semisplit/measures.hpp"
#include "semisplit/potential.hpp"

namespace semisplit {

enum class Scheme { lie_trotter, strang, reference };

// One classical phase-space point (x, xi).
struct PhasePoint {
  Eigen::VectorXd x;   // position
  Eigen::VectorXd xi;  // momentum
};

// Weighted particle cloud discretizing a phase-space probability density.
struct PhaseEnsemble {
  std::vector<PhasePoint> points;
  std::vector<double> weights;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

// Free streaming: (x, xi) -> (x + t xi, xi).
PhasePoint drift(const PhasePoint& p, double t);

// Force impulse: (x, xi) -> (x, xi - t grad V(x)).
PhasePoint kick(const PhasePoint& p, double t, const Potential& v);

// First-order split step: drift by dt, then kick by dt. This is the forward
// particle map whose density pullback is the kick-then-drift composition of
// the transport formulation.
PhasePoint lie_trotter_step(const PhasePoint& p, double dt, const Potential& v);

// Symmetric second-order split step: drift dt/2, kick dt, drift dt/2.
PhasePoint strang_step(const PhasePoint& p, double dt, const Potential& v);

// Exact flow of x' = xi, xi' = -grad V(x) at time t. Closed form for the
// zero and harmonic potentials; otherwise adaptive Dormand-Prince 5(4) with
// local tolerance `tol`. Throws StepSizeUnderflow if the integrator stalls.
PhasePoint reference_flow(const PhasePoint& p, double t, const Potential& v, double tol);

// Applies the chosen per-particle map n_steps times (reference: one exact
// flow over n_steps*dt). Weights and particle order are preserved so the
// identity coupling between input and output stays meaningful.
PhaseEnsemble evolve_ensemble(const PhaseEnsemble& ens, Scheme scheme, double dt,
                              int n_steps, const Potential& v, int jobs = 1,
                              double reference_tol = 1e-12);

// Sum_i w_i (|x_i|^2 + |xi_i|^2).
double second_moment(const PhaseEnsemble& ens);

// Sum_i w_i (|xi_i|^2 + |xi_i|^4).
double momentum_moment_24(const PhaseEnsemble& ens);

// Equal-weight ensemble of low-discrepancy samples of mu_in.
PhaseEnsemble sample_phase_ensemble(const InitialMeasure& mu, int n_particles,
                                    std::uint64_t seed);

}  // namespace semisplit
