#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <memory>
#include <vector>

#include "semisplit/classical.hpp"
#include "semisplit/measures.hpp"
#include "semisplit/potential.hpp"

namespace semisplit {

// Periodic spatial grid on [-L, L) with n_points equispaced nodes
// (power of two, >= 16). One spatial dimension.
struct SpatialGrid {
  int dim = 1;
  int n_points = 0;
  double half_width = 0.0;  // L

  double dx() const { return 2.0 * half_width / n_points; }
  double x(int j) const { return -half_width + j * dx(); }
  // Discrete wavenumber of DFT index m (standard wrap: m > n/2 maps to m - n).
  double wavenumber(int m) const;
  void validate() const;
  bool operator==(const SpatialGrid& o) const {
    return dim == o.dim && n_points == o.n_points && half_width == o.half_width;
  }
};

// Complex amplitudes over a SpatialGrid with the semiclassical parameter
// attached. L2 norm uses the grid quadrature sqrt(dx * sum |psi|^2).
struct WaveFunction {
  SpatialGrid grid;
  Eigen::VectorXcd amplitudes;
  double hbar = 1.0;

  double norm() const;
  void validate(double norm_tol = 1e-10) const;
};

// Convex mixture of pure states sharing one grid and hbar, with the
// phase-space centers each member was built from.
struct StateEnsemble {
  std::vector<WaveFunction> members;
  std::vector<double> weights;
  std::vector<Eigen::Vector2d> sample_points;  // (q, p) per member
  std::uint64_t rng_seed = 0;

  void validate() const;
};

// Gaussian coherent state centered at (q, p):
//   (pi*hbar)^{-1/4} exp(-(x-q)^2 / (2 hbar)) exp(i p (x - q/2) / hbar),
// sampled on the grid and renormalized to unit L2 norm.
// Requires |q| <= L - 8 sqrt(hbar) so the truncated tail is below 1e-12.
WaveFunction coherent_state(const SpatialGrid& grid, double hbar, double q, double p);

// Exact free evolution for time t: Fourier multiplier exp(-i t hbar k^2 / 2).
WaveFunction kinetic_propagate(const WaveFunction& psi, double t);

// Exact potential evolution for time t: pointwise exp(-i t V(x) / hbar).
WaveFunction potential_propagate(const WaveFunction& psi, double t, const Potential& v);

// One first-order split step: kinetic for dt, then potential for dt.
WaveFunction lie_trotter_step_q(const WaveFunction& psi, double dt, const Potential& v);

// One symmetric split step: kinetic dt/2, potential dt, kinetic dt/2.
WaveFunction strang_step_q(const WaveFunction& psi, double dt, const Potential& v);

// High-accuracy propagation to time t by symmetric stepping at dt_ref
// (t must be an integer multiple of dt_ref to 1e-9 relative).
WaveFunction reference_propagate_q(const WaveFunction& psi, double t, const Potential& v,
                                   double dt_ref);

// Draws n_states centers from mu (low-discrepancy, seeded), builds coherent
// states with equal weights. The mixture is an unbiased realization of the
// Gaussian-smoothed quantization of mu.
StateEnsemble sample_toeplitz(const InitialMeasure& mu, int n_states, const SpatialGrid& grid,
                              double hbar, std::uint64_t seed);

// sqrt(dx * sum |a_j - b_j|^2); grids and hbar must match.
double l2_distance(const WaveFunction& a, const WaveFunction& b);

// min over global phases theta of ||a - e^{i theta} b|| =
// sqrt(||a||^2 + ||b||^2 - 2 |<a,b>|). Density-operator quantities are
// phase-free, so error measurements use this rather than l2_distance.
double l2_distance_phase_aligned(const WaveFunction& a, const WaveFunction& b);

// Position-space observables (quadrature over the grid).
double expected_position(const WaveFunction& psi);
double position_variance(const WaveFunction& psi);
// Momentum-space observables (spectral sums, momentum = hbar * k).
double expected_momentum(const WaveFunction& psi);
double momentum_variance(const WaveFunction& psi);
// <psi| -hbar^2/2 d^2/dx^2 + V |psi>.
double expected_energy(const WaveFunction& psi, const Potential& v);

// Runtime tripwires evaluated while stepping.
struct PropagatorGuards {
  // Spectral mass fraction allowed in the top 1/8 of wavenumbers.
  double aliasing_tol = 1e-8;
  bool check_aliasing = true;
  // Probability mass allowed within boundary_band of either domain edge,
  // checked after every step; <= 0 disables the check.
  double boundary_band = 0.0;
  double boundary_tol = 1e-9;
};

// Reusable split-step engine: caches the FFT plan, the potential samples and
// the phase multipliers, and merges adjacent half-kinetic factors across
// symmetric steps (two transforms per step instead of four).
class SplitStepPropagator {
 public:
  // p_max_hint > 0 enables the resolution check
  //   dx <= min(sqrt(hbar)/4, hbar / (2 p_max_hint));
  // with p_max_hint == 0 only dx <= sqrt(hbar)/4 is required.
  SplitStepPropagator(const SpatialGrid& grid, const Potential& v, double hbar,
                      double p_max_hint = 0.0);
  ~SplitStepPropagator();
  SplitStepPropagator(const SplitStepPropagator&) = delete;
  SplitStepPropagator& operator=(const SplitStepPropagator&) = delete;

  PropagatorGuards guards;

  // Advances psi in place by n_steps of size dt under the given scheme
  // (Scheme::reference is rejected here; use reference_propagate_q).
  void run(WaveFunction& psi, Scheme scheme, double dt, int n_steps);

  const SpatialGrid& grid() const { return grid_; }
  double hbar() const { return hbar_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  SpatialGrid grid_;
  double hbar_;
};

}  // namespace semisplit
