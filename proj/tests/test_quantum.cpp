#include <cmath>
#include <complex>
#include <numbers>

#include "doctest.h"
#include "semisplit/errors.hpp"
#include "semisplit/measures.hpp"
#include "semisplit/potential.hpp"
#include "semisplit/quantum.hpp"

using namespace semisplit;

namespace {

SpatialGrid grid_of(double half_width, int n) {
  SpatialGrid g;
  g.dim = 1;
  g.half_width = half_width;
  g.n_points = n;
  return g;
}

double norm_of(const WaveFunction& psi) {
  return std::sqrt(psi.grid.dx() * psi.amplitudes.squaredNorm());
}

InitialMeasure default_gaussian() {
  return InitialMeasure::gaussian(Eigen::VectorXd::Constant(1, 1.0),
                                  Eigen::VectorXd::Zero(1),
                                  Eigen::VectorXd::Constant(1, 0.25),
                                  Eigen::VectorXd::Constant(1, 0.25));
}

}  // namespace

TEST_SUITE("quantum") {

TEST_CASE("spatial grid geometry and validation") {
  const SpatialGrid g = grid_of(8.0, 64);
  CHECK(g.dx() == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(g.x(0) == -8.0);
  CHECK(g.x(32) == doctest::Approx(0.0).epsilon(1e-15));
  // Wavenumber wrap: index n/2+1 is negative.
  CHECK(g.wavenumber(1) == doctest::Approx(2.0 * std::numbers::pi / 16.0).epsilon(1e-13));
  CHECK(g.wavenumber(63) == doctest::Approx(-2.0 * std::numbers::pi / 16.0).epsilon(1e-13));
  CHECK_THROWS_AS(grid_of(8.0, 48).validate(), ConfigError);   // not a power of two
  CHECK_THROWS_AS(grid_of(-1.0, 64).validate(), ConfigError);  // bad width
}

TEST_CASE("coherent state: norm, centers, widths") {
  const double hbar = 0.5;
  const SpatialGrid g = grid_of(10.0, 256);
  const WaveFunction psi = coherent_state(g, hbar, 1.0, -0.5);
  CHECK(norm_of(psi) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(expected_position(psi) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(expected_momentum(psi) == doctest::Approx(-0.5).epsilon(1e-10));
  CHECK(position_variance(psi) == doctest::Approx(hbar / 2).epsilon(1e-9));
  CHECK(momentum_variance(psi) == doctest::Approx(hbar / 2).epsilon(1e-9));
}

TEST_CASE("coherent state too close to the boundary is rejected") {
  const SpatialGrid g = grid_of(4.0, 128);
  CHECK_THROWS_AS((void)coherent_state(g, 1.0, 3.0, 0.0), BoundaryClipping);
}

TEST_CASE("kinetic propagation: exact free drift of the center") {
  const double hbar = 0.25;
  const SpatialGrid g = grid_of(12.0, 512);
  const WaveFunction psi = coherent_state(g, hbar, -1.0, 0.8);
  const WaveFunction phi = kinetic_propagate(psi, 2.0);
  CHECK(norm_of(phi) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(expected_position(phi) == doctest::Approx(-1.0 + 2.0 * 0.8).epsilon(1e-9));
  CHECK(expected_momentum(phi) == doctest::Approx(0.8).epsilon(1e-9));
  // Free spreading: var_q(t) = var_q + t^2 var_p (for a minimal Gaussian).
  CHECK(position_variance(phi) ==
        doctest::Approx(hbar / 2 + 4.0 * hbar / 2).epsilon(1e-8));
}

TEST_CASE("potential propagation: moduli fixed, exact mean-force kick") {
  const double hbar = 0.5;
  const SpatialGrid g = grid_of(10.0, 256);
  const Potential v = make_harmonic_potential(1.3, 1);
  const WaveFunction psi = coherent_state(g, hbar, 0.7, 0.2);
  const double t = 0.4;
  const WaveFunction phi = potential_propagate(psi, t, v);
  for (int j = 0; j < g.n_points; ++j)
    CHECK(std::abs(phi.amplitudes[j]) ==
          doctest::Approx(std::abs(psi.amplitudes[j])).epsilon(1e-12));
  CHECK(expected_position(phi) == doctest::Approx(0.7).epsilon(1e-10));
  // Multiplication by exp(-itV/hbar) shifts <p> by exactly -t <grad V>.
  const double mean_force = 1.3 * 1.3 * expected_position(psi);
  CHECK(expected_momentum(phi) ==
        doctest::Approx(expected_momentum(psi) - t * mean_force).epsilon(1e-9));
}

TEST_CASE("split steps are unitary") {
  const double hbar = 0.1;
  const SpatialGrid g = grid_of(10.0, 512);
  const Potential v = make_pendulum_potential(1.0, 1);
  WaveFunction psi = coherent_state(g, hbar, 1.0, 0.0);
  for (int s = 0; s < 50; ++s) psi = strang_step_q(psi, 0.05, v);
  CHECK(norm_of(psi) == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("reference propagation follows the harmonic classical center") {
  // For omega = 1 a coherent state stays coherent; its center follows the
  // classical rotation (1, 0) -> (cos t, -sin t).
  const double hbar = 0.5;
  const SpatialGrid g = grid_of(12.0, 512);
  const Potential v = make_harmonic_potential(1.0, 1);
  const WaveFunction psi = coherent_state(g, hbar, 1.0, 0.0);
  const double t = 1.0;
  const WaveFunction phi = reference_propagate_q(psi, t, v, t / 4096);
  CHECK(expected_position(phi) == doctest::Approx(std::cos(t)).epsilon(1e-6));
  CHECK(expected_momentum(phi) == doctest::Approx(-std::sin(t)).epsilon(1e-6));
  CHECK(position_variance(phi) == doctest::Approx(hbar / 2).epsilon(1e-5));
}

TEST_CASE("energy is conserved by reference propagation") {
  const double hbar = 0.2;
  const SpatialGrid g = grid_of(10.0, 512);
  const Potential v = make_pendulum_potential(1.0, 1);
  const WaveFunction psi = coherent_state(g, hbar, 0.8, 0.3);
  const double e0 = expected_energy(psi, v);
  const WaveFunction phi = reference_propagate_q(psi, 1.0, v, 1.0 / 2048);
  CHECK(expected_energy(phi, v) == doctest::Approx(e0).epsilon(1e-8));
}

TEST_CASE("phase-aligned distance ignores a global phase") {
  const SpatialGrid g = grid_of(8.0, 128);
  const WaveFunction psi = coherent_state(g, 0.5, 0.5, -0.2);
  WaveFunction rot = psi;
  rot.amplitudes *= std::exp(std::complex<double>(0.0, 1.234));
  CHECK(l2_distance(psi, rot) > 0.5);  // raw distance sees the phase
  CHECK(l2_distance_phase_aligned(psi, rot) <= 1e-12);
  const WaveFunction other = coherent_state(g, 0.5, -0.5, 0.0);
  CHECK(l2_distance_phase_aligned(psi, other) > 0.1);
  CHECK(l2_distance_phase_aligned(psi, other) <= l2_distance(psi, other) + 1e-15);
}

TEST_CASE("fixed-hbar convergence orders of the two schemes") {
  const double hbar = 0.5;
  const SpatialGrid g = grid_of(12.0, 256);
  const Potential v = make_pendulum_potential(1.0, 1);
  const WaveFunction psi = coherent_state(g, hbar, 1.0, 0.0);
  const double T = 1.0;
  const WaveFunction ref = reference_propagate_q(psi, T, v, T / 8192);
  auto err = [&](Scheme s, double dt) {
    const int n = static_cast<int>(std::round(T / dt));
    WaveFunction q = psi;
    for (int i = 0; i < n; ++i)
      q = s == Scheme::lie_trotter ? lie_trotter_step_q(q, dt, v) : strang_step_q(q, dt, v);
    return l2_distance_phase_aligned(q, ref);
  };
  const double lie_ratio = err(Scheme::lie_trotter, 0.02) / err(Scheme::lie_trotter, 0.01);
  CHECK(lie_ratio > 1.8);
  CHECK(lie_ratio < 2.2);
  const double strang_ratio = err(Scheme::strang, 0.02) / err(Scheme::strang, 0.01);
  CHECK(strang_ratio > 3.5);
  CHECK(strang_ratio < 4.5);
}

TEST_CASE("split-step engine equals the per-step composition") {
  const double hbar = 0.3;
  const SpatialGrid g = grid_of(12.0, 256);
  const Potential v = make_pendulum_potential(1.0, 1);
  const WaveFunction psi0 = coherent_state(g, hbar, 1.0, 0.2);

  WaveFunction engine = psi0;
  SplitStepPropagator prop(g, v, hbar);
  prop.run(engine, Scheme::strang, 0.1, 5);
  WaveFunction manual = psi0;
  for (int s = 0; s < 5; ++s) manual = strang_step_q(manual, 0.1, v);
  CHECK(l2_distance(engine, manual) <= 1e-12);

  engine = psi0;
  prop.run(engine, Scheme::lie_trotter, 0.1, 5);
  manual = psi0;
  for (int s = 0; s < 5; ++s) manual = lie_trotter_step_q(manual, 0.1, v);
  CHECK(l2_distance(engine, manual) <= 1e-12);
}

TEST_CASE("under-resolved grids are rejected up front") {
  const double hbar = 0.01;
  // dx = 0.25 violates dx <= sqrt(hbar)/4 = 0.025.
  const SpatialGrid g = grid_of(8.0, 64);
  const Potential v = make_pendulum_potential(1.0, 1);
  CHECK_THROWS_AS(SplitStepPropagator(g, v, hbar), SpectralUnderresolution);
}

TEST_CASE("momentum outside the resolved band trips the aliasing guard") {
  const double hbar = 1.0;
  const SpatialGrid g = grid_of(8.0, 64);  // p_grid max = hbar*pi/dx ~ 12.6
  const Potential v = make_zero_potential(1);
  WaveFunction psi = coherent_state(g, hbar, 0.0, 11.5);  // deep in the top band
  SplitStepPropagator prop(g, v, hbar);
  CHECK_THROWS_AS(prop.run(psi, Scheme::strang, 0.1, 1), SpectralUnderresolution);
}

TEST_CASE("toeplitz sampling: deterministic equal-weight coherent mixture") {
  const double hbar = 0.5;
  const SpatialGrid g = grid_of(16.0, 512);
  const StateEnsemble a = sample_toeplitz(default_gaussian(), 16, g, hbar, 2024);
  const StateEnsemble b = sample_toeplitz(default_gaussian(), 16, g, hbar, 2024);
  REQUIRE(a.members.size() == 16);
  REQUIRE(a.sample_points.size() == 16);
  double mean_q = 0.0;
  for (int i = 0; i < 16; ++i) {
    CHECK(a.weights[i] == 1.0 / 16);
    CHECK(norm_of(a.members[i]) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(l2_distance(a.members[i], b.members[i]) == 0.0);
    CHECK(expected_position(a.members[i]) ==
          doctest::Approx(a.sample_points[i][0]).epsilon(1e-8));
    mean_q += a.sample_points[i][0] / 16;
  }
  CHECK(mean_q == doctest::Approx(1.0).epsilon(0.05));  // centers sample N(1, 0.25^2)
}

}  // TEST_SUITE
