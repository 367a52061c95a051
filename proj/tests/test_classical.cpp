#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "semisplit/classical.hpp"
#include "semisplit/errors.hpp"
#include "semisplit/measures.hpp"
#include "semisplit/potential.hpp"

using namespace semisplit;

namespace {

PhasePoint pp(double x, double xi) {
  PhasePoint p;
  p.x = Eigen::VectorXd::Constant(1, x);
  p.xi = Eigen::VectorXd::Constant(1, xi);
  return p;
}

double dist(const PhasePoint& a, const PhasePoint& b) {
  return std::sqrt((a.x - b.x).squaredNorm() + (a.xi - b.xi).squaredNorm());
}

// Exact harmonic flow with frequency omega.
PhasePoint harmonic_exact(const PhasePoint& p, double t, double omega) {
  PhasePoint out = p;
  const double c = std::cos(omega * t), s = std::sin(omega * t);
  out.x = p.x * c + p.xi * (s / omega);
  out.xi = -p.x * (omega * s) + p.xi * c;
  return out;
}

double pendulum_energy(const PhasePoint& p, const Potential& v) {
  return 0.5 * p.xi.squaredNorm() + v.eval(p.x);
}

InitialMeasure default_gaussian() {
  return InitialMeasure::gaussian(Eigen::VectorXd::Constant(1, 1.0),
                                  Eigen::VectorXd::Zero(1),
                                  Eigen::VectorXd::Constant(1, 0.25),
                                  Eigen::VectorXd::Constant(1, 0.25));
}

}  // namespace

TEST_SUITE("classical") {

TEST_CASE("drift and kick are the exact partial flows") {
  const Potential v = make_pendulum_potential(1.0, 1);
  const PhasePoint p = pp(0.7, -0.3);
  const PhasePoint d = drift(p, 0.25);
  CHECK(d.x[0] == doctest::Approx(0.7 + 0.25 * -0.3).epsilon(1e-15));
  CHECK(d.xi[0] == -0.3);
  const PhasePoint k = kick(p, 0.25, v);
  CHECK(k.x[0] == 0.7);
  CHECK(k.xi[0] == doctest::Approx(-0.3 - 0.25 * std::sin(0.7)).epsilon(1e-14));
}

TEST_CASE("split steps compose drift and kick in the documented order") {
  const Potential v = make_pendulum_potential(1.3, 1);
  const PhasePoint p = pp(-0.4, 0.9);
  const double dt = 0.17;
  const PhasePoint lie = lie_trotter_step(p, dt, v);
  const PhasePoint lie_manual = kick(drift(p, dt), dt, v);
  CHECK(dist(lie, lie_manual) == 0.0);
  const PhasePoint str = strang_step(p, dt, v);
  const PhasePoint str_manual = drift(kick(drift(p, dt / 2), dt, v), dt / 2);
  CHECK(dist(str, str_manual) == 0.0);
}

TEST_CASE("reference flow reproduces the harmonic rotation") {
  const double omega = 1.5;
  const Potential v = make_harmonic_potential(omega, 1);
  const PhasePoint p = pp(1.0, 0.5);
  for (double t : {0.3, 1.0, 2.7}) {
    const PhasePoint ref = reference_flow(p, t, v, 1e-12);
    const PhasePoint exact = harmonic_exact(p, t, omega);
    CHECK(dist(ref, exact) <= 1e-10);
  }
}

TEST_CASE("reference flow conserves pendulum energy") {
  const Potential v = make_pendulum_potential(1.0, 1);
  const PhasePoint p = pp(1.2, 0.4);
  const double e0 = pendulum_energy(p, v);
  const PhasePoint q = reference_flow(p, 3.0, v, 1e-12);
  CHECK(pendulum_energy(q, v) == doctest::Approx(e0).epsilon(1e-9));
}

TEST_CASE("single-particle convergence orders: first and second") {
  const Potential v = make_pendulum_potential(1.0, 1);
  const PhasePoint p = pp(1.0, 0.5);
  const double T = 1.0;
  auto err = [&](Scheme s, double dt) {
    const int n = static_cast<int>(std::round(T / dt));
    PhasePoint q = p;
    for (int i = 0; i < n; ++i)
      q = s == Scheme::lie_trotter ? lie_trotter_step(q, dt, v) : strang_step(q, dt, v);
    return dist(q, reference_flow(p, T, v, 1e-13));
  };
  const double lie_ratio = err(Scheme::lie_trotter, 0.01) / err(Scheme::lie_trotter, 0.005);
  CHECK(lie_ratio > 1.8);
  CHECK(lie_ratio < 2.2);
  const double strang_ratio = err(Scheme::strang, 0.01) / err(Scheme::strang, 0.005);
  CHECK(strang_ratio > 3.6);
  CHECK(strang_ratio < 4.4);
}

TEST_CASE("split steps are symplectic: unit Jacobian determinant") {
  const Potential v = make_pendulum_potential(1.0, 1);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  const double h = 1e-6, dt = 0.2;
  for (int trial = 0; trial < 100; ++trial) {
    const double x = u(rng), xi = u(rng);
    auto step = [&](double a, double b) { return strang_step(pp(a, b), dt, v); };
    const PhasePoint xp = step(x + h, xi), xm = step(x - h, xi);
    const PhasePoint vp = step(x, xi + h), vm = step(x, xi - h);
    const double j00 = (xp.x[0] - xm.x[0]) / (2 * h);
    const double j01 = (vp.x[0] - vm.x[0]) / (2 * h);
    const double j10 = (xp.xi[0] - xm.xi[0]) / (2 * h);
    const double j11 = (vp.xi[0] - vm.xi[0]) / (2 * h);
    CHECK(std::abs(j00 * j11 - j01 * j10 - 1.0) <= 1e-8);
  }
}

TEST_CASE("evolve_ensemble preserves weights, order and provenance") {
  const Potential v = make_pendulum_potential(1.0, 1);
  const PhaseEnsemble ens = sample_phase_ensemble(default_gaussian(), 128, 42);
  const PhaseEnsemble out = evolve_ensemble(ens, Scheme::strang, 0.1, 10, v);
  REQUIRE(out.points.size() == ens.points.size());
  CHECK(out.weights == ens.weights);
  CHECK(out.rng_seed == ens.rng_seed);
  // Particle i of the output is the evolved particle i of the input.
  PhasePoint q = ens.points[17];
  for (int s = 0; s < 10; ++s) q = strang_step(q, 0.1, v);
  CHECK(dist(q, out.points[17]) == 0.0);
}

TEST_CASE("evolve_ensemble reference equals per-particle exact flow") {
  const Potential v = make_harmonic_potential(1.0, 1);
  const PhaseEnsemble ens = sample_phase_ensemble(default_gaussian(), 64, 3);
  const PhaseEnsemble out = evolve_ensemble(ens, Scheme::reference, 0.7, 1, v);
  for (std::size_t i = 0; i < ens.points.size(); ++i)
    CHECK(dist(out.points[i], harmonic_exact(ens.points[i], 0.7, 1.0)) <= 1e-10);
}

TEST_CASE("worker count does not change evolve_ensemble output") {
  const Potential v = make_pendulum_potential(1.0, 1);
  const PhaseEnsemble ens = sample_phase_ensemble(default_gaussian(), 257, 5);
  const PhaseEnsemble a = evolve_ensemble(ens, Scheme::lie_trotter, 0.05, 20, v, 1);
  const PhaseEnsemble b = evolve_ensemble(ens, Scheme::lie_trotter, 0.05, 20, v, 3);
  for (std::size_t i = 0; i < ens.points.size(); ++i) CHECK(dist(a.points[i], b.points[i]) == 0.0);
}

TEST_CASE("sampling is deterministic and equally weighted") {
  const InitialMeasure mu = default_gaussian();
  const PhaseEnsemble a = sample_phase_ensemble(mu, 512, 99);
  const PhaseEnsemble b = sample_phase_ensemble(mu, 512, 99);
  REQUIRE(a.points.size() == 512);
  double wsum = 0.0;
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    CHECK(a.weights[i] == 1.0 / 512);
    wsum += a.weights[i];
    CHECK(dist(a.points[i], b.points[i]) == 0.0);
  }
  CHECK(wsum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("sampled moments match the measure's analytic moments") {
  const InitialMeasure mu = default_gaussian();
  const PhaseEnsemble ens = sample_phase_ensemble(mu, 4096, 1);
  // mu0 = q0^2 + sq^2 + p0^2 + sp^2 = 1 + 0.0625 + 0 + 0.0625
  CHECK(second_moment(ens) == doctest::Approx(mu.second_moment()).epsilon(5e-3));
  CHECK(mu.second_moment() == doctest::Approx(1.125).epsilon(1e-12));
  // nu0 = sp^2 + 3 sp^4 for centered Gaussian momentum
  CHECK(momentum_moment_24(ens) == doctest::Approx(mu.momentum_moment_24()).epsilon(2e-2));
  CHECK(mu.momentum_moment_24() == doctest::Approx(0.07421875).epsilon(1e-12));
}

TEST_CASE("dirac measures sample to identical points") {
  const InitialMeasure mu = InitialMeasure::dirac(Eigen::VectorXd::Constant(1, 0.5),
                                                  Eigen::VectorXd::Constant(1, -0.25));
  const PhaseEnsemble ens = sample_phase_ensemble(mu, 32, 0);
  for (const auto& p : ens.points) {
    CHECK(p.x[0] == 0.5);
    CHECK(p.xi[0] == -0.25);
  }
}

TEST_CASE("mixture sampling respects component weights") {
  InitialMeasure::Component a, b;
  a.kind = InitialMeasure::Kind::dirac;
  a.q0 = Eigen::VectorXd::Constant(1, -1.0);
  a.p0 = Eigen::VectorXd::Zero(1);
  a.sigma_q = Eigen::VectorXd::Zero(1);
  a.sigma_p = Eigen::VectorXd::Zero(1);
  a.weight = 0.25;
  b = a;
  b.q0 = Eigen::VectorXd::Constant(1, 2.0);
  b.weight = 0.75;
  const InitialMeasure mu = InitialMeasure::mixture({a, b});
  const PhaseEnsemble ens = sample_phase_ensemble(mu, 400, 7);
  int left = 0;
  for (const auto& p : ens.points)
    if (p.x[0] < 0.0) ++left;
  CHECK(left == 100);  // deterministic proportional allocation
}

}  // TEST_SUITE
