#include <cmath>
#include <limits>

#include "constants_frozen.hpp"
#include "doctest.h"
#include "semisplit/bounds.hpp"
#include "semisplit/errors.hpp"
#include "semisplit/measures.hpp"
#include "semisplit/potential.hpp"

using namespace semisplit;
using semisplit_test::kFrozenConstantSets;

namespace {

Potential build(int kind, double param) {
  switch (kind) {
    case 0: return make_zero_potential(1);
    case 1: return make_harmonic_potential(param, 1);
    default: return make_pendulum_potential(param, 1);
  }
}

bool rel_close(double actual, double expected, double tol = 1e-12) {
  return std::abs(actual - expected) <= tol * std::max(std::abs(expected), 1e-300);
}

InitialMeasure default_gaussian() {
  return InitialMeasure::gaussian(Eigen::VectorXd::Constant(1, 1.0),
                                  Eigen::VectorXd::Zero(1),
                                  Eigen::VectorXd::Constant(1, 0.25),
                                  Eigen::VectorXd::Constant(1, 0.25));
}

}  // namespace

TEST_SUITE("bounds") {

TEST_CASE("frozen regression: all constants match the high-precision table") {
  for (const auto& s : kFrozenConstantSets) {
    CAPTURE(s.name);
    const Potential v = build(s.pot_kind, s.pot_param);
    const InitialMeasure mu = default_gaussian();

    const double ct = c_T(v, s.T, s.dt, s.mu0);
    CHECK(rel_close(ct, s.c_T));

    if (std::isnan(s.d_T)) {
      CHECK_THROWS_AS((void)d_T(v, s.T, s.nu0), UnboundedDerivative);
    } else {
      CHECK(rel_close(d_T(v, s.T, s.nu0), s.d_T));
    }

    if (std::isnan(s.c_uniform)) {
      CHECK_THROWS_AS((void)uniform_constant_simple(v, s.T, s.p_moment, s.d, ct),
                      UnboundedDerivative);
    } else {
      CHECK(rel_close(uniform_constant_simple(v, s.T, s.p_moment, s.d, ct),
                      s.c_uniform));
    }

    if (!std::isnan(s.d_uniform)) {
      const double dtv = d_T(v, s.T, s.nu0);
      CHECK(rel_close(uniform_constant_strang(v, s.T, mu, s.d, dtv, s.m_prime),
                      s.d_uniform));
    }

    CHECK(rel_close(semiclassical_bound_simple(s.dt, s.hbar, ct, v, s.T, s.d),
                    s.semicl_simple));
    if (!std::isnan(s.semicl_strang)) {
      const double dtv = d_T(v, s.T, s.nu0);
      CHECK(rel_close(semiclassical_bound_strang(s.dt, s.hbar, dtv, v, s.T, s.d),
                      s.semicl_strang));
    }

    CHECK(rel_close(propagation_factor(s.pf_t, s.pf_lambda, v), s.pf_expected));
  }
}

TEST_CASE("first-order growth constant: free-potential closed form") {
  // Lambda = 1, E = 0: C_T^2 = (9/4)(3/2)^2 * (e^3-1)/3 * (1 + e^{2(1+(1+dt)^2)} mu0).
  const Potential v = make_zero_potential(1);
  const double T = 1.0, dt = 0.1, mu0 = 1.0;
  const double gronwall = (std::exp(3.0) - 1.0) / 3.0;
  const double big = std::exp(2.0 * (1.0 + 1.21));
  const double expected = std::sqrt(2.25 * 2.25 * gronwall * (1.0 + big * mu0));
  CHECK(rel_close(c_T(v, T, dt, mu0), expected, 1e-13));
}

TEST_CASE("second-order growth constant: unit-envelope closed form") {
  // Lambda = M = 1, nu0 = 0: D_T^2 = (e^3-1)/3 * (1 + e^3).
  const Potential v = make_pendulum_potential(1.0, 1);
  const double expected =
      std::sqrt((std::exp(3.0) - 1.0) / 3.0 * (1.0 + std::exp(3.0)));
  CHECK(rel_close(d_T(v, 1.0, 0.0), expected, 1e-13));
}

TEST_CASE("uniform first-order constant: four-way maximum") {
  // Unit pendulum, T = 1, d = 1, no momentum moment: the four candidates are
  // 4*sqrt(2)*2, C_T, 4*2*(2+1), 2(1+e).
  const Potential v = make_pendulum_potential(1.0, 1);
  const double ct = c_T(v, 1.0, 0.2, 1.125);
  const double expected = std::max({4.0 * std::sqrt(2.0) * 2.0, ct,
                                    8.0 * 3.0, 2.0 * (1.0 + std::exp(1.0))});
  CHECK(rel_close(uniform_constant_simple(v, 1.0, 0.0, 1, ct), expected, 1e-13));
  CHECK(expected == ct);  // the growth constant dominates here
}

TEST_CASE("uniform second-order constant: calibrated term can dominate") {
  const Potential v = make_pendulum_potential(1.0, 1);
  const InitialMeasure mu = default_gaussian();
  const double dtv = d_T(v, 1.0, 0.07421875);
  const double huge = 1e6;
  CHECK(uniform_constant_strang(v, 1.0, mu, 1, dtv, huge) == huge);
  const double tiny = 1e-9;
  CHECK(uniform_constant_strang(v, 1.0, mu, 1, dtv, tiny) == dtv);  // d_T wins
}

TEST_CASE("semiclassical tail: unit-Lipschitz worked example") {
  // Lip = 1, T = 1, d = 1, hbar = 0.01, dt = 0.05:
  // bound = C_T*dt + 2*sqrt(0.01)*(1+e).
  const Potential v = make_pendulum_potential(1.0, 1);
  const double ct = c_T(v, 1.0, 0.05, 1.125);
  const double expected = ct * 0.05 + 2.0 * 0.1 * (1.0 + std::exp(1.0));
  CHECK(rel_close(semiclassical_bound_simple(0.05, 0.01, ct, v, 1.0, 1), expected, 1e-13));
}

TEST_CASE("propagation factor: worked example and composition identity") {
  const Potential stiff = make_pendulum_potential(2.0, 1);
  CHECK(rel_close(propagation_factor(0.5, 0.0, stiff), std::exp(1.0), 1e-14));
  // Kinetic-only times potential-only equals the combined factor exactly.
  const Potential v = make_pendulum_potential(1.7, 1);
  const Potential zero = make_zero_potential(1);
  const double dt = 0.37;
  const double combined = std::exp(0.5 * dt * (1.0 + std::max(1.0, 1.7 * 1.7)));
  CHECK(propagation_factor(dt, 1.0, zero) * propagation_factor(dt, 0.0, v) ==
        doctest::Approx(combined).epsilon(1e-15));
}

TEST_CASE("growth constants are monotone in time and in the step") {
  const Potential v = make_pendulum_potential(1.0, 1);
  CHECK(c_T(v, 1.0, 0.1, 1.0) < c_T(v, 2.0, 0.1, 1.0));
  CHECK(c_T(v, 1.0, 0.1, 1.0) < c_T(v, 1.0, 0.2, 1.0));
  CHECK(d_T(v, 1.0, 0.5) < d_T(v, 2.0, 0.5));
}

TEST_CASE("report eligibility: pendulum supports everything") {
  const Potential v = make_pendulum_potential(1.0, 1);
  const InitialMeasure mu = default_gaussian();
  const BoundReport r = make_bound_report(v, 1.0, 0.2, mu, 1, 3.5, true);
  CHECK(r.lambda == 1.0);
  CHECK(r.e_const == 0.0);
  CHECK(rel_close(r.mu0, 1.125));
  CHECK(rel_close(r.nu0, 0.07421875));
  REQUIRE(r.m_const.has_value());
  CHECK(*r.m_const == 1.0);
  REQUIRE(r.mv_const.has_value());
  CHECK(*r.mv_const == 2.0);
  CHECK(r.theorem_simple_ok);
  CHECK(r.theorem_strang_ok);
  CHECK(r.corollary_simple_ok);
  CHECK(r.corollary_strang_ok);
  REQUIRE(r.d_T.has_value());
  REQUIRE(r.c_uniform.has_value());
  REQUIRE(r.d_uniform.has_value());
  REQUIRE(r.m_prime.has_value());
  CHECK(*r.m_prime == 3.5);
  CHECK(r.m_prime_calibrated);
}

TEST_CASE("report eligibility: harmonic supports only the Lipschitz theorem") {
  const Potential v = make_harmonic_potential(1.0, 1);
  const InitialMeasure mu = default_gaussian();
  const BoundReport r = make_bound_report(v, 1.0, 0.2, mu, 1);
  CHECK(r.theorem_simple_ok);
  CHECK_FALSE(r.theorem_strang_ok);
  CHECK_FALSE(r.corollary_simple_ok);
  CHECK_FALSE(r.corollary_strang_ok);
  CHECK_FALSE(r.d_T.has_value());
  CHECK_FALSE(r.c_uniform.has_value());
  CHECK_FALSE(r.d_uniform.has_value());
}

TEST_CASE("report without a calibrated constant skips the strang corollary") {
  const Potential v = make_pendulum_potential(1.0, 1);
  const InitialMeasure mu = default_gaussian();
  const BoundReport r = make_bound_report(v, 1.0, 0.2, mu, 1);
  CHECK(r.theorem_strang_ok);
  CHECK_FALSE(r.corollary_strang_ok);
  CHECK_FALSE(r.d_uniform.has_value());
  CHECK_FALSE(r.m_prime_calibrated);
}

TEST_CASE("tampered reports fail validation") {
  const Potential v = make_pendulum_potential(1.0, 1);
  const InitialMeasure mu = default_gaussian();
  BoundReport r = make_bound_report(v, 1.0, 0.2, mu, 1);
  r.c_T = -1.0;
  CHECK_THROWS_AS(r.validate(), ConfigError);
  BoundReport r2 = make_bound_report(v, 1.0, 0.2, mu, 1);
  r2.corollary_strang_ok = true;  // no d_uniform present
  CHECK_THROWS_AS(r2.validate(), ConfigError);
}

}  // TEST_SUITE
