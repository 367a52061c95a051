#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "semisplit/errors.hpp"
#include "semisplit/potential.hpp"

using namespace semisplit;

namespace {

Eigen::VectorXd vec1(double x) {
  Eigen::VectorXd v(1);
  v[0] = x;
  return v;
}

// Central finite difference of V along axis a.
double fd_grad(const Potential& v, const Eigen::VectorXd& x, int a, double h = 1e-6) {
  Eigen::VectorXd xp = x, xm = x;
  xp[a] += h;
  xm[a] -= h;
  return (v.eval(xp) - v.eval(xm)) / (2.0 * h);
}

}  // namespace

TEST_SUITE("potentials") {

TEST_CASE("zero potential is identically zero with zero envelopes") {
  const Potential v = make_zero_potential(2);
  CHECK(v.dim == 2);
  Eigen::VectorXd x(2);
  x << 0.3, -1.7;
  CHECK(v.eval(x) == 0.0);
  CHECK(v.grad(x).norm() == 0.0);
  CHECK(v.sup_grad == 0.0);
  CHECK(v.sup_hess == 0.0);
  CHECK(v.sup_third == 0.0);
  CHECK(v.lip_grad == 0.0);
  CHECK(v.grad_at_origin_norm == 0.0);
  CHECK(v.has_zero_force());
  CHECK(v.constants_exact);
}

TEST_CASE("harmonic potential: values, gradient, envelopes") {
  const double omega = 1.5;
  const Potential v = make_harmonic_potential(omega, 1);
  const double x0 = 0.8;
  CHECK(v.eval(vec1(x0)) == doctest::Approx(0.5 * omega * omega * x0 * x0).epsilon(1e-14));
  CHECK(v.grad(vec1(x0))[0] == doctest::Approx(omega * omega * x0).epsilon(1e-14));
  CHECK(v.hess(vec1(x0))(0, 0) == doctest::Approx(omega * omega).epsilon(1e-14));
  CHECK(std::isinf(v.sup_grad));
  CHECK(v.sup_hess == doctest::Approx(omega * omega).epsilon(1e-15));
  CHECK(v.lip_grad == doctest::Approx(omega * omega).epsilon(1e-15));
  CHECK(v.grad_at_origin_norm == 0.0);
  CHECK(v.period == 0.0);
  CHECK_FALSE(v.has_zero_force());
}

TEST_CASE("pendulum potential: values, derivatives, envelopes, period") {
  const double a = 2.0;
  const Potential v = make_pendulum_potential(a, 1);
  const double pi = std::numbers::pi;
  CHECK(v.eval(vec1(0.0)) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(v.eval(vec1(pi)) == doctest::Approx(2.0 * a).epsilon(1e-14));
  CHECK(v.grad(vec1(0.7))[0] == doctest::Approx(a * std::sin(0.7)).epsilon(1e-14));
  CHECK(v.hess(vec1(0.7))(0, 0) == doctest::Approx(a * std::cos(0.7)).epsilon(1e-14));
  CHECK(v.sup_grad == a);
  CHECK(v.sup_hess == a);
  CHECK(v.sup_third == a);
  CHECK(v.lip_grad == a);
  CHECK(v.grad_at_origin_norm == 0.0);  // gradient a*sin vanishes at 0
  CHECK(v.period == doctest::Approx(2.0 * pi).epsilon(1e-15));
  // Periodicity of the callable itself.
  CHECK(v.eval(vec1(0.4)) == doctest::Approx(v.eval(vec1(0.4 + 2.0 * pi))).epsilon(1e-12));
}

TEST_CASE("gradients match finite differences at random points") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  const Potential pend = make_pendulum_potential(1.3, 2);
  const Potential harm = make_harmonic_potential(0.8, 2);
  for (int trial = 0; trial < 25; ++trial) {
    Eigen::VectorXd x(2);
    x << u(rng), u(rng);
    for (int a = 0; a < 2; ++a) {
      CHECK(pend.grad(x)[a] == doctest::Approx(fd_grad(pend, x, a)).epsilon(1e-8));
      CHECK(harm.grad(x)[a] == doctest::Approx(fd_grad(harm, x, a)).epsilon(1e-8));
    }
  }
}

TEST_CASE("lambda constant: max(1, E, sup hess)") {
  CHECK(lambda_constant(make_zero_potential(1)) == 1.0);
  CHECK(lambda_constant(make_pendulum_potential(1.0, 1)) == 1.0);
  CHECK(lambda_constant(make_pendulum_potential(2.0, 1)) == 2.0);
  CHECK(lambda_constant(make_harmonic_potential(1.5, 1)) == doctest::Approx(2.25).epsilon(1e-15));
  CHECK(lambda_constant(make_harmonic_potential(0.5, 1)) == 1.0);
}

TEST_CASE("m constant: max(1, squared sup-norms); unbounded rejected") {
  CHECK(m_constant(make_zero_potential(1)) == 1.0);
  CHECK(m_constant(make_pendulum_potential(2.0, 1)) == 4.0);
  CHECK(m_constant(make_pendulum_potential(0.5, 1)) == 1.0);
  CHECK_THROWS_AS((void)m_constant(make_harmonic_potential(1.0, 1)), UnboundedDerivative);
}

TEST_CASE("mv constant: max(2 sup grad, sup hess)") {
  CHECK(mv_constant(make_zero_potential(1)) == 0.0);
  CHECK(mv_constant(make_pendulum_potential(1.0, 1)) == 2.0);
  CHECK(mv_constant(make_pendulum_potential(3.0, 1)) == 6.0);
  CHECK_THROWS_AS((void)mv_constant(make_harmonic_potential(1.0, 1)), UnboundedDerivative);
}

TEST_CASE("estimated envelopes of a custom potential bracket the truth") {
  Potential v;
  v.kind = Potential::Kind::custom;
  v.dim = 1;
  v.eval = [](const Eigen::VectorXd& x) { return std::sin(x[0]); };
  v.grad = [](const Eigen::VectorXd& x) {
    return vec1(std::cos(x[0]));
  };
  v.hess = [](const Eigen::VectorXd& x) {
    Eigen::MatrixXd h(1, 1);
    h(0, 0) = -std::sin(x[0]);
    return h;
  };
  estimate_derivative_bounds(v, std::numbers::pi, 4001);
  CHECK_FALSE(v.constants_exact);
  CHECK(v.sup_grad == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(v.sup_hess == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(v.sup_grad <= 1.0 + 1e-12);
}

}  // TEST_SUITE
