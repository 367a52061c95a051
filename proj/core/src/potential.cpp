#include "semisplit/potential.hpp"

#include <cmath>
#include <numbers>

#include "semisplit/errors.hpp"

namespace semisplit {

Potential make_zero_potential(int dim) {
  Potential v;
  v.kind = Potential::Kind::zero;
  v.name = "zero";
  v.dim = dim;
  v.eval = [](const Eigen::VectorXd&) { return 0.0; };
  v.grad = [](const Eigen::VectorXd& x) { return Eigen::VectorXd::Zero(x.size()).eval(); };
  v.hess = [](const Eigen::VectorXd& x) {
    return Eigen::MatrixXd::Zero(x.size(), x.size()).eval();
  };
  v.sup_grad = 0.0;
  v.sup_hess = 0.0;
  v.sup_third = 0.0;
  v.lip_grad = 0.0;
  v.grad_at_origin_norm = 0.0;
  return v;
}

Potential make_harmonic_potential(double omega, int dim) {
  Potential v;
  v.kind = Potential::Kind::harmonic;
  v.name = "harmonic";
  v.dim = dim;
  v.param = omega;
  const double w2 = omega * omega;
  v.eval = [w2](const Eigen::VectorXd& x) { return 0.5 * w2 * x.squaredNorm(); };
  v.grad = [w2](const Eigen::VectorXd& x) { return (w2 * x).eval(); };
  v.hess = [w2](const Eigen::VectorXd& x) {
    return (w2 * Eigen::MatrixXd::Identity(x.size(), x.size())).eval();
  };
  v.sup_grad = std::numeric_limits<double>::infinity();
  v.sup_hess = w2;
  v.sup_third = 0.0;
  v.lip_grad = w2;
  v.grad_at_origin_norm = 0.0;
  return v;
}

Potential make_pendulum_potential(double amplitude, int dim) {
  Potential v;
  v.kind = Potential::Kind::pendulum;
  v.name = "pendulum";
  v.dim = dim;
  v.param = amplitude;
  const double a = amplitude;
  v.eval = [a](const Eigen::VectorXd& x) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) s += 1.0 - std::cos(x[i]);
    return a * s;
  };
  v.grad = [a](const Eigen::VectorXd& x) {
    Eigen::VectorXd g(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) g[i] = a * std::sin(x[i]);
    return g;
  };
  v.hess = [a](const Eigen::VectorXd& x) {
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(x.size(), x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) h(i, i) = a * std::cos(x[i]);
    return h;
  };
  // Component-wise: |grad|_max = a*sqrt(d) (all sines at 1), operator norms of
  // the diagonal Hessian and the third-derivative tensor are both a.
  v.sup_grad = a * std::sqrt(static_cast<double>(dim));
  v.sup_hess = a;
  v.sup_third = a;
  v.lip_grad = a;
  v.grad_at_origin_norm = 0.0;
  v.period = 2.0 * std::numbers::pi;
  return v;
}

void estimate_derivative_bounds(Potential& v, double half_width, int samples) {
  if (!v.eval || !v.grad || !v.hess) throw ConfigError("estimate_derivative_bounds: callbacks missing");
  if (v.dim != 1)
    throw ConfigError("estimate_derivative_bounds: only 1-d custom potentials supported");
  if (samples < 2) throw ConfigError("estimate_derivative_bounds: samples < 2");
  double max_g = 0.0, max_h = 0.0, max_t = 0.0, max_lip = 0.0;
  const double dx = 2.0 * half_width / (samples - 1);
  Eigen::VectorXd x(1), xp(1), xm(1);
  Eigen::VectorXd g_prev;
  for (int i = 0; i < samples; ++i) {
    x[0] = -half_width + i * dx;
    const Eigen::VectorXd g = v.grad(x);
    const Eigen::MatrixXd h = v.hess(x);
    max_g = std::max(max_g, g.norm());
    max_h = std::max(max_h, h.cwiseAbs().maxCoeff());
    // Third derivative by centered difference of the Hessian.
    const double fd_h = 1e-4;
    xp[0] = x[0] + fd_h;
    xm[0] = x[0] - fd_h;
    const double third = (v.hess(xp)(0, 0) - v.hess(xm)(0, 0)) / (2.0 * fd_h);
    max_t = std::max(max_t, std::fabs(third));
    if (i > 0) max_lip = std::max(max_lip, (g - g_prev).norm() / dx);
    g_prev = g;
  }
  v.sup_grad = max_g;
  v.sup_hess = max_h;
  v.sup_third = max_t;
  v.lip_grad = std::max(max_lip, max_h);
  v.constants_exact = false;
}

double lambda_constant(const Potential& v) {
  return std::max({1.0, v.grad_at_origin_norm, v.sup_hess});
}

double m_constant(const Potential& v) {
  if (!std::isfinite(v.sup_grad) || !std::isfinite(v.sup_hess) || !std::isfinite(v.sup_third))
    throw UnboundedDerivative("m_constant: potential '" + v.name +
                              "' has an infinite derivative sup-norm");
  return std::max({1.0, v.sup_grad * v.sup_grad, v.sup_hess * v.sup_hess,
                   v.sup_third * v.sup_third});
}

double mv_constant(const Potential& v) {
  if (!std::isfinite(v.sup_grad) || !std::isfinite(v.sup_hess))
    throw UnboundedDerivative("mv_constant: potential '" + v.name +
                              "' has an infinite derivative sup-norm");
  return std::max(2.0 * v.sup_grad, v.sup_hess);
}

}  // namespace semisplit
