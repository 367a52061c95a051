#include "semisplit/bounds.hpp"

#include <cmath>
#include <limits>

#include "semisplit/errors.hpp"

namespace semisplit {

namespace {

// max(1, Lip(grad V)^2), the potential's contribution to the propagation
// exponent. Infinite when the Lipschitz constant is unknown/unbounded.
double clamped_lip_sq(const Potential& v) {
  const double lip = v.lip_grad;
  return std::max(1.0, lip * lip);
}

// 2 sqrt(d hbar) (1 + exp(T(1 + max(1, Lip^2)) / 2)): the hbar tail shared by
// both semiclassical envelopes.
double hbar_tail(double hbar, const Potential& v, double T, int d) {
  const double growth = 1.0 + std::exp(0.5 * T * (1.0 + clamped_lip_sq(v)));
  return 2.0 * std::sqrt(static_cast<double>(d) * hbar) * growth;
}

void require_nonneg(const std::optional<double>& value, const char* name) {
  if (value && !(*value >= 0.0)) {
    throw ConfigError(std::string("bound report field ") + name +
                      " must be nonnegative");
  }
}

}  // namespace

void BoundReport::validate() const {
  if (!(lambda >= 0.0) || !(e_const >= 0.0) || !(mu0 >= 0.0) ||
      !(nu0 >= 0.0) || !(c_T >= 0.0)) {
    throw ConfigError("bound report fields must be nonnegative");
  }
  require_nonneg(m_const, "m_const");
  require_nonneg(mv_const, "mv_const");
  require_nonneg(d_T, "d_T");
  require_nonneg(c_uniform, "c_uniform");
  require_nonneg(d_uniform, "d_uniform");
  require_nonneg(m_prime, "m_prime");
  if (theorem_strang_ok && !m_const) {
    throw ConfigError("second-order eligibility requires m_const");
  }
  if (corollary_simple_ok && !mv_const) {
    throw ConfigError("first-order uniform eligibility requires mv_const");
  }
  if (corollary_strang_ok && !d_T) {
    throw ConfigError("second-order uniform eligibility requires d_T");
  }
}

double c_T(const Potential& v, double T, double dt, double mu0) {
  const double lam = lambda_constant(v);
  const double e = v.grad_at_origin_norm;
  const double one_dt = 1.0 + dt;
  // exp(2T(1 + L^2 (1+dt)^2)) appears twice in the bracket.
  const double big_exp = std::exp(2.0 * T * (1.0 + lam * lam * one_dt * one_dt));
  const double prefactor = 2.25 * lam * lam * (0.5 + lam) * (0.5 + lam) *
                           (std::expm1((2.0 + lam) * T) / (2.0 + lam));
  const double drift_term = 2.0 * one_dt * e * (big_exp - 1.0) /
                            (1.0 + one_dt * (1.0 + 2.0 * lam * lam * one_dt * one_dt));
  const double bracket = 1.0 + big_exp * mu0 + drift_term;
  return std::sqrt(prefactor * bracket);
}

double d_T(const Potential& v, double T, double nu0) {
  const double m = m_constant(v);  // throws UnboundedDerivative if infinite
  const double lam = lambda_constant(v);
  const double sq = (std::expm1((2.0 + lam) * T) / (2.0 + lam)) * m * m * m *
                    (1.0 + std::exp(3.0 * T) * (nu0 + m * m));
  return std::sqrt(sq);
}

double semiclassical_bound_simple(double dt, double hbar, double c_T_value,
                                  const Potential& v, double T, int d) {
  return c_T_value * dt + hbar_tail(hbar, v, T, d);
}

double semiclassical_bound_strang(double dt, double hbar, double d_T_value,
                                  const Potential& v, double T, int d) {
  return d_T_value * dt * dt + hbar_tail(hbar, v, T, d);
}

double uniform_constant_simple(const Potential& v, double T,
                               double mu_in_abs_p_moment, int d,
                               double c_T_value) {
  const double mv = mv_constant(v);  // throws UnboundedDerivative if infinite
  const double transport = 4.0 * mv *
                           (mv * T * T + static_cast<double>(d) + mu_in_abs_p_moment);
  const double growth = 2.0 * std::sqrt(static_cast<double>(d)) *
                        (1.0 + std::exp(0.5 * T * (1.0 + clamped_lip_sq(v))));
  return std::max({4.0 * std::sqrt(2.0) * mv, c_T_value, transport, growth});
}

double uniform_constant_strang(const Potential& v, double T,
                               [[maybe_unused]] const InitialMeasure& mu_in,
                               int d, double d_T_value, double m_prime) {
  // Eligibility: bounded derivatives through third order (same data that
  // makes d_T finite). m_constant throws when they are not.
  (void)m_constant(v);
  const double growth = 2.0 * std::sqrt(static_cast<double>(d)) *
                        (1.0 + std::exp(0.5 * T * (1.0 + clamped_lip_sq(v))));
  return std::max({d_T_value, m_prime, growth});
}

double propagation_factor(double t, double lambda_kinetic, const Potential& v) {
  const double pot_term = v.has_zero_force() ? 0.0 : clamped_lip_sq(v);
  return std::exp(0.5 * t * (lambda_kinetic + pot_term));
}

BoundReport make_bound_report(const Potential& v, double T, double dt_max,
                              const InitialMeasure& mu_in, int d,
                              std::optional<double> m_prime,
                              bool m_prime_calibrated) {
  if (!(T > 0.0) || !(dt_max > 0.0)) {
    throw ConfigError("bound report needs T > 0 and dt_max > 0");
  }
  BoundReport report;
  report.lambda = lambda_constant(v);
  report.e_const = v.grad_at_origin_norm;
  report.mu0 = mu_in.second_moment();
  report.nu0 = mu_in.momentum_moment_24();
  report.c_T = c_T(v, T, dt_max, report.mu0);
  report.theorem_simple_ok = std::isfinite(v.lip_grad);

  const bool third_order_data = std::isfinite(v.sup_grad) &&
                                std::isfinite(v.sup_hess) &&
                                std::isfinite(v.sup_third);
  if (third_order_data) {
    report.m_const = m_constant(v);
    report.d_T = d_T(v, T, report.nu0);
    report.theorem_strang_ok = true;
  }
  if (std::isfinite(v.sup_grad) && std::isfinite(v.sup_hess)) {
    report.mv_const = mv_constant(v);
    report.c_uniform = uniform_constant_simple(
        v, T, mu_in.abs_momentum_moment(), d, report.c_T);
    report.corollary_simple_ok = true;
  }
  report.m_prime = m_prime;
  report.m_prime_calibrated = m_prime_calibrated;
  if (report.d_T && m_prime) {
    report.d_uniform =
        uniform_constant_strang(v, T, mu_in, d, *report.d_T, *m_prime);
    report.corollary_strang_ok = true;
  }
  report.validate();
  return report;
}

}  // namespace semisplit
