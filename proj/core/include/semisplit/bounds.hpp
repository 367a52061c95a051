#pragma once

#include <optional>

#include "semisplit/measures.hpp"
#include "semisplit/potential.hpp"

namespace semisplit {

// Every closed-form constant and error envelope used to check measured
// splitting errors against theory. Optional fields are absent when the
// potential lacks the derivative bounds the constant requires.
struct BoundReport {
  double lambda = 0.0;   // max(1, |grad V(0)|, sup|hess V|)
  double e_const = 0.0;  // |grad V(0)|
  std::optional<double> m_const;   // max(1, sup|grad V|^2, sup|hess V|^2, sup|third V|^2)
  std::optional<double> mv_const;  // max(2 sup|grad V|, sup|hess V|)
  double mu0 = 0.0;  // E[|q|^2 + |p|^2] of the initial measure
  double nu0 = 0.0;  // E[|p|^2 + |p|^4] of the initial measure
  double c_T = 0.0;  // first-order classical splitting constant (at dt_max)
  std::optional<double> d_T;        // second-order classical splitting constant
  std::optional<double> c_uniform;  // hbar-independent first-order constant
  std::optional<double> d_uniform;  // hbar-independent second-order constant
  std::optional<double> m_prime;    // calibrated quantum Strang constant
  bool m_prime_calibrated = false;  // true when m_prime came from calibration

  // Which error estimates the potential qualifies for.
  bool theorem_simple_ok = false;    // semiclassical bound, first order
  bool theorem_strang_ok = false;    // semiclassical bound, second order
  bool corollary_simple_ok = false;  // uniform-in-hbar bound, first order
  bool corollary_strang_ok = false;  // uniform-in-hbar bound, second order

  void validate() const;  // present values >= 0, flags consistent
};

// First-order splitting constant C_T: the positive square root of
//   (9/4) L^2 (1/2+L)^2 (e^{(2+L)T}-1)/(2+L) *
//     [ 1 + e^{2T(1+L^2(1+dt)^2)} mu0
//         + 2(1+dt) E (e^{2T(1+L^2(1+dt)^2)}-1) / (1+(1+dt)(1+2L^2(1+dt)^2)) ]
// with L = lambda_constant(V) and E = |grad V(0)|.
// Preconditions: 0 < dt <= 1/2, T > 0.
double c_T(const Potential& v, double T, double dt, double mu0);

// Second-order splitting constant D_T: the positive square root of
//   (e^{(2+L)T}-1)/(2+L) * M^3 * (1 + e^{3T}(nu0 + M^2))
// with M = m_constant(V). Throws UnboundedDerivative when M is infinite.
double d_T(const Potential& v, double T, double nu0);

// Semiclassical envelope for the first-order scheme:
//   c_T_value * dt + 2 sqrt(d hbar) (1 + exp(T(1+max(1,Lip(grad V)^2))/2)).
double semiclassical_bound_simple(double dt, double hbar, double c_T_value,
                                  const Potential& v, double T, int d);

// Semiclassical envelope for the Strang scheme:
//   d_T_value * dt^2 + 2 sqrt(d hbar) (1 + exp(T(1+max(1,Lip(grad V)^2))/2)).
double semiclassical_bound_strang(double dt, double hbar, double d_T_value,
                                  const Potential& v, double T, int d);

// hbar-independent first-order constant
//   max( 4 sqrt(2) M(V), c_T, 4 M(V)(M(V) T^2 + d + E|p|),
//        2 sqrt(d)(1 + exp(T(1+max(1,Lip^2))/2)) );
// the truncated-distance bound is then 2 * C * dt^{1/3}.
// Throws UnboundedDerivative when M(V) is infinite.
double uniform_constant_simple(const Potential& v, double T,
                               double mu_in_abs_p_moment, int d, double c_T_value);

// hbar-independent second-order constant
//   max( d_T, m_prime, 2 sqrt(d)(1 + exp(T(1+max(1,Lip^2))/2)) );
// the truncated-distance bound is then 2 * D * dt^{2/3}. The initial measure
// is part of the constant's signature but the closed form does not consume
// it; m_prime carries the measure-dependent calibration.
// Throws UnboundedDerivative when V lacks bounded derivatives through
// third order.
double uniform_constant_strang(const Potential& v, double T,
                               const InitialMeasure& mu_in, int d,
                               double d_T_value, double m_prime);

// Per-step energy-functional amplification exp(t(lambda + pot_term)/2) where
// pot_term = max(1, Lip(grad V)^2) when V carries force and 0 when V has no
// force. The split makes the one-step composition exact:
//   propagation_factor(dt, 1, V==0) * propagation_factor(dt, 0, V)
//     == exp(dt(1 + max(1, Lip(grad V)^2))/2).
double propagation_factor(double t, double lambda_kinetic, const Potential& v);

// Evaluates every constant the potential/measure pair qualifies for.
// c_T is evaluated at dt_max (the formula is increasing in dt, so one value
// bounds a whole step-size sweep). m_prime, when provided, feeds d_uniform.
BoundReport make_bound_report(const Potential& v, double T, double dt_max,
                              const InitialMeasure& mu_in, int d,
                              std::optional<double> m_prime = std::nullopt,
                              bool m_prime_calibrated = false);

}  // namespace semisplit
