#include "semisplit/classical.hpp"

#include <cmath>

#include "semisplit/errors.hpp"
#include "semisplit/util.hpp"

namespace semisplit {

void PhaseEnsemble::validate() const {
  if (points.empty() || points.size() != weights.size())
    throw ConfigError("PhaseEnsemble: empty or mismatched points/weights");
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw ConfigError("PhaseEnsemble: negative weight");
    sum += w;
  }
  if (std::fabs(sum - 1.0) > 1e-12) throw ConfigError("PhaseEnsemble: weights must sum to 1");
  for (const auto& p : points)
    if (!p.x.allFinite() || !p.xi.allFinite())
      throw ConfigError("PhaseEnsemble: non-finite phase point");
}

PhasePoint drift(const PhasePoint& p, double t) {
  return {p.x + t * p.xi, p.xi};
}

PhasePoint kick(const PhasePoint& p, double t, const Potential& v) {
  return {p.x, p.xi - t * v.grad(p.x)};
}

PhasePoint lie_trotter_step(const PhasePoint& p, double dt, const Potential& v) {
  return kick(drift(p, dt), dt, v);
}

PhasePoint strang_step(const PhasePoint& p, double dt, const Potential& v) {
  return drift(kick(drift(p, 0.5 * dt), dt, v), 0.5 * dt);
}

namespace {

// Dormand-Prince 5(4) adaptive integrator on the flattened state (x, xi).
// RHS: x' = xi, xi' = -grad V(x).
PhasePoint dopri5(const PhasePoint& p0, double t_final, const Potential& v, double tol) {
  const int d = static_cast<int>(p0.x.size());
  using Vec = Eigen::VectorXd;
  auto rhs = [&](const Vec& y, Vec& dy) {
    dy.head(d) = y.tail(d);
    dy.tail(d) = -v.grad(y.head(d));
  };

  static const double a21 = 1.0 / 5;
  static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                      a54 = -212.0 / 729;
  static const double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                      a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                      b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static const double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                      e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  Vec y(2 * d);
  y.head(d) = p0.x;
  y.tail(d) = p0.xi;
  const double t_sign = (t_final >= 0.0) ? 1.0 : -1.0;
  const double t_abs = std::fabs(t_final);
  if (t_abs == 0.0) return p0;

  Vec k1(2 * d), k2(2 * d), k3(2 * d), k4(2 * d), k5(2 * d), k6(2 * d), k7(2 * d);
  Vec ytmp(2 * d), ynew(2 * d), yerr(2 * d);

  double t = 0.0;
  double h = std::min(t_abs, 0.1);
  rhs(y, k1);
  const double h_min = 1e-14 * std::max(1.0, t_abs);

  while (t < t_abs) {
    if (h < h_min)
      throw StepSizeUnderflow("reference_flow: step size underflow at t=" +
                              std::to_string(t_sign * t));
    if (t + h > t_abs) h = t_abs - t;
    const double hs = t_sign * h;

    ytmp = y + hs * (a21 * k1);
    rhs(ytmp, k2);
    ytmp = y + hs * (a31 * k1 + a32 * k2);
    rhs(ytmp, k3);
    ytmp = y + hs * (a41 * k1 + a42 * k2 + a43 * k3);
    rhs(ytmp, k4);
    ytmp = y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    rhs(ytmp, k5);
    ytmp = y + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    rhs(ytmp, k6);
    ynew = y + hs * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    rhs(ynew, k7);
    yerr = hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

    double err = 0.0;
    for (int i = 0; i < 2 * d; ++i) {
      const double sc = tol + tol * std::max(std::fabs(y[i]), std::fabs(ynew[i]));
      const double r = yerr[i] / sc;
      err += r * r;
    }
    err = std::sqrt(err / (2 * d));

    if (err <= 1.0) {
      t += h;
      y.swap(ynew);
      k1.swap(k7);  // FSAL
    }
    const double safety = 0.9;
    double factor = (err > 0.0) ? safety * std::pow(err, -0.2) : 5.0;
    factor = std::min(5.0, std::max(0.2, factor));
    h *= factor;
  }

  PhasePoint out;
  out.x = y.head(d);
  out.xi = y.tail(d);
  return out;
}

}  // namespace

PhasePoint reference_flow(const PhasePoint& p, double t, const Potential& v, double tol) {
  if (tol <= 0.0) throw ConfigError("reference_flow: tol must be positive");
  if (t == 0.0) return p;
  switch (v.kind) {
    case Potential::Kind::zero:
      return drift(p, t);
    case Potential::Kind::harmonic: {
      const double w = v.param;
      if (w == 0.0) return drift(p, t);
      const double c = std::cos(w * t), s = std::sin(w * t);
      PhasePoint out;
      out.x = c * p.x + (s / w) * p.xi;
      out.xi = -w * s * p.x + c * p.xi;
      return out;
    }
    default:
      return dopri5(p, t, v, tol);
  }
}

PhaseEnsemble evolve_ensemble(const PhaseEnsemble& ens, Scheme scheme, double dt,
                              int n_steps, const Potential& v, int jobs,
                              double reference_tol) {
  if (dt < 0.0 || n_steps < 0) throw ConfigError("evolve_ensemble: bad dt or n_steps");
  PhaseEnsemble out = ens;
  if (n_steps == 0 || dt == 0.0) return out;
  parallel_for(ens.points.size(), jobs, [&](std::size_t i) {
    PhasePoint p = ens.points[i];
    switch (scheme) {
      case Scheme::lie_trotter:
        for (int s = 0; s < n_steps; ++s) p = lie_trotter_step(p, dt, v);
        break;
      case Scheme::strang:
        for (int s = 0; s < n_steps; ++s) p = strang_step(p, dt, v);
        break;
      case Scheme::reference:
        p = reference_flow(p, static_cast<double>(n_steps) * dt, v, reference_tol);
        break;
    }
    out.points[i] = std::move(p);
  });
  return out;
}

double second_moment(const PhaseEnsemble& ens) {
  double m = 0.0;
  for (std::size_t i = 0; i < ens.points.size(); ++i)
    m += ens.weights[i] * (ens.points[i].x.squaredNorm() + ens.points[i].xi.squaredNorm());
  return m;
}

double momentum_moment_24(const PhaseEnsemble& ens) {
  double m = 0.0;
  for (std::size_t i = 0; i < ens.points.size(); ++i) {
    const double p2 = ens.points[i].xi.squaredNorm();
    m += ens.weights[i] * (p2 + p2 * p2);
  }
  return m;
}

PhaseEnsemble sample_phase_ensemble(const InitialMeasure& mu, int n_particles,
                                    std::uint64_t seed) {
  const auto pts = sample_measure_points(mu, n_particles, seed);
  const int d = mu.dim;
  PhaseEnsemble ens;
  ens.rng_seed = seed;
  ens.points.reserve(pts.size());
  ens.weights.assign(pts.size(), 1.0 / static_cast<double>(pts.size()));
  for (const auto& z : pts) {
    PhasePoint p;
    p.x = z.head(d);
    p.xi = z.tail(d);
    ens.points.push_back(std::move(p));
  }
  ens.validate();
  return ens;
}

}  // namespace semisplit
