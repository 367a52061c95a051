#include "semisplit/quantum.hpp"

#include <cmath>
#include <complex>
#include <numbers>

#include "fft.hpp"
#include "semisplit/errors.hpp"

namespace semisplit {

namespace {
constexpr std::complex<double> kI{0.0, 1.0};

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }
}  // namespace

double SpatialGrid::wavenumber(int m) const {
  const int f = (m <= n_points / 2) ? m : m - n_points;
  return std::numbers::pi * f / half_width;
}

void SpatialGrid::validate() const {
  if (dim != 1) throw ConfigError("SpatialGrid: only one spatial dimension is supported");
  if (n_points < 16 || !is_power_of_two(n_points))
    throw ConfigError("SpatialGrid: n_points must be a power of two >= 16");
  if (!(half_width > 0.0)) throw ConfigError("SpatialGrid: half_width must be positive");
}

double WaveFunction::norm() const {
  return std::sqrt(grid.dx() * amplitudes.squaredNorm());
}

void WaveFunction::validate(double norm_tol) const {
  grid.validate();
  if (amplitudes.size() != grid.n_points)
    throw ConfigError("WaveFunction: amplitude count does not match grid");
  if (!(hbar > 0.0)) throw ConfigError("WaveFunction: hbar must be positive");
  if (!amplitudes.allFinite()) throw ConfigError("WaveFunction: non-finite amplitude");
  const double n = norm();
  if (std::fabs(n - 1.0) > norm_tol)
    throw ConfigError("WaveFunction: norm " + std::to_string(n) + " deviates from 1");
}

void StateEnsemble::validate() const {
  if (members.empty() || members.size() != weights.size() ||
      members.size() != sample_points.size())
    throw ConfigError("StateEnsemble: empty or mismatched members/weights/sample_points");
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw ConfigError("StateEnsemble: negative weight");
    sum += w;
  }
  if (std::fabs(sum - 1.0) > 1e-12) throw ConfigError("StateEnsemble: weights must sum to 1");
  for (const auto& m : members) {
    m.validate();
    if (!(m.grid == members.front().grid) || m.hbar != members.front().hbar)
      throw ConfigError("StateEnsemble: members must share grid and hbar");
  }
}

WaveFunction coherent_state(const SpatialGrid& grid, double hbar, double q, double p) {
  grid.validate();
  if (!(hbar > 0.0)) throw ConfigError("coherent_state: hbar must be positive");
  const double margin = 8.0 * std::sqrt(hbar);
  if (std::fabs(q) > grid.half_width - margin)
    throw BoundaryClipping("coherent_state: center q=" + std::to_string(q) +
                           " too close to the boundary (need |q| <= L - 8 sqrt(hbar) = " +
                           std::to_string(grid.half_width - margin) + ")");
  WaveFunction psi;
  psi.grid = grid;
  psi.hbar = hbar;
  psi.amplitudes.resize(grid.n_points);
  const double amp = std::pow(std::numbers::pi * hbar, -0.25);
  for (int j = 0; j < grid.n_points; ++j) {
    const double x = grid.x(j);
    const double g = amp * std::exp(-(x - q) * (x - q) / (2.0 * hbar));
    psi.amplitudes[j] = g * std::exp(kI * (p * (x - 0.5 * q) / hbar));
  }
  psi.amplitudes /= psi.norm();
  return psi;
}

WaveFunction kinetic_propagate(const WaveFunction& psi, double t) {
  psi.validate();
  WaveFunction out = psi;
  if (t == 0.0) return out;
  const int n = psi.grid.n_points;
  Fft1D fft(static_cast<std::size_t>(n));
  Eigen::Map<Eigen::VectorXcd> buf(fft.data(), n);
  buf = psi.amplitudes;
  fft.forward();
  for (int m = 0; m < n; ++m) {
    const double k = psi.grid.wavenumber(m);
    buf[m] *= std::exp(-kI * (0.5 * t * psi.hbar * k * k));
  }
  fft.backward();
  out.amplitudes = buf / static_cast<double>(n);
  return out;
}

WaveFunction potential_propagate(const WaveFunction& psi, double t, const Potential& v) {
  psi.validate();
  if (v.dim != 1) throw ConfigError("potential_propagate: potential dimension must be 1");
  WaveFunction out = psi;
  if (t == 0.0) return out;
  Eigen::VectorXd x1(1);
  for (int j = 0; j < psi.grid.n_points; ++j) {
    x1[0] = psi.grid.x(j);
    out.amplitudes[j] *= std::exp(-kI * (t * v.eval(x1) / psi.hbar));
  }
  return out;
}

WaveFunction lie_trotter_step_q(const WaveFunction& psi, double dt, const Potential& v) {
  return potential_propagate(kinetic_propagate(psi, dt), dt, v);
}

WaveFunction strang_step_q(const WaveFunction& psi, double dt, const Potential& v) {
  return kinetic_propagate(potential_propagate(kinetic_propagate(psi, 0.5 * dt), dt, v),
                           0.5 * dt);
}

WaveFunction reference_propagate_q(const WaveFunction& psi, double t, const Potential& v,
                                   double dt_ref) {
  psi.validate();
  if (t == 0.0) return psi;
  if (!(dt_ref > 0.0)) throw ConfigError("reference_propagate_q: dt_ref must be positive");
  const long long n = std::llround(t / dt_ref);
  if (n < 1 || std::fabs(static_cast<double>(n) * dt_ref - t) > 1e-9 * std::max(1.0, std::fabs(t)))
    throw ConfigError("reference_propagate_q: t must be a positive integer multiple of dt_ref");
  SplitStepPropagator prop(psi.grid, v, psi.hbar);
  WaveFunction out = psi;
  prop.run(out, Scheme::strang, dt_ref, static_cast<int>(n));
  return out;
}

StateEnsemble sample_toeplitz(const InitialMeasure& mu, int n_states, const SpatialGrid& grid,
                              double hbar, std::uint64_t seed) {
  if (mu.dim != 1) throw ConfigError("sample_toeplitz: measure dimension must be 1");
  if (n_states < 1) throw ConfigError("sample_toeplitz: n_states must be >= 1");
  const auto pts = sample_measure_points(mu, n_states, seed);
  StateEnsemble ens;
  ens.rng_seed = seed;
  ens.weights.assign(pts.size(), 1.0 / static_cast<double>(pts.size()));
  ens.members.reserve(pts.size());
  ens.sample_points.reserve(pts.size());
  for (const auto& z : pts) {
    ens.members.push_back(coherent_state(grid, hbar, z[0], z[1]));
    ens.sample_points.emplace_back(z[0], z[1]);
  }
  ens.validate();
  return ens;
}

double l2_distance(const WaveFunction& a, const WaveFunction& b) {
  if (!(a.grid == b.grid) || a.hbar != b.hbar)
    throw ConfigError("l2_distance: mismatched grids or hbar");
  return std::sqrt(a.grid.dx() * (a.amplitudes - b.amplitudes).squaredNorm());
}

double l2_distance_phase_aligned(const WaveFunction& a, const WaveFunction& b) {
  if (!(a.grid == b.grid) || a.hbar != b.hbar)
    throw ConfigError("l2_distance_phase_aligned: mismatched grids or hbar");
  const double dx = a.grid.dx();
  const double na = dx * a.amplitudes.squaredNorm();
  const double nb = dx * b.amplitudes.squaredNorm();
  const double overlap = std::abs(a.amplitudes.dot(b.amplitudes)) * dx;
  return std::sqrt(std::max(0.0, na + nb - 2.0 * overlap));
}

double expected_position(const WaveFunction& psi) {
  double num = 0.0, den = 0.0;
  for (int j = 0; j < psi.grid.n_points; ++j) {
    const double w = std::norm(psi.amplitudes[j]);
    num += psi.grid.x(j) * w;
    den += w;
  }
  return num / den;
}

double position_variance(const WaveFunction& psi) {
  const double mean = expected_position(psi);
  double num = 0.0, den = 0.0;
  for (int j = 0; j < psi.grid.n_points; ++j) {
    const double w = std::norm(psi.amplitudes[j]);
    const double d = psi.grid.x(j) - mean;
    num += d * d * w;
    den += w;
  }
  return num / den;
}

namespace {
// Spectral weights |psi_hat|^2 of psi, plus first and second moments of k.
void spectral_moments(const WaveFunction& psi, double& k1, double& k2) {
  const int n = psi.grid.n_points;
  Fft1D fft(static_cast<std::size_t>(n));
  Eigen::Map<Eigen::VectorXcd> buf(fft.data(), n);
  buf = psi.amplitudes;
  fft.forward();
  double s0 = 0.0, s1 = 0.0, s2 = 0.0;
  for (int m = 0; m < n; ++m) {
    const double w = std::norm(buf[m]);
    const double k = psi.grid.wavenumber(m);
    s0 += w;
    s1 += k * w;
    s2 += k * k * w;
  }
  k1 = s1 / s0;
  k2 = s2 / s0;
}
}  // namespace

double expected_momentum(const WaveFunction& psi) {
  double k1, k2;
  spectral_moments(psi, k1, k2);
  return psi.hbar * k1;
}

double momentum_variance(const WaveFunction& psi) {
  double k1, k2;
  spectral_moments(psi, k1, k2);
  return psi.hbar * psi.hbar * (k2 - k1 * k1);
}

double expected_energy(const WaveFunction& psi, const Potential& v) {
  double k1, k2;
  spectral_moments(psi, k1, k2);
  double pot = 0.0, den = 0.0;
  Eigen::VectorXd x1(1);
  for (int j = 0; j < psi.grid.n_points; ++j) {
    const double w = std::norm(psi.amplitudes[j]);
    x1[0] = psi.grid.x(j);
    pot += v.eval(x1) * w;
    den += w;
  }
  return 0.5 * psi.hbar * psi.hbar * k2 + pot / den;
}

// ---------------------------------------------------------------------------

struct SplitStepPropagator::Impl {
  explicit Impl(int n) : fft(static_cast<std::size_t>(n)) {}

  Fft1D fft;
  Eigen::VectorXd vx;  // V(x_j)
  Eigen::VectorXd k2;  // k_m^2
  // Multipliers cached for the most recent dt.
  double cached_dt = -1.0;
  Eigen::VectorXcd kin_full, kin_half, pot_full;

  void prepare(double dt, double hbar, int n) {
    if (dt == cached_dt) return;
    kin_full.resize(n);
    kin_half.resize(n);
    pot_full.resize(n);
    for (int m = 0; m < n; ++m) {
      kin_full[m] = std::exp(-kI * (0.5 * dt * hbar * k2[m]));
      kin_half[m] = std::exp(-kI * (0.25 * dt * hbar * k2[m]));
    }
    for (int j = 0; j < n; ++j) pot_full[j] = std::exp(-kI * (dt * vx[j] / hbar));
    cached_dt = dt;
  }
};

SplitStepPropagator::SplitStepPropagator(const SpatialGrid& grid, const Potential& v,
                                         double hbar, double p_max_hint)
    : grid_(grid), hbar_(hbar) {
  grid.validate();
  if (!(hbar > 0.0)) throw ConfigError("SplitStepPropagator: hbar must be positive");
  if (v.dim != 1) throw ConfigError("SplitStepPropagator: potential dimension must be 1");
  double dx_max = std::sqrt(hbar) / 4.0;
  if (p_max_hint > 0.0) dx_max = std::min(dx_max, hbar / (2.0 * p_max_hint));
  if (grid.dx() > dx_max * (1.0 + 1e-12))
    throw SpectralUnderresolution(
        "SplitStepPropagator: grid spacing " + std::to_string(grid.dx()) +
        " exceeds the resolution requirement " + std::to_string(dx_max));
  impl_ = std::make_unique<Impl>(grid.n_points);
  impl_->vx.resize(grid.n_points);
  impl_->k2.resize(grid.n_points);
  Eigen::VectorXd x1(1);
  for (int j = 0; j < grid.n_points; ++j) {
    x1[0] = grid.x(j);
    impl_->vx[j] = v.eval(x1);
    const double k = grid.wavenumber(j);
    impl_->k2[j] = k * k;
  }
}

SplitStepPropagator::~SplitStepPropagator() = default;

void SplitStepPropagator::run(WaveFunction& psi, Scheme scheme, double dt, int n_steps) {
  if (scheme == Scheme::reference)
    throw ConfigError("SplitStepPropagator: use reference_propagate_q for reference runs");
  if (!(psi.grid == grid_) || psi.hbar != hbar_)
    throw ConfigError("SplitStepPropagator: state grid or hbar does not match propagator");
  if (dt < 0.0 || n_steps < 0) throw ConfigError("SplitStepPropagator: bad dt or n_steps");
  if (dt == 0.0 || n_steps == 0) return;

  const int n = grid_.n_points;
  impl_->prepare(dt, hbar_, n);
  Eigen::Map<Eigen::VectorXcd> buf(impl_->fft.data(), n);
  buf = psi.amplitudes;

  const double inv_n = 1.0 / static_cast<double>(n);
  const double spectral_total = static_cast<double>(n) * psi.amplitudes.squaredNorm();

  // Indices of the top 1/8 of wavenumbers: |freq index| >= 7n/16.
  const int band_lo = (7 * n) / 16;
  auto check_aliasing = [&]() {
    if (!guards.check_aliasing) return;
    double band = 0.0;
    for (int m = band_lo; m <= n - band_lo; ++m) band += std::norm(buf[m]);
    if (band > guards.aliasing_tol * spectral_total)
      throw SpectralUnderresolution(
          "SplitStepPropagator: spectral mass fraction " +
          std::to_string(band / spectral_total) + " in the top 1/8 of wavenumbers");
  };

  int j_band = 0;
  if (guards.boundary_band > 0.0)
    j_band = std::min(n / 2, static_cast<int>(std::ceil(guards.boundary_band / grid_.dx())));
  auto check_boundary = [&]() {
    if (j_band <= 0) return;
    double mass = 0.0;
    for (int j = 0; j < j_band; ++j) mass += std::norm(buf[j]);
    for (int j = n - j_band; j < n; ++j) mass += std::norm(buf[j]);
    mass *= grid_.dx();
    if (mass > guards.boundary_tol)
      throw BoundaryClipping("SplitStepPropagator: probability mass " + std::to_string(mass) +
                             " within " + std::to_string(guards.boundary_band) +
                             " of the domain boundary");
  };

  auto kinetic = [&](const Eigen::VectorXcd& mult) {
    impl_->fft.forward();
    buf.array() *= mult.array();
    check_aliasing();
    impl_->fft.backward();
    buf *= inv_n;
  };

  if (scheme == Scheme::lie_trotter) {
    for (int s = 0; s < n_steps; ++s) {
      kinetic(impl_->kin_full);
      buf.array() *= impl_->pot_full.array();
      check_boundary();
    }
  } else {  // Strang with merged interior kinetics
    kinetic(impl_->kin_half);
    for (int s = 0; s < n_steps; ++s) {
      buf.array() *= impl_->pot_full.array();
      check_boundary();
      kinetic(s + 1 < n_steps ? impl_->kin_full : impl_->kin_half);
    }
  }

  psi.amplitudes = buf;
}

}  // namespace semisplit
