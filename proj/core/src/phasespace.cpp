#include "semisplit/phasespace.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <numbers>

#include "semisplit/errors.hpp"
#include "semisplit/util.hpp"

namespace semisplit {

namespace {
constexpr std::complex<double> kI{0.0, 1.0};
}

void PhaseGrid::validate() const {
  if (!(x.spacing > 0.0) || !(xi.spacing > 0.0))
    throw ConfigError("PhaseGrid: spacings must be positive");
  if (x.count < 8 || xi.count < 8) throw ConfigError("PhaseGrid: counts must be >= 8");
}

double PhaseDensity::mass() const { return values.sum() * grid.cell_volume(); }

void PhaseDensity::validate(double mass_tol) const {
  grid.validate();
  if (values.rows() != grid.x.count || values.cols() != grid.xi.count)
    throw ConfigError("PhaseDensity: value array does not match grid");
  if (!values.allFinite()) throw ConfigError("PhaseDensity: non-finite value");
  if (!is_signed && values.minCoeff() < -1e-12)
    throw ConfigError("PhaseDensity: negative value in nonnegative density");
  const double m = mass();
  if (std::fabs(m - 1.0) > mass_tol)
    throw ConfigError("PhaseDensity: mass " + std::to_string(m) + " deviates from 1");
}

PhaseGrid make_phase_grid(double x_lo, double x_hi, double x_spacing, double xi_lo,
                          double xi_hi, double xi_spacing) {
  if (!(x_spacing > 0.0) || !(xi_spacing > 0.0) || !(x_hi > x_lo) || !(xi_hi > xi_lo))
    throw ConfigError("make_phase_grid: bad extents or spacings");
  PhaseGrid g;
  g.x.offset = x_lo;
  g.x.spacing = x_spacing;
  g.x.count = std::max(8, static_cast<int>(std::ceil((x_hi - x_lo) / x_spacing)) + 1);
  g.xi.offset = xi_lo;
  g.xi.spacing = xi_spacing;
  g.xi.count = std::max(8, static_cast<int>(std::ceil((xi_hi - xi_lo) / xi_spacing)) + 1);
  g.validate();
  return g;
}

PhaseGrid default_phase_grid(const SpatialGrid& grid, double hbar) {
  grid.validate();
  PhaseGrid g;
  g.x.offset = grid.x(0);
  g.x.spacing = grid.dx();
  g.x.count = grid.n_points;
  const double k_max = std::numbers::pi * (grid.n_points / 2) / grid.half_width;
  g.xi.count = grid.n_points;
  g.xi.spacing = 2.0 * hbar * k_max / grid.n_points;
  g.xi.offset = -hbar * k_max;
  g.validate();
  return g;
}

PhaseDensity wigner_transform(const WaveFunction& psi, const PhaseGrid& grid) {
  psi.validate();
  grid.validate();
  const int n = psi.grid.n_points;
  const double dx = psi.grid.dx();
  const double hbar = psi.hbar;

  // Numerical support of the state (indices with non-negligible amplitude).
  double amax = 0.0;
  for (int j = 0; j < n; ++j) amax = std::max(amax, std::abs(psi.amplitudes[j]));
  int j_lo = 0, j_hi = n - 1;
  while (j_lo < n && std::abs(psi.amplitudes[j_lo]) <= 1e-16 * amax) ++j_lo;
  while (j_hi >= 0 && std::abs(psi.amplitudes[j_hi]) <= 1e-16 * amax) --j_hi;
  if (j_lo > j_hi) throw ConfigError("wigner_transform: state has empty support");

  PhaseDensity out;
  out.grid = grid;
  out.is_signed = true;
  out.values.setZero(grid.x.count, grid.xi.count);

  Eigen::MatrixXcd acc(grid.x.count, grid.xi.count);
  acc.setZero();

  for (int i = 0; i < grid.x.count; ++i) {
    const double xq = grid.x.node(i);
    const double rel = (xq - psi.grid.x(0)) / dx;
    const int j0 = static_cast<int>(std::llround(rel));
    if (std::fabs(rel - j0) > 1e-9)
      throw ConfigError(
          "wigner_transform: phase-grid x nodes must coincide with spatial nodes");
    if (j0 < j_lo || j0 > j_hi) continue;
    const int K = std::min(j_hi - j0, j0 - j_lo);
    for (int l = 0; l < grid.xi.count; ++l) {
      const double p = grid.xi.node(l);
      // sum over k of psi[j0+k] conj(psi[j0-k]) e^{-2 i p k dx / hbar};
      // the k and -k terms are conjugates, so accumulate k >= 1 and double.
      const std::complex<double> step = std::exp(-kI * (2.0 * p * dx / hbar));
      std::complex<double> phase = step;
      std::complex<double> s = std::norm(psi.amplitudes[j0]);
      for (int k = 1; k <= K; ++k) {
        s += 2.0 * (psi.amplitudes[j0 + k] * std::conj(psi.amplitudes[j0 - k]) * phase).real();
        phase *= step;
      }
      acc(i, l) = s;
    }
  }
  acc *= dx / (std::numbers::pi * hbar);

  const double max_re = acc.real().cwiseAbs().maxCoeff();
  const double max_im = acc.imag().cwiseAbs().maxCoeff();
  if (max_im > 1e-10 * std::max(1.0, max_re))
    throw ImaginaryResidueTooLarge("wigner_transform: imaginary residue " +
                                   std::to_string(max_im) + " against peak " +
                                   std::to_string(max_re));
  out.values = acc.real();
  const double m = out.mass();
  if (std::fabs(m - 1.0) > 1e-6)
    throw ConfigError("wigner_transform: mass " + std::to_string(m) +
                      " deviates from 1 (grid coverage insufficient)");
  return out;
}

namespace {

// In-place separable convolution along rows (axis=0) or columns (axis=1)
// with a sampled unit-mass Gaussian, zero extension at the edges.
void convolve_axis(Eigen::MatrixXd& v, int axis, double sigma, double spacing) {
  const int radius = std::max(1, static_cast<int>(std::ceil(8.5 * sigma / spacing)));
  Eigen::VectorXd taps(2 * radius + 1);
  for (int k = -radius; k <= radius; ++k)
    taps[k + radius] = std::exp(-0.5 * (k * spacing) * (k * spacing) / (sigma * sigma));
  taps /= taps.sum();

  if (axis == 0) {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(v.rows(), v.cols());
    for (int i = 0; i < v.rows(); ++i) {
      const int ka = std::max(-radius, -i);
      const int kb = std::min<int>(radius, static_cast<int>(v.rows()) - 1 - i);
      for (int k = ka; k <= kb; ++k) out.row(i + k) += taps[k + radius] * v.row(i);
    }
    v.swap(out);
  } else {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(v.rows(), v.cols());
    for (int l = 0; l < v.cols(); ++l) {
      const int ka = std::max(-radius, -l);
      const int kb = std::min<int>(radius, static_cast<int>(v.cols()) - 1 - l);
      for (int k = ka; k <= kb; ++k) out.col(l + k) += taps[k + radius] * v.col(l);
    }
    v.swap(out);
  }
}

}  // namespace

PhaseDensity husimi_via_smoothing(const PhaseDensity& w, double hbar) {
  w.grid.validate();
  if (!(hbar > 0.0)) throw ConfigError("husimi_via_smoothing: hbar must be positive");
  const double sigma = std::sqrt(0.5 * hbar);
  PhaseDensity out;
  out.grid = w.grid;
  out.is_signed = false;
  out.values = w.values;
  convolve_axis(out.values, 0, sigma, w.grid.x.spacing);
  convolve_axis(out.values, 1, sigma, w.grid.xi.spacing);
  const double mn = out.values.minCoeff();
  if (mn < -1e-6)
    throw NegativeAfterSmoothing("husimi_via_smoothing: minimum value " +
                                 std::to_string(mn) + " below -1e-6");
  out.values = out.values.cwiseMax(0.0);
  return out;
}

PhaseDensity husimi_direct(const WaveFunction& psi, const PhaseGrid& grid) {
  psi.validate();
  grid.validate();
  const int n = psi.grid.n_points;
  const double dx = psi.grid.dx();
  const double hbar = psi.hbar;
  const double x0 = psi.grid.x(0);
  const double r_win = 9.1 * std::sqrt(hbar);
  // |<q,p|psi>|^2 / (2 pi hbar) with
  // <q,p|psi> = (pi hbar)^{-1/4} e^{i p q/(2 hbar)} dx sum_j g_j psi_j e^{-i p x_j/hbar}
  const double prefactor =
      dx * dx / (2.0 * std::numbers::pi * hbar * std::sqrt(std::numbers::pi * hbar));

  PhaseDensity out;
  out.grid = grid;
  out.is_signed = false;
  out.values.setZero(grid.x.count, grid.xi.count);

  // Momentum-phase step per xi node (independent of q).
  std::vector<std::complex<double>> steps(grid.xi.count);
  for (int l = 0; l < grid.xi.count; ++l)
    steps[l] = std::exp(-kI * (grid.xi.node(l) * dx / hbar));

  std::vector<std::complex<double>> wnd;
  wnd.reserve(static_cast<std::size_t>(2.0 * r_win / dx) + 4);

  for (int i = 0; i < grid.x.count; ++i) {
    const double q = grid.x.node(i);
    int ja = static_cast<int>(std::ceil((q - r_win - x0) / dx));
    int jb = static_cast<int>(std::floor((q + r_win - x0) / dx));
    ja = std::max(ja, 0);
    jb = std::min(jb, n - 1);
    if (ja > jb) continue;
    wnd.resize(jb - ja + 1);
    for (int j = ja; j <= jb; ++j) {
      const double u = x0 + j * dx - q;
      wnd[j - ja] = std::exp(-u * u / (2.0 * hbar)) * psi.amplitudes[j];
    }
    const double xa = x0 + ja * dx;
    for (int l = 0; l < grid.xi.count; ++l) {
      const double p = grid.xi.node(l);
      std::complex<double> phase = std::exp(-kI * (p * xa / hbar));
      const std::complex<double> step = steps[l];
      std::complex<double> s{0.0, 0.0};
      for (std::size_t t = 0; t < wnd.size(); ++t) {
        s += wnd[t] * phase;
        phase *= step;
      }
      out.values(i, l) = prefactor * std::norm(s);
    }
  }
  out.validate(1e-6);
  return out;
}

PhaseDensity husimi_of_ensemble(const StateEnsemble& ens, const PhaseGrid& grid, int jobs) {
  ens.validate();
  grid.validate();
  std::vector<Eigen::MatrixXd> member_values(ens.members.size());
  parallel_for(ens.members.size(), jobs, [&](std::size_t i) {
    member_values[i] = husimi_direct(ens.members[i], grid).values;
  });
  PhaseDensity out;
  out.grid = grid;
  out.is_signed = false;
  out.values.setZero(grid.x.count, grid.xi.count);
  for (std::size_t i = 0; i < member_values.size(); ++i)
    out.values += ens.weights[i] * member_values[i];
  out.validate(1e-6);
  return out;
}

MeasureExtraction density_to_measure(const PhaseDensity& pd, double threshold) {
  pd.grid.validate();
  if (pd.is_signed) throw ConfigError("density_to_measure: density must be nonnegative");
  if (threshold < 0.0) throw ConfigError("density_to_measure: threshold must be >= 0");
  const double vmax = pd.values.maxCoeff();
  if (!(vmax > 0.0)) throw ConfigError("density_to_measure: density is identically zero");
  const double cut = threshold * vmax;

  double total = 0.0, kept = 0.0;
  MeasureExtraction out;
  for (int i = 0; i < pd.values.rows(); ++i)
    for (int l = 0; l < pd.values.cols(); ++l) {
      const double v = pd.values(i, l);
      if (v <= 0.0) continue;
      total += v;
      if (v >= cut && v > 0.0) kept += v;
    }
  if (!(kept > 0.0)) throw ConfigError("density_to_measure: threshold removed all mass");
  out.discarded_mass = 1.0 - kept / total;
  if (out.discarded_mass > 1e-3)
    throw ExcessiveTruncation("density_to_measure: discarded mass fraction " +
                              std::to_string(out.discarded_mass));
  out.measure.support.reserve(1024);
  out.measure.weights.reserve(1024);
  for (int i = 0; i < pd.values.rows(); ++i)
    for (int l = 0; l < pd.values.cols(); ++l) {
      const double v = pd.values(i, l);
      if (v >= cut && v > 0.0) {
        Eigen::VectorXd z(2);
        z << pd.grid.x.node(i), pd.grid.xi.node(l);
        out.measure.support.push_back(std::move(z));
        out.measure.weights.push_back(v / kept);
      }
    }
  return out;
}

PhaseDensity rebin(const PhaseDensity& pd, int factor) {
  pd.grid.validate();
  if (factor < 1) throw ConfigError("rebin: factor must be >= 1");
  if (factor == 1) return pd;
  if (pd.grid.x.count % factor != 0 || pd.grid.xi.count % factor != 0)
    throw ConfigError("rebin: axis counts must be divisible by the factor");
  PhaseDensity out;
  out.is_signed = pd.is_signed;
  out.grid.x.count = pd.grid.x.count / factor;
  out.grid.x.spacing = pd.grid.x.spacing * factor;
  out.grid.x.offset = pd.grid.x.offset + 0.5 * (factor - 1) * pd.grid.x.spacing;
  out.grid.xi.count = pd.grid.xi.count / factor;
  out.grid.xi.spacing = pd.grid.xi.spacing * factor;
  out.grid.xi.offset = pd.grid.xi.offset + 0.5 * (factor - 1) * pd.grid.xi.spacing;
  out.values.setZero(out.grid.x.count, out.grid.xi.count);
  const double inv = 1.0 / (static_cast<double>(factor) * factor);
  for (int i = 0; i < pd.grid.x.count; ++i)
    for (int l = 0; l < pd.grid.xi.count; ++l)
      out.values(i / factor, l / factor) += pd.values(i, l) * inv;
  return out;
}

void write_phase_density_csv(const PhaseDensity& pd, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("write_phase_density_csv: cannot open " + path);
  f << "x,xi,value\n";
  for (int i = 0; i < pd.values.rows(); ++i)
    for (int l = 0; l < pd.values.cols(); ++l)
      f << format_double(pd.grid.x.node(i)) << ',' << format_double(pd.grid.xi.node(l))
        << ',' << format_double(pd.values(i, l)) << '\n';
  if (!f.good()) throw IoError("write_phase_density_csv: write failed for " + path);
}

}  // namespace semisplit
