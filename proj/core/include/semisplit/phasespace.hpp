#pragma once

#include <Eigen/Dense>
#include <string>

#include "semisplit/ot.hpp"
#include "semisplit/quantum.hpp"

namespace semisplit {

// Uniform axis of grid nodes offset + i * spacing, i = 0..count-1.
struct PhaseAxis {
  double offset = 0.0;
  double spacing = 0.0;
  int count = 0;

  double node(int i) const { return offset + i * spacing; }
  double last() const { return node(count - 1); }
};

// Rectangular phase-space grid (one position and one momentum axis).
struct PhaseGrid {
  PhaseAxis x;
  PhaseAxis xi;

  double cell_volume() const { return x.spacing * xi.spacing; }
  void validate() const;  // spacings > 0, counts >= 8
};

// Real density sampled on a PhaseGrid; values[i][l] lives at
// (x.node(i), xi.node(l)). Mass integrates values against the cell volume.
// is_signed=true marks quasi-probability data that may go negative.
struct PhaseDensity {
  PhaseGrid grid;
  Eigen::MatrixXd values;  // x.count rows, xi.count cols
  bool is_signed = false;

  double mass() const;
  // Checks shape, mass within mass_tol of 1 and (unless signed) that no value
  // lies below -1e-12.
  void validate(double mass_tol = 1e-6) const;
};

// Builds the smallest grid with the given spacings whose nodes cover
// [x_lo, x_hi] x [xi_lo, xi_hi] (at least 8 nodes per axis).
PhaseGrid make_phase_grid(double x_lo, double x_hi, double x_spacing, double xi_lo,
                          double xi_hi, double xi_spacing);

// Default grid matching a wavefunction discretization: position axis reuses
// the spatial nodes, momentum axis spans the discrete spectral range.
PhaseGrid default_phase_grid(const SpatialGrid& grid, double hbar);

// Quasi-probability transform W(x, xi) = (dx / (pi hbar)) *
//   sum_k psi(x + k dx) conj(psi(x - k dx)) exp(-2 i xi k dx / hbar),
// evaluated at every grid node (x nodes must coincide with spatial nodes).
// The result is checked real (residue <= 1e-10 relative to the peak) and of
// unit mass within 1e-6.
PhaseDensity wigner_transform(const WaveFunction& psi, const PhaseGrid& grid);

// Gaussian smoothing of a phase density by the heat kernel at time hbar/4
// (variance hbar/2 per coordinate), sampled and mass-normalized per axis.
// Values below -1e-6 raise NegativeAfterSmoothing; remaining negatives are
// clamped to zero.
PhaseDensity husimi_via_smoothing(const PhaseDensity& w, double hbar);

// Direct Husimi evaluation |<q,p|psi>|^2 / (2 pi hbar) via Gaussian-windowed
// discrete Fourier sums; nonnegative by construction, unit mass within 1e-6.
PhaseDensity husimi_direct(const WaveFunction& psi, const PhaseGrid& grid);

// Weighted average of the members' Husimi densities (ordered reduction).
PhaseDensity husimi_of_ensemble(const StateEnsemble& ens, const PhaseGrid& grid,
                                int jobs = 1);

struct MeasureExtraction {
  DiscreteMeasure measure;
  double discarded_mass = 0.0;  // fraction of the density's mass dropped
};

// Discretizes a nonnegative density into a finitely supported measure keeping
// cells with value >= threshold * max value; weights renormalized to 1.
// Discarded fraction above 1e-3 raises ExcessiveTruncation.
MeasureExtraction density_to_measure(const PhaseDensity& pd, double threshold);

// Aggregates factor x factor blocks of cells into one; preserves mass exactly.
// Axis counts must be divisible by factor.
PhaseDensity rebin(const PhaseDensity& pd, int factor);

// Writes "x,xi,value" rows for external plotting.
void write_phase_density_csv(const PhaseDensity& pd, const std::string& path);

}  // namespace semisplit
