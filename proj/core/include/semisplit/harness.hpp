#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "semisplit/bounds.hpp"
#include "semisplit/classical.hpp"
#include "semisplit/measures.hpp"
#include "semisplit/ot.hpp"
#include "semisplit/potential.hpp"
#include "semisplit/quantum.hpp"

namespace semisplit {

enum class ExperimentKind {
  classical_convergence,  // particle clouds, split vs exact flow, W2 errors
  quantum_fixed_hbar,     // wavefunctions at one hbar, L2 errors vs reference
  uniform_sweep,          // (dt, hbar) grid, Husimi-measure distances
};

enum class Metric { w2_classical, l2_quantum, w2_husimi, dist1_husimi };

std::string to_string(ExperimentKind kind);
std::string to_string(Metric metric);
std::string to_string(Scheme scheme);

// Spatial- and phase-grid construction parameters. The spatial grid is
// derived from the initial measure, the potential and hbar unless both
// overrides are set.
struct GridParams {
  std::optional<double> half_width;  // spatial override (else auto rule)
  std::optional<int> n_points;       // spatial override (else auto rule)
  double momentum_quantile = 0.9999;  // |p| quantile feeding the dx rule
  double phase_spacing_factor = 0.6;  // transform spacing = factor*sqrt(hbar)
  int phase_rebin = 3;                // coarsening factor before extraction
  double extent_sigmas = 7.0;         // phase extents: center +- sigmas*width
  double measure_threshold = 1e-6;    // density_to_measure relative cut
  double max_discarded_mass = 1e-4;   // loudest acceptable truncation
};

struct ReferenceParams {
  int dt_ref_divisor = 64;        // dt_ref = min(dt_list) / divisor
  bool richardson_check = false;  // re-run at dt_ref/2 and compare (costly)
  double richardson_tol = 1e-8;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::classical_convergence;
  Potential potential;
  InitialMeasure mu_in;
  double t_final = 1.0;
  std::vector<double> dt_list;    // each in (0, 1/2], no duplicates
  std::vector<double> hbar_list;  // positive; singleton for quantum_fixed_hbar
  Scheme scheme = Scheme::lie_trotter;
  int n_particles = 4096;  // classical cloud size
  int n_states = 64;       // coherent-state ensemble size
  int lp_subsample = 2000;  // paired prefix size for exact classical LP
  GridParams grid;
  OtConfig ot;
  ReferenceParams reference;
  std::uint64_t seed = 0;
  int jobs = 1;  // worker threads; never serialized (results independent)

  void validate() const;  // throws ConfigError
};

// Strict JSON parsing (unknown keys rejected) and the canonical echo used in
// reports. parse(config_to_json(c)) reproduces c.
ExperimentConfig parse_config_json(const std::string& json_text);
ExperimentConfig parse_config_file(const std::string& path);
std::string config_to_json(const ExperimentConfig& cfg);

// One measured error, with the theoretical envelope it was checked against.
struct ErrorRecord {
  Scheme scheme = Scheme::lie_trotter;
  Metric metric = Metric::w2_classical;
  double dt = 0.0;
  std::optional<double> hbar;  // absent for classical rows
  int n_steps = 0;
  double value = 0.0;
  std::optional<double> mc_stderr;     // ensemble sampling spread (jackknife)
  std::optional<double> bound_value;   // theoretical envelope when eligible
  std::optional<bool> bound_satisfied; // accompanies bound_value
};

// Least-squares power-law fit of log(y) against log(x).
struct RateFit {
  std::string metric;  // metric name, possibly with a qualifier suffix
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  int points_used = 0;
};

// Everything a run produces; emit_report serializes it.
struct ExperimentResult {
  ExperimentConfig config;
  BoundReport bounds;
  std::vector<ErrorRecord> records;
  std::vector<RateFit> fits;
  std::vector<std::string> notes;  // degenerate fits, excluded zeros, ...
  bool all_bounds_satisfied = true;
  // quantum_fixed_hbar: L2 error nondecreasing in dt (5% slack).
  std::optional<bool> l2_monotone_in_dt;
  // uniform_sweep: max-over-hbar dist1 nonincreasing as dt shrinks (5% slack).
  std::optional<bool> max_error_decreasing;
  std::vector<std::pair<double, double>> max_over_hbar;  // (dt, max dist1)
  // classical: (dt, identity-coupling upper bound) on the full clouds.
  std::vector<std::pair<double, double>> identity_upper_bounds;
  double max_discarded_mass = 0.0;  // worst density_to_measure truncation
};

// Evolves one particle cloud per dt by the scheme and by the exact flow,
// measures exact-LP W2 on a paired prefix subsample, fits the rate, and
// checks each error against the first-/second-order classical envelope.
ExperimentResult run_classical_convergence(const ExperimentConfig& cfg);

// Propagates a coherent-state ensemble at one hbar for every dt, measures the
// worst-member phase-aligned L2 error against the fine-step reference, fits
// the rate, and checks the first-order rows against the commutator envelope.
ExperimentResult run_quantum_fixed_hbar(const ExperimentConfig& cfg);

// Full (dt, hbar) grid: Husimi densities of split and reference ensembles,
// truncated and quadratic Wasserstein distances, hbar-independent and
// semiclassical envelopes, and the max-over-hbar trend summary.
ExperimentResult run_uniform_sweep(const ExperimentConfig& cfg);

// Dispatch on cfg.kind.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// Power-law fit of y_field against x_field over the records. Zero values are
// excluded (points_used reports the survivors). Throws DegenerateFit when
// fewer than 3 points survive or the surviving values span < one decade.
RateFit fit_rate(const std::vector<ErrorRecord>& records,
                 const std::string& x_field, const std::string& y_field);

// Writes <out_dir>/records.csv and <out_dir>/report.json. Byte-identical for
// identical config+seed regardless of worker count.
void emit_report(const ExperimentResult& result, const std::string& out_dir);

// Pretty JSON rendering of a constant report (the "bounds" block of
// report.json), for the constants CLI subcommand.
std::string bound_report_json(const BoundReport& report);

// The spatial grid the auto rule selects for (cfg, hbar): the domain is the
// smallest admissible half-width (a multiple of the potential's half-period
// when V is periodic) containing the initial positions plus the ballistic
// excursion and a Gaussian-tail margin; n_points is the smallest power of two
// with dx <= min(sqrt(hbar)/4, hbar/(2 p_max)).
SpatialGrid auto_spatial_grid(const ExperimentConfig& cfg, double hbar);

// floor(t_final/dt) with a relative guard so exact multiples stay exact.
int steps_for(double t_final, double dt);

}  // namespace semisplit
