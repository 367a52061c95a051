#include "semisplit/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "semisplit/errors.hpp"
#include "semisplit/phasespace.hpp"
#include "semisplit/util.hpp"
#include "semisplit/version.hpp"

namespace semisplit {

using ordered_json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Names
// ---------------------------------------------------------------------------

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::classical_convergence: return "classical_convergence";
    case ExperimentKind::quantum_fixed_hbar: return "quantum_fixed_hbar";
    case ExperimentKind::uniform_sweep: return "uniform_sweep";
  }
  throw ConfigError("unknown experiment kind");
}

std::string to_string(Metric metric) {
  switch (metric) {
    case Metric::w2_classical: return "w2_classical";
    case Metric::l2_quantum: return "l2_quantum";
    case Metric::w2_husimi: return "w2_husimi";
    case Metric::dist1_husimi: return "dist1_husimi";
  }
  throw ConfigError("unknown metric");
}

std::string to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::lie_trotter: return "lie_trotter";
    case Scheme::strang: return "strang";
    case Scheme::reference: return "reference";
  }
  throw ConfigError("unknown scheme");
}

namespace {

ExperimentKind kind_from_string(const std::string& s) {
  if (s == "classical_convergence") return ExperimentKind::classical_convergence;
  if (s == "quantum_fixed_hbar") return ExperimentKind::quantum_fixed_hbar;
  if (s == "uniform_sweep") return ExperimentKind::uniform_sweep;
  throw ConfigError("unknown experiment kind: " + s);
}

Scheme scheme_from_string(const std::string& s) {
  if (s == "lie_trotter") return Scheme::lie_trotter;
  if (s == "strang") return Scheme::strang;
  throw ConfigError("scheme must be lie_trotter or strang, got: " + s);
}

// ---------------------------------------------------------------------------
// Config parsing / serialization
// ---------------------------------------------------------------------------

void expect_keys(const ordered_json& obj, const std::set<std::string>& allowed,
                 const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& item : obj.items()) {
    if (!allowed.count(item.key()))
      throw ConfigError(where + ": unknown key \"" + item.key() + "\"");
  }
}

const ordered_json& require_key(const ordered_json& obj, const std::string& key,
                                const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError(where + ": missing key \"" + key + "\"");
  return *it;
}

double as_number(const ordered_json& j, const std::string& where) {
  if (!j.is_number()) throw ConfigError(where + " must be a number");
  return j.get<double>();
}

int as_int(const ordered_json& j, const std::string& where) {
  if (!j.is_number_integer()) throw ConfigError(where + " must be an integer");
  return j.get<int>();
}

std::string as_string(const ordered_json& j, const std::string& where) {
  if (!j.is_string()) throw ConfigError(where + " must be a string");
  return j.get<std::string>();
}

Eigen::VectorXd as_vector(const ordered_json& j, const std::string& where) {
  if (!j.is_array() || j.empty())
    throw ConfigError(where + " must be a nonempty array of numbers");
  Eigen::VectorXd v(static_cast<int>(j.size()));
  for (int i = 0; i < v.size(); ++i) v[i] = as_number(j[i], where + " entry");
  return v;
}

std::vector<double> as_double_list(const ordered_json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where + " must be an array of numbers");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& e : j) out.push_back(as_number(e, where + " entry"));
  return out;
}

Potential parse_potential(const ordered_json& j) {
  expect_keys(j, {"kind", "dim", "omega", "amplitude"}, "potential");
  const std::string kind = as_string(require_key(j, "kind", "potential"), "potential.kind");
  const int dim = j.contains("dim") ? as_int(j["dim"], "potential.dim") : 1;
  if (kind == "zero") {
    if (j.contains("omega") || j.contains("amplitude"))
      throw ConfigError("potential: zero takes no parameters");
    return make_zero_potential(dim);
  }
  if (kind == "harmonic") {
    if (j.contains("amplitude"))
      throw ConfigError("potential: harmonic takes omega, not amplitude");
    return make_harmonic_potential(
        as_number(require_key(j, "omega", "potential"), "potential.omega"), dim);
  }
  if (kind == "pendulum") {
    if (j.contains("omega"))
      throw ConfigError("potential: pendulum takes amplitude, not omega");
    return make_pendulum_potential(
        as_number(require_key(j, "amplitude", "potential"), "potential.amplitude"), dim);
  }
  throw ConfigError("potential.kind must be zero, harmonic or pendulum, got: " + kind);
}

InitialMeasure::Component parse_measure_component(const ordered_json& j,
                                                  const std::string& where) {
  expect_keys(j, {"kind", "q0", "p0", "sigma_q", "sigma_p", "weight"}, where);
  InitialMeasure::Component c;
  const std::string kind = as_string(require_key(j, "kind", where), where + ".kind");
  c.q0 = as_vector(require_key(j, "q0", where), where + ".q0");
  c.p0 = as_vector(require_key(j, "p0", where), where + ".p0");
  if (kind == "dirac") {
    c.kind = InitialMeasure::Kind::dirac;
    if (j.contains("sigma_q") || j.contains("sigma_p"))
      throw ConfigError(where + ": dirac takes no sigmas");
    c.sigma_q = Eigen::VectorXd::Zero(c.q0.size());
    c.sigma_p = Eigen::VectorXd::Zero(c.p0.size());
  } else if (kind == "gaussian") {
    c.kind = InitialMeasure::Kind::gaussian;
    c.sigma_q = as_vector(require_key(j, "sigma_q", where), where + ".sigma_q");
    c.sigma_p = as_vector(require_key(j, "sigma_p", where), where + ".sigma_p");
  } else {
    throw ConfigError(where + ".kind must be dirac or gaussian, got: " + kind);
  }
  if (j.contains("weight")) c.weight = as_number(j["weight"], where + ".weight");
  return c;
}

InitialMeasure parse_measure(const ordered_json& j) {
  if (!j.is_object()) throw ConfigError("initial_measure must be a JSON object");
  const std::string kind =
      as_string(require_key(j, "kind", "initial_measure"), "initial_measure.kind");
  if (kind == "mixture") {
    expect_keys(j, {"kind", "components"}, "initial_measure");
    const auto& comps = require_key(j, "components", "initial_measure");
    if (!comps.is_array() || comps.empty())
      throw ConfigError("initial_measure.components must be a nonempty array");
    std::vector<InitialMeasure::Component> cs;
    for (std::size_t i = 0; i < comps.size(); ++i)
      cs.push_back(parse_measure_component(
          comps[i], "initial_measure.components[" + std::to_string(i) + "]"));
    return InitialMeasure::mixture(cs);
  }
  auto c = parse_measure_component(j, "initial_measure");
  if (c.weight != 1.0)
    throw ConfigError("initial_measure: weight only applies inside a mixture");
  if (c.kind == InitialMeasure::Kind::dirac) return InitialMeasure::dirac(c.q0, c.p0);
  return InitialMeasure::gaussian(c.q0, c.p0, c.sigma_q, c.sigma_p);
}

ordered_json potential_to_json(const Potential& v) {
  ordered_json j;
  switch (v.kind) {
    case Potential::Kind::zero:
      j["kind"] = "zero";
      break;
    case Potential::Kind::harmonic:
      j["kind"] = "harmonic";
      j["omega"] = v.param;
      break;
    case Potential::Kind::pendulum:
      j["kind"] = "pendulum";
      j["amplitude"] = v.param;
      break;
    case Potential::Kind::custom:
      throw ConfigError("custom potentials have no config representation");
  }
  j["dim"] = v.dim;
  return j;
}

ordered_json component_to_json(const InitialMeasure::Component& c, bool in_mixture) {
  ordered_json j;
  j["kind"] = c.kind == InitialMeasure::Kind::dirac ? "dirac" : "gaussian";
  j["q0"] = std::vector<double>(c.q0.begin(), c.q0.end());
  j["p0"] = std::vector<double>(c.p0.begin(), c.p0.end());
  if (c.kind == InitialMeasure::Kind::gaussian) {
    j["sigma_q"] = std::vector<double>(c.sigma_q.begin(), c.sigma_q.end());
    j["sigma_p"] = std::vector<double>(c.sigma_p.begin(), c.sigma_p.end());
  }
  if (in_mixture) j["weight"] = c.weight;
  return j;
}

ordered_json measure_to_json(const InitialMeasure& mu) {
  if (mu.components.size() == 1) return component_to_json(mu.components[0], false);
  ordered_json j;
  j["kind"] = "mixture";
  j["components"] = ordered_json::array();
  for (const auto& c : mu.components) j["components"].push_back(component_to_json(c, true));
  return j;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (potential.kind == Potential::Kind::custom)
    throw ConfigError("experiments require a built-in potential");
  mu_in.validate();
  if (potential.dim != mu_in.dim)
    throw ConfigError("potential and initial measure dimensions differ");
  if (!(t_final > 0.0)) throw ConfigError("t_final must be positive");
  if (dt_list.empty()) throw ConfigError("dt_list must be nonempty");
  for (double dt : dt_list) {
    if (!(dt > 0.0) || dt > 0.5)
      throw ConfigError("every dt must lie in (0, 1/2], got " + format_double(dt));
    if (dt > t_final) throw ConfigError("dt exceeds t_final");
  }
  std::vector<double> sorted = dt_list;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw ConfigError("dt_list has duplicates");
  const bool quantum = kind != ExperimentKind::classical_convergence;
  if (quantum) {
    if (hbar_list.empty()) throw ConfigError("hbar_list must be nonempty");
    for (double h : hbar_list) {
      if (!(h > 0.0)) throw ConfigError("every hbar must be positive");
    }
    std::vector<double> hs = hbar_list;
    std::sort(hs.begin(), hs.end());
    if (std::adjacent_find(hs.begin(), hs.end()) != hs.end())
      throw ConfigError("hbar_list has duplicates");
    if (kind == ExperimentKind::quantum_fixed_hbar && hbar_list.size() != 1)
      throw ConfigError("quantum_fixed_hbar takes exactly one hbar");
    if (mu_in.dim != 1)
      throw ConfigError("quantum experiments support dimension 1 only");
  }
  if (scheme == Scheme::reference)
    throw ConfigError("scheme must be lie_trotter or strang");
  if (n_particles < 1) throw ConfigError("n_particles must be >= 1");
  if (n_states < 1) throw ConfigError("n_states must be >= 1");
  if (lp_subsample < 1) throw ConfigError("lp_subsample must be >= 1");
  if (grid.half_width.has_value() != grid.n_points.has_value())
    throw ConfigError("grid overrides need both half_width and n_points");
  if (grid.half_width && !(*grid.half_width > 0.0))
    throw ConfigError("grid.half_width must be positive");
  if (grid.n_points && (*grid.n_points < 16 || (*grid.n_points & (*grid.n_points - 1))))
    throw ConfigError("grid.n_points must be a power of two >= 16");
  if (!(grid.momentum_quantile > 0.5) || !(grid.momentum_quantile < 1.0))
    throw ConfigError("grid.momentum_quantile must lie in (0.5, 1)");
  if (!(grid.phase_spacing_factor > 0.0))
    throw ConfigError("grid.phase_spacing_factor must be positive");
  if (grid.phase_rebin < 1) throw ConfigError("grid.phase_rebin must be >= 1");
  if (!(grid.extent_sigmas >= 3.0))
    throw ConfigError("grid.extent_sigmas must be >= 3");
  if (!(grid.measure_threshold > 0.0) || grid.measure_threshold >= 1.0)
    throw ConfigError("grid.measure_threshold must lie in (0, 1)");
  if (!(grid.max_discarded_mass > 0.0))
    throw ConfigError("grid.max_discarded_mass must be positive");
  if (ot.exact_cap < 1) throw ConfigError("ot.exact_cap must be >= 1");
  if (!(ot.tol > 0.0)) throw ConfigError("ot.entropic_tol must be positive");
  if (reference.dt_ref_divisor < 64)
    throw ConfigError("reference.dt_ref_divisor must be >= 64");
  if (!(reference.richardson_tol > 0.0))
    throw ConfigError("reference.richardson_tol must be positive");
  if (jobs < 1) throw ConfigError("jobs must be >= 1");
}

ExperimentConfig parse_config_json(const std::string& json_text) {
  ordered_json j;
  try {
    j = ordered_json::parse(json_text);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  expect_keys(j,
              {"experiment", "potential", "initial_measure", "t_final", "dt_list",
               "hbar_list", "scheme", "n_particles", "n_states", "lp_subsample",
               "grid", "ot", "reference", "seed"},
              "config");
  ExperimentConfig cfg;
  cfg.kind = kind_from_string(
      as_string(require_key(j, "experiment", "config"), "experiment"));
  cfg.potential = parse_potential(require_key(j, "potential", "config"));
  cfg.mu_in = parse_measure(require_key(j, "initial_measure", "config"));
  cfg.t_final = as_number(require_key(j, "t_final", "config"), "t_final");
  cfg.dt_list = as_double_list(require_key(j, "dt_list", "config"), "dt_list");
  if (j.contains("hbar_list"))
    cfg.hbar_list = as_double_list(j["hbar_list"], "hbar_list");
  cfg.scheme = scheme_from_string(
      as_string(require_key(j, "scheme", "config"), "scheme"));
  if (j.contains("n_particles")) cfg.n_particles = as_int(j["n_particles"], "n_particles");
  if (j.contains("n_states")) cfg.n_states = as_int(j["n_states"], "n_states");
  if (j.contains("lp_subsample")) cfg.lp_subsample = as_int(j["lp_subsample"], "lp_subsample");
  if (j.contains("grid")) {
    const auto& g = j["grid"];
    expect_keys(g,
                {"half_width", "n_points", "momentum_quantile", "phase_spacing_factor",
                 "phase_rebin", "extent_sigmas", "measure_threshold",
                 "max_discarded_mass"},
                "grid");
    if (g.contains("half_width"))
      cfg.grid.half_width = as_number(g["half_width"], "grid.half_width");
    if (g.contains("n_points")) cfg.grid.n_points = as_int(g["n_points"], "grid.n_points");
    if (g.contains("momentum_quantile"))
      cfg.grid.momentum_quantile = as_number(g["momentum_quantile"], "grid.momentum_quantile");
    if (g.contains("phase_spacing_factor"))
      cfg.grid.phase_spacing_factor =
          as_number(g["phase_spacing_factor"], "grid.phase_spacing_factor");
    if (g.contains("phase_rebin")) cfg.grid.phase_rebin = as_int(g["phase_rebin"], "grid.phase_rebin");
    if (g.contains("extent_sigmas"))
      cfg.grid.extent_sigmas = as_number(g["extent_sigmas"], "grid.extent_sigmas");
    if (g.contains("measure_threshold"))
      cfg.grid.measure_threshold = as_number(g["measure_threshold"], "grid.measure_threshold");
    if (g.contains("max_discarded_mass"))
      cfg.grid.max_discarded_mass =
          as_number(g["max_discarded_mass"], "grid.max_discarded_mass");
  }
  if (j.contains("ot")) {
    const auto& o = j["ot"];
    expect_keys(o, {"exact_cap", "entropic_tol", "max_pivots", "max_sinkhorn_iters"}, "ot");
    if (o.contains("exact_cap")) cfg.ot.exact_cap = as_int(o["exact_cap"], "ot.exact_cap");
    if (o.contains("entropic_tol")) cfg.ot.tol = as_number(o["entropic_tol"], "ot.entropic_tol");
    if (o.contains("max_pivots"))
      cfg.ot.max_pivots = static_cast<long long>(as_number(o["max_pivots"], "ot.max_pivots"));
    if (o.contains("max_sinkhorn_iters"))
      cfg.ot.max_sinkhorn_iters = as_int(o["max_sinkhorn_iters"], "ot.max_sinkhorn_iters");
  }
  if (j.contains("reference")) {
    const auto& r = j["reference"];
    expect_keys(r, {"dt_ref_divisor", "richardson_check", "richardson_tol"}, "reference");
    if (r.contains("dt_ref_divisor"))
      cfg.reference.dt_ref_divisor = as_int(r["dt_ref_divisor"], "reference.dt_ref_divisor");
    if (r.contains("richardson_check")) {
      if (!r["richardson_check"].is_boolean())
        throw ConfigError("reference.richardson_check must be a boolean");
      cfg.reference.richardson_check = r["richardson_check"].get<bool>();
    }
    if (r.contains("richardson_tol"))
      cfg.reference.richardson_tol = as_number(r["richardson_tol"], "reference.richardson_tol");
  }
  const auto& seed_json = require_key(j, "seed", "config");
  if (!seed_json.is_number_integer() || seed_json.get<long long>() < 0)
    throw ConfigError("seed must be a nonnegative integer");
  cfg.seed = seed_json.get<std::uint64_t>();
  cfg.validate();
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_config_json(ss.str());
}

std::string config_to_json(const ExperimentConfig& cfg) {
  ordered_json j;
  j["experiment"] = to_string(cfg.kind);
  j["potential"] = potential_to_json(cfg.potential);
  j["initial_measure"] = measure_to_json(cfg.mu_in);
  j["t_final"] = cfg.t_final;
  j["dt_list"] = cfg.dt_list;
  j["hbar_list"] = cfg.hbar_list;
  j["scheme"] = to_string(cfg.scheme);
  j["n_particles"] = cfg.n_particles;
  j["n_states"] = cfg.n_states;
  j["lp_subsample"] = cfg.lp_subsample;
  ordered_json g;
  if (cfg.grid.half_width) g["half_width"] = *cfg.grid.half_width;
  if (cfg.grid.n_points) g["n_points"] = *cfg.grid.n_points;
  g["momentum_quantile"] = cfg.grid.momentum_quantile;
  g["phase_spacing_factor"] = cfg.grid.phase_spacing_factor;
  g["phase_rebin"] = cfg.grid.phase_rebin;
  g["extent_sigmas"] = cfg.grid.extent_sigmas;
  g["measure_threshold"] = cfg.grid.measure_threshold;
  g["max_discarded_mass"] = cfg.grid.max_discarded_mass;
  j["grid"] = g;
  ordered_json o;
  o["exact_cap"] = cfg.ot.exact_cap;
  o["entropic_tol"] = cfg.ot.tol;
  o["max_pivots"] = cfg.ot.max_pivots;
  o["max_sinkhorn_iters"] = cfg.ot.max_sinkhorn_iters;
  j["ot"] = o;
  ordered_json r;
  r["dt_ref_divisor"] = cfg.reference.dt_ref_divisor;
  r["richardson_check"] = cfg.reference.richardson_check;
  r["richardson_tol"] = cfg.reference.richardson_tol;
  j["reference"] = r;
  j["seed"] = cfg.seed;
  return j.dump(2);
}

// ---------------------------------------------------------------------------
// Grids and small numerics
// ---------------------------------------------------------------------------

int steps_for(double t_final, double dt) {
  return static_cast<int>(std::floor(t_final / dt + 1e-9));
}

SpatialGrid auto_spatial_grid(const ExperimentConfig& cfg, double hbar) {
  if (!(hbar > 0.0)) throw ConfigError("auto_spatial_grid: hbar must be positive");
  SpatialGrid grid;
  grid.dim = 1;
  if (cfg.grid.half_width && cfg.grid.n_points) {
    grid.half_width = *cfg.grid.half_width;
    grid.n_points = *cfg.grid.n_points;
    grid.validate();
    return grid;
  }
  const Potential& v = cfg.potential;
  if (!std::isfinite(v.sup_grad))
    throw ConfigError(
        "auto_spatial_grid needs a bounded force; set grid.half_width and "
        "grid.n_points explicitly");
  // Momentum reach: high quantile of |p| under mu_in plus the largest force
  // impulse accumulated over [0, T].
  const double p_q = cfg.mu_in.abs_momentum_quantile(cfg.grid.momentum_quantile);
  const double p_max = p_q + cfg.t_final * v.sup_grad;
  // Position reach: component centers plus a 1e-6-quantile Gaussian spread,
  // then the ballistic excursion p_max * T.
  double q_reach = 0.0;
  const double zq = normal_quantile(1.0 - 1e-6);
  for (const auto& c : cfg.mu_in.components) {
    for (int a = 0; a < c.q0.size(); ++a) {
      const double sigma = c.kind == InitialMeasure::Kind::gaussian ? c.sigma_q[a] : 0.0;
      q_reach = std::max(q_reach, std::abs(c.q0[a]) + zq * sigma);
    }
  }
  // Boundary margin keeping state mass within 1e-12: the coherent width
  // sqrt(hbar/2) at 7 sigма stretched by the Gronwall growth e^{Lambda T},
  // never below the 8 sqrt(hbar) construction margin of coherent_state.
  const double lam = lambda_constant(v);
  const double margin = std::max(8.0 * std::sqrt(hbar),
                                 7.0 * std::sqrt(0.5 * hbar) * std::exp(lam * cfg.t_final));
  const double l_needed = q_reach + p_max * cfg.t_final + margin;
  // Half-width on a multiple of pi: commensurate with the pendulum period so
  // the potential stays smooth across the periodic boundary.
  const double pi = std::numbers::pi;
  grid.half_width = pi * std::ceil(l_needed / pi - 1e-12);
  const double dx_max = std::min(std::sqrt(hbar) / 4.0, hbar / (2.0 * p_max));
  const double n_needed = 2.0 * grid.half_width / dx_max;
  if (!(n_needed < 4.0e6))
    throw ConfigError("auto_spatial_grid: required resolution exceeds 2^22 points");
  int n = 64;
  while (n < n_needed) n *= 2;
  grid.n_points = n;
  grid.validate();
  return grid;
}

namespace {

// Standard error of sqrt(mean of dsq) by leave-one-out jackknife.
std::optional<double> jackknife_rms_stderr(const std::vector<double>& dsq) {
  const int n = static_cast<int>(dsq.size());
  if (n < 2) return std::nullopt;
  double total = 0.0;
  for (double d : dsq) total += d;
  std::vector<double> loo(n);
  for (int i = 0; i < n; ++i)
    loo[i] = std::sqrt(std::max(0.0, (total - dsq[i]) / (n - 1)));
  double mean = 0.0;
  for (double l : loo) mean += l;
  mean /= n;
  double var = 0.0;
  for (double l : loo) var += (l - mean) * (l - mean);
  var *= static_cast<double>(n - 1) / n;
  return std::sqrt(var);
}

// Contiguous member blocks across `jobs` threads; fn(begin, end) per block.
// Worker-local resources (FFT plans) live inside fn; results are indexed by
// member, so the partition never affects output.
void for_member_blocks(int n, int jobs, const std::function<void(int, int)>& fn) {
  const int workers = std::max(1, std::min(jobs, n));
  if (workers == 1) {
    fn(0, n);
    return;
  }
  std::vector<std::thread> threads;
  std::vector<std::exception_ptr> errors(workers);
  threads.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    const int b = static_cast<int>(static_cast<long long>(n) * w / workers);
    const int e = static_cast<int>(static_cast<long long>(n) * (w + 1) / workers);
    threads.emplace_back([&fn, &errors, b, e, w] {
      try {
        fn(b, e);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& err : errors)
    if (err) std::rethrow_exception(err);
}

bool check_bound(double value, double bound) { return value <= bound; }

}  // namespace

// ---------------------------------------------------------------------------
// Rate fitting
// ---------------------------------------------------------------------------

RateFit fit_rate(const std::vector<ErrorRecord>& records,
                 const std::string& x_field, const std::string& y_field) {
  if (y_field != "value")
    throw ConfigError("fit_rate: unsupported y_field \"" + y_field + "\"");
  if (x_field != "dt" && x_field != "hbar")
    throw ConfigError("fit_rate: unsupported x_field \"" + x_field + "\"");
  if (records.empty()) throw DegenerateFit("fit_rate: no records");
  std::vector<double> xs, ys;
  int excluded = 0;
  for (const auto& r : records) {
    double x = r.dt;
    if (x_field == "hbar") {
      if (!r.hbar) throw ConfigError("fit_rate: record lacks hbar");
      x = *r.hbar;
    }
    if (!(r.value > 0.0)) {
      ++excluded;
      continue;
    }
    xs.push_back(x);
    ys.push_back(r.value);
  }
  if (static_cast<int>(xs.size()) < 3)
    throw DegenerateFit("fit_rate: fewer than 3 positive values (" +
                        std::to_string(excluded) + " zero rows excluded)");
  const auto [ymin, ymax] = std::minmax_element(ys.begin(), ys.end());
  if (*ymax < 10.0 * *ymin)
    throw DegenerateFit("fit_rate: values span less than one decade (" +
                        format_double(*ymin) + " .. " + format_double(*ymax) + ")");
  const int n = static_cast<int>(xs.size());
  double sx = 0.0, sy = 0.0;
  for (int i = 0; i < n; ++i) {
    xs[i] = std::log(xs[i]);
    ys[i] = std::log(ys[i]);
    sx += xs[i];
    sy += ys[i];
  }
  const double xbar = sx / n, ybar = sy / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (int i = 0; i < n; ++i) {
    sxx += (xs[i] - xbar) * (xs[i] - xbar);
    sxy += (xs[i] - xbar) * (ys[i] - ybar);
    syy += (ys[i] - ybar) * (ys[i] - ybar);
  }
  if (!(sxx > 0.0)) throw DegenerateFit("fit_rate: identical abscissae");
  RateFit fit;
  fit.metric = to_string(records.front().metric);
  fit.slope = sxy / sxx;
  fit.intercept = ybar - fit.slope * xbar;
  double ss_res = 0.0;
  for (int i = 0; i < n; ++i) {
    const double pred = fit.intercept + fit.slope * xs[i];
    ss_res += (ys[i] - pred) * (ys[i] - pred);
  }
  fit.r_squared = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
  fit.points_used = n;
  return fit;
}

// ---------------------------------------------------------------------------
// Classical convergence
// ---------------------------------------------------------------------------

ExperimentResult run_classical_convergence(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.kind != ExperimentKind::classical_convergence)
    throw ConfigError("run_classical_convergence: wrong experiment kind");
  ExperimentResult result;
  result.config = cfg;
  std::vector<double> dts = cfg.dt_list;
  std::sort(dts.begin(), dts.end());
  const double dt_max = dts.back();
  result.bounds =
      make_bound_report(cfg.potential, cfg.t_final, dt_max, cfg.mu_in, cfg.mu_in.dim);

  const PhaseEnsemble initial =
      sample_phase_ensemble(cfg.mu_in, cfg.n_particles, cfg.seed);
  const int m = std::min(cfg.lp_subsample, cfg.n_particles);

  for (double dt : dts) {
    const int n_steps = steps_for(cfg.t_final, dt);
    const double t_n = n_steps * dt;
    PhaseEnsemble split =
        evolve_ensemble(initial, cfg.scheme, dt, n_steps, cfg.potential, cfg.jobs);
    PhaseEnsemble ref =
        evolve_ensemble(initial, Scheme::reference, t_n, 1, cfg.potential, cfg.jobs);
    result.identity_upper_bounds.emplace_back(
        dt, coupled_particle_upper_bound(split, ref).distance);

    // Exact LP on the paired low-discrepancy prefix: both clouds keep the
    // same particle indices, so the subsample stays a coupled pair.
    PhaseEnsemble split_head, ref_head;
    split_head.points.assign(split.points.begin(), split.points.begin() + m);
    ref_head.points.assign(ref.points.begin(), ref.points.begin() + m);
    split_head.weights.assign(m, 1.0 / m);
    ref_head.weights.assign(m, 1.0 / m);
    split_head.rng_seed = split.rng_seed;
    ref_head.rng_seed = ref.rng_seed;
    const TransportResult w2 = wasserstein2(ensemble_to_measure(split_head),
                                            ensemble_to_measure(ref_head), cfg.ot);

    std::vector<double> dsq(m);
    for (int i = 0; i < m; ++i) {
      dsq[i] = (split.points[i].x - ref.points[i].x).squaredNorm() +
               (split.points[i].xi - ref.points[i].xi).squaredNorm();
    }

    ErrorRecord rec;
    rec.scheme = cfg.scheme;
    rec.metric = Metric::w2_classical;
    rec.dt = dt;
    rec.n_steps = n_steps;
    rec.value = w2.distance;
    rec.mc_stderr = jackknife_rms_stderr(dsq);
    if (cfg.scheme == Scheme::lie_trotter) {
      rec.bound_value = result.bounds.c_T * dt;
    } else if (result.bounds.d_T) {
      rec.bound_value = *result.bounds.d_T * dt * dt;
    }
    if (rec.bound_value) rec.bound_satisfied = check_bound(rec.value, *rec.bound_value);
    result.records.push_back(rec);
  }

  try {
    result.fits.push_back(fit_rate(result.records, "dt", "value"));
  } catch (const DegenerateFit& e) {
    result.notes.emplace_back(std::string("rate fit skipped: ") + e.what());
  }
  for (const auto& r : result.records)
    if (r.bound_satisfied && !*r.bound_satisfied) result.all_bounds_satisfied = false;
  return result;
}

// ---------------------------------------------------------------------------
// Quantum fixed-hbar convergence
// ---------------------------------------------------------------------------

namespace {

// References at each distinct final time floor(T/dt)*dt, keyed by time.
std::map<double, StateEnsemble> reference_states(const StateEnsemble& initial,
                                                 const std::vector<double>& dts,
                                                 const ExperimentConfig& cfg,
                                                 double dt_ref) {
  std::map<double, StateEnsemble> refs;
  for (double dt : dts) {
    const int n_steps = steps_for(cfg.t_final, dt);
    refs.emplace(n_steps * dt, StateEnsemble{});
  }
  const int n_members = static_cast<int>(initial.members.size());
  for (auto& [t_n, ens] : refs) {
    ens = initial;
    parallel_for(static_cast<std::size_t>(n_members), cfg.jobs, [&](std::size_t i) {
      ens.members[i] =
          reference_propagate_q(initial.members[i], t_n, cfg.potential, dt_ref);
    });
    if (cfg.reference.richardson_check) {
      StateEnsemble half = initial;
      parallel_for(static_cast<std::size_t>(n_members), cfg.jobs, [&](std::size_t i) {
        half.members[i] = reference_propagate_q(initial.members[i], t_n,
                                                cfg.potential, dt_ref / 2.0);
      });
      double worst = 0.0;
      for (int i = 0; i < n_members; ++i)
        worst = std::max(worst,
                         l2_distance_phase_aligned(ens.members[i], half.members[i]));
      if (worst > cfg.reference.richardson_tol)
        throw NonConvergence("reference self-consistency failure: halving the "
                             "reference step moved the state by " +
                             format_double(worst));
    }
  }
  return refs;
}

// Propagates every member of `initial` by `scheme` at (dt, n_steps) sharing
// one split-step engine per worker block.
StateEnsemble propagate_ensemble(const StateEnsemble& initial, Scheme scheme,
                                 double dt, int n_steps, const ExperimentConfig& cfg,
                                 const SpatialGrid& grid, double hbar, double p_max) {
  StateEnsemble out = initial;
  const int n_members = static_cast<int>(initial.members.size());
  for_member_blocks(n_members, cfg.jobs, [&](int begin, int end) {
    SplitStepPropagator prop(grid, cfg.potential, hbar, p_max);
    prop.guards.boundary_band = 4.0 * std::sqrt(hbar);
    for (int i = begin; i < end; ++i) prop.run(out.members[i], scheme, dt, n_steps);
  });
  return out;
}

double resolution_p_max(const ExperimentConfig& cfg) {
  return cfg.mu_in.abs_momentum_quantile(cfg.grid.momentum_quantile) +
         cfg.t_final * (std::isfinite(cfg.potential.sup_grad) ? cfg.potential.sup_grad : 0.0);
}

}  // namespace

ExperimentResult run_quantum_fixed_hbar(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.kind != ExperimentKind::quantum_fixed_hbar)
    throw ConfigError("run_quantum_fixed_hbar: wrong experiment kind");
  ExperimentResult result;
  result.config = cfg;
  const double hbar = cfg.hbar_list.front();
  std::vector<double> dts = cfg.dt_list;
  std::sort(dts.begin(), dts.end());
  const double dt_max = dts.back();
  const double dt_ref = dts.front() / cfg.reference.dt_ref_divisor;
  result.bounds =
      make_bound_report(cfg.potential, cfg.t_final, dt_max, cfg.mu_in, cfg.mu_in.dim);

  const SpatialGrid grid = auto_spatial_grid(cfg, hbar);
  const StateEnsemble initial =
      sample_toeplitz(cfg.mu_in, cfg.n_states, grid, hbar, cfg.seed);
  const double p_max = resolution_p_max(cfg);
  const auto refs = reference_states(initial, dts, cfg, dt_ref);

  for (double dt : dts) {
    const int n_steps = steps_for(cfg.t_final, dt);
    const double t_n = n_steps * dt;
    const StateEnsemble split =
        propagate_ensemble(initial, cfg.scheme, dt, n_steps, cfg, grid, hbar, p_max);
    const StateEnsemble& ref = refs.at(t_n);
    double worst = 0.0;
    for (std::size_t i = 0; i < split.members.size(); ++i)
      worst = std::max(worst,
                       l2_distance_phase_aligned(split.members[i], ref.members[i]));

    ErrorRecord rec;
    rec.scheme = cfg.scheme;
    rec.metric = Metric::l2_quantum;
    rec.dt = dt;
    rec.hbar = hbar;
    rec.n_steps = n_steps;
    rec.value = worst;
    if (cfg.scheme == Scheme::lie_trotter && result.bounds.mv_const) {
      // First-order commutator envelope per member, with the coherent-state
      // weighted Sobolev norm hbar*||q,p>||_{H^1} = sqrt(hbar^2+hbar/2+p^2);
      // the worst member obeys the max of the per-member envelopes.
      const double mv = *result.bounds.mv_const;
      double envelope = 0.0;
      for (const auto& qp : split.sample_points) {
        const double sobolev =
            std::sqrt(hbar * hbar + 0.5 * hbar + qp[1] * qp[1]);
        envelope = std::max(
            envelope, 2.0 * (dt / hbar) * mv * (mv * t_n * t_n + sobolev));
      }
      rec.bound_value = envelope;
      rec.bound_satisfied = check_bound(rec.value, envelope);
    }
    result.records.push_back(rec);
  }

  // Error must grow with the step within 5% slack (sampling/roundoff noise).
  bool monotone = true;
  for (std::size_t k = 0; k + 1 < result.records.size(); ++k)
    if (result.records[k].value > 1.05 * result.records[k + 1].value) monotone = false;
  result.l2_monotone_in_dt = monotone;

  try {
    result.fits.push_back(fit_rate(result.records, "dt", "value"));
  } catch (const DegenerateFit& e) {
    result.notes.emplace_back(std::string("rate fit skipped: ") + e.what());
  }
  for (const auto& r : result.records)
    if (r.bound_satisfied && !*r.bound_satisfied) result.all_bounds_satisfied = false;
  return result;
}

// ---------------------------------------------------------------------------
// Uniform-in-hbar sweep
// ---------------------------------------------------------------------------

namespace {

struct MemberStats {
  double q = 0.0, p = 0.0, sq = 0.0, sp = 0.0;  // means and std widths
};

std::vector<MemberStats> ensemble_stats(const StateEnsemble& ens) {
  std::vector<MemberStats> out(ens.members.size());
  for (std::size_t i = 0; i < ens.members.size(); ++i) {
    const WaveFunction& psi = ens.members[i];
    out[i].q = expected_position(psi);
    out[i].p = expected_momentum(psi);
    out[i].sq = std::sqrt(std::max(0.0, position_variance(psi)));
    out[i].sp = std::sqrt(std::max(0.0, momentum_variance(psi)));
  }
  return out;
}

struct PhaseBox {
  double qlo = std::numeric_limits<double>::infinity();
  double qhi = -std::numeric_limits<double>::infinity();
  double plo = std::numeric_limits<double>::infinity();
  double phi = -std::numeric_limits<double>::infinity();

  // Husimi widths add hbar/2 per axis to the state variances.
  void absorb(const std::vector<MemberStats>& stats, double hbar, double sigmas) {
    for (const auto& s : stats) {
      const double wq = sigmas * std::sqrt(s.sq * s.sq + 0.5 * hbar);
      const double wp = sigmas * std::sqrt(s.sp * s.sp + 0.5 * hbar);
      qlo = std::min(qlo, s.q - wq);
      qhi = std::max(qhi, s.q + wq);
      plo = std::min(plo, s.p - wp);
      phi = std::max(phi, s.p + wp);
    }
  }
};

// Axis count: at least 8 cells per coarse cell block and divisible by the
// rebin factor so measurement cells aggregate exactly.
int axis_count(double lo, double hi, double spacing, int rebin) {
  int n = static_cast<int>(std::ceil((hi - lo) / spacing)) + 1;
  n = std::max(n, 8 * rebin);
  if (n % rebin != 0) n += rebin - n % rebin;
  return n;
}

DiscreteMeasure husimi_measure(const StateEnsemble& ens, const PhaseGrid& grid,
                               const ExperimentConfig& cfg, double* discarded) {
  PhaseDensity fine = husimi_of_ensemble(ens, grid, cfg.jobs);
  PhaseDensity coarse = rebin(fine, cfg.grid.phase_rebin);
  MeasureExtraction extraction =
      density_to_measure(coarse, cfg.grid.measure_threshold);
  *discarded = std::max(*discarded, extraction.discarded_mass);
  return std::move(extraction.measure);
}

}  // namespace

ExperimentResult run_uniform_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.kind != ExperimentKind::uniform_sweep)
    throw ConfigError("run_uniform_sweep: wrong experiment kind");
  ExperimentResult result;
  result.config = cfg;
  std::vector<double> dts = cfg.dt_list;
  std::sort(dts.begin(), dts.end());
  const double dt_max = dts.back();
  const double dt_ref = dts.front() / cfg.reference.dt_ref_divisor;
  BoundReport bounds0 =
      make_bound_report(cfg.potential, cfg.t_final, dt_max, cfg.mu_in, cfg.mu_in.dim);
  if (cfg.scheme == Scheme::lie_trotter && !bounds0.c_uniform)
    throw UnboundedDerivative(
        "uniform sweep needs bounded first and second derivatives");
  if (cfg.scheme == Scheme::strang && !bounds0.d_T)
    throw UnboundedDerivative(
        "uniform sweep with the symmetric scheme needs bounded derivatives "
        "through third order");

  const double p_max = resolution_p_max(cfg);

  struct CellRow {
    double hbar = 0.0, dt = 0.0;
    int n_steps = 0;
    double dist1 = 0.0, w2 = 0.0;
    std::optional<double> mc_stderr;
    double sq_ratio = 0.0;  // hbar * worst L2 / dt^2 (calibration sample)
  };
  std::vector<CellRow> cells;

  for (double hbar : cfg.hbar_list) {
    const SpatialGrid grid = auto_spatial_grid(cfg, hbar);
    const StateEnsemble initial =
        sample_toeplitz(cfg.mu_in, cfg.n_states, grid, hbar, cfg.seed);
    const auto refs = reference_states(initial, dts, cfg, dt_ref);

    std::map<double, std::vector<MemberStats>> ref_stats;
    PhaseBox box;
    for (const auto& [t_n, ens] : refs) {
      ref_stats[t_n] = ensemble_stats(ens);
      box.absorb(ref_stats[t_n], hbar, cfg.grid.extent_sigmas);
    }

    std::vector<StateEnsemble> splits;
    std::vector<std::vector<MemberStats>> split_stats;
    splits.reserve(dts.size());
    for (double dt : dts) {
      const int n_steps = steps_for(cfg.t_final, dt);
      splits.push_back(propagate_ensemble(initial, cfg.scheme, dt, n_steps, cfg,
                                          grid, hbar, p_max));
      split_stats.push_back(ensemble_stats(splits.back()));
      box.absorb(split_stats.back(), hbar, cfg.grid.extent_sigmas);
    }

    // One common phase grid per hbar column: split and reference densities
    // land on the same cells, so discretization bias largely cancels in the
    // transport distances. Position extents stay inside the spatial domain.
    box.qlo = std::max(box.qlo, grid.x(0));
    box.qhi = std::min(box.qhi, grid.x(0) + 2.0 * grid.half_width);
    const double h_fine = cfg.grid.phase_spacing_factor * std::sqrt(hbar);
    PhaseGrid pgrid;
    pgrid.x.offset = box.qlo;
    pgrid.x.spacing = h_fine;
    pgrid.x.count = axis_count(box.qlo, box.qhi, h_fine, cfg.grid.phase_rebin);
    pgrid.xi.offset = box.plo;
    pgrid.xi.spacing = h_fine;
    pgrid.xi.count = axis_count(box.plo, box.phi, h_fine, cfg.grid.phase_rebin);
    pgrid.validate();

    std::map<double, DiscreteMeasure> ref_measures;
    for (const auto& [t_n, ens] : refs)
      ref_measures.emplace(
          t_n, husimi_measure(ens, pgrid, cfg, &result.max_discarded_mass));

    for (std::size_t k = 0; k < dts.size(); ++k) {
      const double dt = dts[k];
      const int n_steps = steps_for(cfg.t_final, dt);
      const double t_n = n_steps * dt;
      const DiscreteMeasure mu_split =
          husimi_measure(splits[k], pgrid, cfg, &result.max_discarded_mass);
      const DiscreteMeasure& mu_ref = ref_measures.at(t_n);

      CellRow cell;
      cell.hbar = hbar;
      cell.dt = dt;
      cell.n_steps = n_steps;
      cell.dist1 = dist1_truncated(mu_split, mu_ref, cfg.ot).distance;
      cell.w2 = wasserstein2(mu_split, mu_ref, cfg.ot).distance;

      double worst_l2 = 0.0;
      for (std::size_t i = 0; i < splits[k].members.size(); ++i)
        worst_l2 = std::max(worst_l2,
                            l2_distance_phase_aligned(splits[k].members[i],
                                                      refs.at(t_n).members[i]));
      cell.sq_ratio = hbar * worst_l2 / (dt * dt);

      const auto& rstats = ref_stats.at(t_n);
      std::vector<double> dsq(splits[k].members.size());
      for (std::size_t i = 0; i < dsq.size(); ++i) {
        const double dq = split_stats[k][i].q - rstats[i].q;
        const double dp = split_stats[k][i].p - rstats[i].p;
        dsq[i] = dq * dq + dp * dp;
      }
      cell.mc_stderr = jackknife_rms_stderr(dsq);
      cells.push_back(cell);
    }
  }

  // The symmetric-scheme quantum constant is calibrated from the sweep's own
  // worst-member L2 errors (smallest constant covering every cell, doubled),
  // and reported as calibrated rather than theoretical.
  std::optional<double> m_prime;
  if (cfg.scheme == Scheme::strang) {
    double worst_ratio = 0.0;
    for (const auto& c : cells) worst_ratio = std::max(worst_ratio, c.sq_ratio);
    m_prime = 2.0 * worst_ratio;
  }
  result.bounds = make_bound_report(cfg.potential, cfg.t_final, dt_max, cfg.mu_in,
                                    cfg.mu_in.dim, m_prime, m_prime.has_value());

  for (const auto& c : cells) {
    ErrorRecord d1;
    d1.scheme = cfg.scheme;
    d1.metric = Metric::dist1_husimi;
    d1.dt = c.dt;
    d1.hbar = c.hbar;
    d1.n_steps = c.n_steps;
    d1.value = c.dist1;
    d1.mc_stderr = c.mc_stderr;
    if (cfg.scheme == Scheme::lie_trotter) {
      d1.bound_value = 2.0 * *result.bounds.c_uniform * std::cbrt(c.dt);
    } else {
      d1.bound_value = 2.0 * *result.bounds.d_uniform * std::cbrt(c.dt * c.dt);
    }
    d1.bound_satisfied = check_bound(d1.value, *d1.bound_value);
    result.records.push_back(d1);

    ErrorRecord w2;
    w2.scheme = cfg.scheme;
    w2.metric = Metric::w2_husimi;
    w2.dt = c.dt;
    w2.hbar = c.hbar;
    w2.n_steps = c.n_steps;
    w2.value = c.w2;
    w2.mc_stderr = c.mc_stderr;
    if (cfg.scheme == Scheme::lie_trotter) {
      w2.bound_value = semiclassical_bound_simple(c.dt, c.hbar, result.bounds.c_T,
                                                  cfg.potential, cfg.t_final,
                                                  cfg.mu_in.dim);
    } else {
      w2.bound_value = semiclassical_bound_strang(c.dt, c.hbar, *result.bounds.d_T,
                                                  cfg.potential, cfg.t_final,
                                                  cfg.mu_in.dim);
    }
    w2.bound_satisfied = check_bound(w2.value, *w2.bound_value);
    result.records.push_back(w2);
  }

  // Max-over-hbar trend: the uniform estimates say the worst error over all
  // hbar still shrinks with dt.
  for (double dt : dts) {
    double worst = 0.0;
    for (const auto& c : cells)
      if (c.dt == dt) worst = std::max(worst, c.dist1);
    result.max_over_hbar.emplace_back(dt, worst);
  }
  bool decreasing = true;
  for (std::size_t k = 0; k + 1 < result.max_over_hbar.size(); ++k)
    if (result.max_over_hbar[k].second > 1.05 * result.max_over_hbar[k + 1].second)
      decreasing = false;
  result.max_error_decreasing = decreasing;

  std::vector<ErrorRecord> max_records;
  for (const auto& [dt, v] : result.max_over_hbar) {
    ErrorRecord r;
    r.scheme = cfg.scheme;
    r.metric = Metric::dist1_husimi;
    r.dt = dt;
    r.value = v;
    max_records.push_back(r);
  }
  try {
    RateFit fit = fit_rate(max_records, "dt", "value");
    fit.metric = "dist1_husimi_max_over_hbar";
    result.fits.push_back(fit);
  } catch (const DegenerateFit& e) {
    result.notes.emplace_back(std::string("max-over-hbar rate fit skipped: ") + e.what());
  }
  if (result.max_discarded_mass > cfg.grid.max_discarded_mass)
    result.notes.emplace_back("measure extraction discarded " +
                              format_double(result.max_discarded_mass) +
                              " mass, above the configured ceiling " +
                              format_double(cfg.grid.max_discarded_mass));
  for (const auto& r : result.records)
    if (r.bound_satisfied && !*r.bound_satisfied) result.all_bounds_satisfied = false;
  return result;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  switch (cfg.kind) {
    case ExperimentKind::classical_convergence: return run_classical_convergence(cfg);
    case ExperimentKind::quantum_fixed_hbar: return run_quantum_fixed_hbar(cfg);
    case ExperimentKind::uniform_sweep: return run_uniform_sweep(cfg);
  }
  throw ConfigError("unknown experiment kind");
}

// ---------------------------------------------------------------------------
// Report emission
// ---------------------------------------------------------------------------

namespace {

ordered_json bound_report_to_json(const BoundReport& b) {
  ordered_json j;
  j["lambda"] = b.lambda;
  j["e_const"] = b.e_const;
  j["m_const"] = b.m_const ? ordered_json(*b.m_const) : ordered_json(nullptr);
  j["mv_const"] = b.mv_const ? ordered_json(*b.mv_const) : ordered_json(nullptr);
  j["mu0"] = b.mu0;
  j["nu0"] = b.nu0;
  j["c_T"] = b.c_T;
  j["d_T"] = b.d_T ? ordered_json(*b.d_T) : ordered_json(nullptr);
  j["c_uniform"] = b.c_uniform ? ordered_json(*b.c_uniform) : ordered_json(nullptr);
  j["d_uniform"] = b.d_uniform ? ordered_json(*b.d_uniform) : ordered_json(nullptr);
  j["m_prime"] = b.m_prime ? ordered_json(*b.m_prime) : ordered_json(nullptr);
  j["m_prime_calibrated"] = b.m_prime_calibrated;
  ordered_json e;
  e["theorem_simple"] = b.theorem_simple_ok;
  e["theorem_strang"] = b.theorem_strang_ok;
  e["corollary_simple"] = b.corollary_simple_ok;
  e["corollary_strang"] = b.corollary_strang_ok;
  j["eligibility"] = e;
  return j;
}

std::string csv_cell(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

}  // namespace

std::string bound_report_json(const BoundReport& report) {
  return bound_report_to_json(report).dump(2);
}

void emit_report(const ExperimentResult& result, const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory " + out_dir + ": " + ec.message());

  const fs::path csv_path = fs::path(out_dir) / "records.csv";
  std::ofstream csv(csv_path, std::ios::binary);
  if (!csv) throw IoError("cannot open " + csv_path.string());
  csv << "scheme,metric,dt,hbar,n_steps,value,mc_stderr,bound_value,bound_satisfied\n";
  for (const auto& r : result.records) {
    csv << to_string(r.scheme) << ',' << to_string(r.metric) << ','
        << format_double(r.dt) << ',' << csv_cell(r.hbar) << ',' << r.n_steps << ','
        << format_double(r.value) << ',' << csv_cell(r.mc_stderr) << ','
        << csv_cell(r.bound_value) << ',';
    if (r.bound_satisfied) csv << (*r.bound_satisfied ? "true" : "false");
    csv << '\n';
  }
  csv.flush();
  if (!csv) throw IoError("failed writing " + csv_path.string());

  ordered_json j;
  j["config"] = ordered_json::parse(config_to_json(result.config));
  j["bounds"] = bound_report_to_json(result.bounds);
  j["fits"] = ordered_json::array();
  for (const auto& f : result.fits) {
    ordered_json fj;
    fj["metric"] = f.metric;
    fj["slope"] = f.slope;
    fj["intercept"] = f.intercept;
    fj["r_squared"] = f.r_squared;
    fj["points_used"] = f.points_used;
    j["fits"].push_back(fj);
  }
  ordered_json s;
  s["all_bounds_satisfied"] = result.all_bounds_satisfied;
  if (result.l2_monotone_in_dt) s["l2_monotone_in_dt"] = *result.l2_monotone_in_dt;
  if (result.max_error_decreasing)
    s["max_error_decreasing"] = *result.max_error_decreasing;
  if (!result.max_over_hbar.empty()) {
    ordered_json arr = ordered_json::array();
    for (const auto& [dt, v] : result.max_over_hbar) arr.push_back({dt, v});
    s["max_over_hbar"] = arr;
  }
  if (!result.identity_upper_bounds.empty()) {
    ordered_json arr = ordered_json::array();
    for (const auto& [dt, v] : result.identity_upper_bounds) arr.push_back({dt, v});
    s["identity_coupling_upper_bounds"] = arr;
  }
  s["max_discarded_mass"] = result.max_discarded_mass;
  s["stderr_kind"] = "member_paired_surrogate";
  s["notes"] = result.notes;
  j["summary"] = s;
  ordered_json fp;
  fp["seed"] = result.config.seed;
  fp["version"] = kVersion;
  j["fingerprint"] = fp;

  const fs::path json_path = fs::path(out_dir) / "report.json";
  std::ofstream jf(json_path, std::ios::binary);
  if (!jf) throw IoError("cannot open " + json_path.string());
  jf << j.dump(2) << '\n';
  jf.flush();
  if (!jf) throw IoError("failed writing " + json_path.string());
}

}  // namespace semisplit
