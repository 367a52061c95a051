#include <cmath>
#include <numbers>

#include "doctest.h"
#include "semisplit/errors.hpp"
#include "semisplit/measures.hpp"
#include "semisplit/phasespace.hpp"

using namespace semisplit;

namespace {

SpatialGrid grid_of(double half_width, int n) {
  SpatialGrid g;
  g.dim = 1;
  g.half_width = half_width;
  g.n_points = n;
  return g;
}

double l1_difference(const PhaseDensity& a, const PhaseDensity& b) {
  REQUIRE(a.values.rows() == b.values.rows());
  REQUIRE(a.values.cols() == b.values.cols());
  return (a.values - b.values).cwiseAbs().sum() * a.grid.cell_volume();
}

// Empirical mean and variance of a density along an axis (0 = x, 1 = xi).
std::pair<double, double> axis_stats(const PhaseDensity& pd, int axis) {
  double mass = 0.0, mean = 0.0;
  for (int i = 0; i < pd.values.rows(); ++i)
    for (int l = 0; l < pd.values.cols(); ++l) {
      const double w = pd.values(i, l) * pd.grid.cell_volume();
      const double c = axis == 0 ? pd.grid.x.node(i) : pd.grid.xi.node(l);
      mass += w;
      mean += w * c;
    }
  mean /= mass;
  double var = 0.0;
  for (int i = 0; i < pd.values.rows(); ++i)
    for (int l = 0; l < pd.values.cols(); ++l) {
      const double w = pd.values(i, l) * pd.grid.cell_volume();
      const double c = axis == 0 ? pd.grid.x.node(i) : pd.grid.xi.node(l);
      var += w * (c - mean) * (c - mean);
    }
  return {mean, var / mass};
}

}  // namespace

TEST_SUITE("phasespace") {

TEST_CASE("make_phase_grid covers the requested box") {
  const PhaseGrid g = make_phase_grid(-2.0, 3.0, 0.25, -1.0, 1.0, 0.5);
  CHECK(g.x.offset <= -2.0);
  CHECK(g.x.last() >= 3.0 - 1e-12);
  CHECK(g.xi.offset <= -1.0);
  CHECK(g.xi.last() >= 1.0 - 1e-12);
  CHECK(g.x.count >= 8);
  CHECK(g.xi.count >= 8);
  g.validate();
}

TEST_CASE("wigner transform of a coherent state: mass, peak, marginal") {
  const double hbar = 0.5;
  const SpatialGrid sg = grid_of(10.0, 256);
  const WaveFunction psi = coherent_state(sg, hbar, 1.0, -0.5);
  const PhaseGrid pg = default_phase_grid(sg, hbar);
  const PhaseDensity w = wigner_transform(psi, pg);
  CHECK(w.mass() == doctest::Approx(1.0).epsilon(1e-6));
  const auto [mq, vq] = axis_stats(w, 0);
  const auto [mp, vp] = axis_stats(w, 1);
  CHECK(mq == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(mp == doctest::Approx(-0.5).epsilon(1e-5));
  // Wigner of a coherent state has variance hbar/2 per axis.
  CHECK(vq == doctest::Approx(hbar / 2).epsilon(1e-4));
  CHECK(vp == doctest::Approx(hbar / 2).epsilon(1e-4));
}

TEST_CASE("wigner position marginal reproduces |psi|^2") {
  const double hbar = 0.5;
  const SpatialGrid sg = grid_of(10.0, 256);
  const WaveFunction psi = coherent_state(sg, hbar, 0.5, 0.3);
  const PhaseGrid pg = default_phase_grid(sg, hbar);
  const PhaseDensity w = wigner_transform(psi, pg);
  REQUIRE(w.values.rows() == sg.n_points);
  for (int j = 40; j < 216; ++j) {  // skip far tails where both are ~0
    const double marginal = w.values.row(j).sum() * pg.xi.spacing;
    const double density = std::norm(psi.amplitudes[j]);
    CHECK(marginal == doctest::Approx(density).epsilon(1e-5));
  }
}

TEST_CASE("husimi direct: nonnegative, unit mass, exact Gaussian profile") {
  const double hbar = 0.25;
  const SpatialGrid sg = grid_of(10.0, 256);
  const WaveFunction psi = coherent_state(sg, hbar, 0.8, 0.4);
  const PhaseGrid pg = default_phase_grid(sg, hbar);
  const PhaseDensity q = husimi_direct(psi, pg);
  CHECK(q.values.minCoeff() >= 0.0);
  CHECK(q.mass() == doctest::Approx(1.0).epsilon(1e-6));
  // Husimi of a coherent state is a Gaussian of variance hbar per axis.
  const auto [mq, vq] = axis_stats(q, 0);
  const auto [mp, vp] = axis_stats(q, 1);
  CHECK(mq == doctest::Approx(0.8).epsilon(1e-6));
  CHECK(mp == doctest::Approx(0.4).epsilon(1e-5));
  CHECK(vq == doctest::Approx(hbar).epsilon(1e-4));
  CHECK(vp == doctest::Approx(hbar).epsilon(1e-4));
}

TEST_CASE("the two husimi algorithms agree") {
  const double hbar = 0.5;
  const SpatialGrid sg = grid_of(10.0, 256);
  const PhaseGrid pg = default_phase_grid(sg, hbar);
  // A non-Gaussian state: superposition of two separated coherent states.
  WaveFunction psi = coherent_state(sg, hbar, 1.2, 0.0);
  const WaveFunction other = coherent_state(sg, hbar, -1.2, 0.5);
  psi.amplitudes = (psi.amplitudes + other.amplitudes) / std::sqrt(2.0);
  const double n = std::sqrt(psi.grid.dx() * psi.amplitudes.squaredNorm());
  psi.amplitudes /= n;
  const PhaseDensity direct = husimi_direct(psi, pg);
  const PhaseDensity smoothed = husimi_via_smoothing(wigner_transform(psi, pg), hbar);
  CHECK(l1_difference(direct, smoothed) <= 1e-5);
}

TEST_CASE("ensemble husimi is the weighted member average") {
  const double hbar = 0.5;
  const SpatialGrid sg = grid_of(10.0, 128);
  const PhaseGrid pg = default_phase_grid(sg, hbar);
  StateEnsemble ens;
  ens.members = {coherent_state(sg, hbar, 1.0, 0.0), coherent_state(sg, hbar, -0.5, 0.3)};
  ens.weights = {0.25, 0.75};
  ens.sample_points = {Eigen::Vector2d(1.0, 0.0), Eigen::Vector2d(-0.5, 0.3)};
  const PhaseDensity mix = husimi_of_ensemble(ens, pg);
  const PhaseDensity a = husimi_direct(ens.members[0], pg);
  const PhaseDensity b = husimi_direct(ens.members[1], pg);
  PhaseDensity manual = a;
  manual.values = 0.25 * a.values + 0.75 * b.values;
  CHECK(l1_difference(mix, manual) <= 1e-12);
  // Worker count must not change the ordered reduction.
  const PhaseDensity mix2 = husimi_of_ensemble(ens, pg, 3);
  CHECK((mix.values - mix2.values).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("rebin aggregates blocks, preserves mass, recenters offsets") {
  PhaseGrid g;
  g.x = {0.0, 0.5, 12};
  g.xi = {-1.0, 0.25, 9};
  PhaseDensity pd;
  pd.grid = g;
  pd.values.resize(12, 9);
  for (int i = 0; i < 12; ++i)
    for (int l = 0; l < 9; ++l) pd.values(i, l) = 1.0 + i + 0.1 * l;
  const double mass0 = pd.mass();
  const PhaseDensity c = rebin(pd, 3);
  CHECK(c.grid.x.count == 4);
  CHECK(c.grid.xi.count == 3);
  CHECK(c.grid.x.spacing == doctest::Approx(1.5).epsilon(1e-15));
  // New node centers the 3x3 block: offset moves by (factor-1)/2 old cells.
  CHECK(c.grid.x.offset == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(c.mass() == doctest::Approx(mass0).epsilon(1e-12));
  CHECK_THROWS_AS((void)rebin(pd, 5), ConfigError);  // 12 and 9 not divisible by 5
}

TEST_CASE("density_to_measure keeps heavy cells and renormalizes") {
  const double hbar = 0.5;
  const SpatialGrid sg = grid_of(10.0, 128);
  const PhaseGrid pg = default_phase_grid(sg, hbar);
  const WaveFunction psi = coherent_state(sg, hbar, 0.0, 0.0);
  const PhaseDensity q = husimi_direct(psi, pg);
  const MeasureExtraction ex = density_to_measure(q, 1e-6);
  double wsum = 0.0;
  for (double w : ex.measure.weights) wsum += w;
  CHECK(wsum == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(ex.discarded_mass >= 0.0);
  CHECK(ex.discarded_mass <= 1e-4);
  CHECK(static_cast<int>(ex.measure.support.size()) < q.values.size());
  // Support points are 2d phase-space nodes.
  CHECK(ex.measure.point_dim() == 2);
}

TEST_CASE("brutal thresholds raise ExcessiveTruncation") {
  const double hbar = 0.5;
  const SpatialGrid sg = grid_of(10.0, 128);
  const PhaseGrid pg = default_phase_grid(sg, hbar);
  const WaveFunction psi = coherent_state(sg, hbar, 0.0, 0.0);
  const PhaseDensity q = husimi_direct(psi, pg);
  CHECK_THROWS_AS((void)density_to_measure(q, 0.9), ExcessiveTruncation);
}

}  // TEST_SUITE
