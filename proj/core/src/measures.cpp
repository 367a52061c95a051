#include "semisplit/measures.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "semisplit/errors.hpp"
#include "semisplit/util.hpp"

namespace semisplit {

namespace {
const unsigned kHaltonBases[] = {2, 3, 5, 7, 11, 13, 17, 19};
}

InitialMeasure InitialMeasure::dirac(const Eigen::VectorXd& q0, const Eigen::VectorXd& p0) {
  InitialMeasure m;
  m.dim = static_cast<int>(q0.size());
  Component c;
  c.kind = Kind::dirac;
  c.q0 = q0;
  c.p0 = p0;
  c.sigma_q = Eigen::VectorXd::Zero(q0.size());
  c.sigma_p = Eigen::VectorXd::Zero(p0.size());
  c.weight = 1.0;
  m.components = {c};
  m.validate();
  return m;
}

InitialMeasure InitialMeasure::gaussian(const Eigen::VectorXd& q0, const Eigen::VectorXd& p0,
                                        const Eigen::VectorXd& sigma_q,
                                        const Eigen::VectorXd& sigma_p) {
  InitialMeasure m;
  m.dim = static_cast<int>(q0.size());
  Component c;
  c.kind = Kind::gaussian;
  c.q0 = q0;
  c.p0 = p0;
  c.sigma_q = sigma_q;
  c.sigma_p = sigma_p;
  c.weight = 1.0;
  m.components = {c};
  m.validate();
  return m;
}

InitialMeasure InitialMeasure::mixture(const std::vector<Component>& components) {
  InitialMeasure m;
  if (components.empty()) throw ConfigError("mixture: no components");
  m.dim = static_cast<int>(components.front().q0.size());
  m.components = components;
  m.validate();
  return m;
}

void InitialMeasure::validate() const {
  if (components.empty()) throw ConfigError("InitialMeasure: no components");
  double wsum = 0.0;
  for (const auto& c : components) {
    if (c.q0.size() != dim || c.p0.size() != dim)
      throw ConfigError("InitialMeasure: component dimension mismatch");
    if (c.kind == Kind::gaussian &&
        (c.sigma_q.size() != dim || c.sigma_p.size() != dim))
      throw ConfigError("InitialMeasure: gaussian sigma dimension mismatch");
    if (c.kind == Kind::gaussian &&
        ((c.sigma_q.array() < 0).any() || (c.sigma_p.array() < 0).any()))
      throw ConfigError("InitialMeasure: negative sigma");
    if (c.kind == Kind::mixture) throw ConfigError("InitialMeasure: nested mixture");
    if (c.weight <= 0) throw ConfigError("InitialMeasure: nonpositive weight");
    wsum += c.weight;
  }
  if (std::fabs(wsum - 1.0) > 1e-12)
    throw ConfigError("InitialMeasure: weights must sum to 1");
}

double InitialMeasure::second_moment() const {
  double total = 0.0;
  for (const auto& c : components) {
    double m = c.q0.squaredNorm() + c.p0.squaredNorm();
    if (c.kind == Kind::gaussian) m += c.sigma_q.squaredNorm() + c.sigma_p.squaredNorm();
    total += c.weight * m;
  }
  return total;
}

double InitialMeasure::momentum_moment_24() const {
  double total = 0.0;
  for (const auto& c : components) {
    double m2 = c.p0.squaredNorm();
    double m4;
    if (c.kind == Kind::gaussian) {
      m2 += c.sigma_p.squaredNorm();
      // E (sum_i p_i^2)^2 for independent p_i ~ N(p0_i, s_i^2):
      // sum_i E p_i^4 + sum_{i != j} E p_i^2 E p_j^2.
      double sum_m2 = 0.0, sum_sq = 0.0, sum_m4 = 0.0;
      for (int i = 0; i < dim; ++i) {
        const double mu = c.p0[i], s2 = c.sigma_p[i] * c.sigma_p[i];
        const double e2 = mu * mu + s2;
        const double e4 = mu * mu * mu * mu + 6.0 * mu * mu * s2 + 3.0 * s2 * s2;
        sum_m2 += e2;
        sum_sq += e2 * e2;
        sum_m4 += e4;
      }
      m4 = sum_m4 + (sum_m2 * sum_m2 - sum_sq);
    } else {
      m4 = m2 * m2;
    }
    total += c.weight * (m2 + m4);
  }
  return total;
}

double InitialMeasure::abs_momentum_moment() const {
  double total = 0.0;
  for (const auto& c : components) {
    double m;
    if (c.kind == Kind::dirac) {
      m = c.p0.norm();
    } else if (dim == 1) {
      m = folded_normal_mean(c.p0[0], c.sigma_p[0]);
    } else {
      // E|p| <= |p0| + sigma_max * E|chi_d|; E|chi_d| = sqrt(2)*G((d+1)/2)/G(d/2).
      const double sigma_max = c.sigma_p.maxCoeff();
      const double echi = std::sqrt(2.0) *
                          std::exp(std::lgamma(0.5 * (dim + 1)) - std::lgamma(0.5 * dim));
      m = c.p0.norm() + sigma_max * echi;
    }
    total += c.weight * m;
  }
  return total;
}

double InitialMeasure::abs_momentum_quantile(double alpha) const {
  // Upper bound for mixtures: max over components of the component quantile.
  double q = 0.0;
  for (const auto& c : components) {
    double cq;
    if (c.kind == Kind::dirac) {
      cq = c.p0.norm();
    } else if (dim == 1) {
      cq = folded_normal_quantile(c.p0[0], c.sigma_p[0], alpha);
    } else {
      cq = c.p0.norm() + c.sigma_p.maxCoeff() * chi_quantile(dim, alpha);
    }
    q = std::max(q, cq);
  }
  return q;
}

std::vector<Eigen::VectorXd> sample_measure_points(const InitialMeasure& mu, int n,
                                                   std::uint64_t seed) {
  mu.validate();
  if (n < 1) throw ConfigError("sample_measure_points: n < 1");
  const int d = mu.dim;
  if (2 * d > static_cast<int>(std::size(kHaltonBases)))
    throw ConfigError("sample_measure_points: dimension too large for Halton bases");

  // Largest-remainder allocation of n draws across components.
  const std::size_t ncomp = mu.components.size();
  std::vector<int> counts(ncomp, 0);
  if (ncomp == 1) {
    counts[0] = n;
  } else {
    std::vector<std::pair<double, std::size_t>> rema(ncomp);
    int assigned = 0;
    for (std::size_t c = 0; c < ncomp; ++c) {
      const double exact = mu.components[c].weight * n;
      counts[c] = static_cast<int>(std::floor(exact));
      assigned += counts[c];
      rema[c] = {exact - std::floor(exact), c};
    }
    std::sort(rema.begin(), rema.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second < b.second;
    });
    for (int k = 0; k < n - assigned; ++k) counts[rema[k].second] += 1;
  }

  std::vector<Eigen::VectorXd> pts;
  pts.reserve(n);
  std::uint64_t index = 1 + seed;  // deterministic offset into the sequence
  for (std::size_t c = 0; c < ncomp; ++c) {
    const auto& comp = mu.components[c];
    for (int i = 0; i < counts[c]; ++i, ++index) {
      Eigen::VectorXd z(2 * d);
      if (comp.kind == InitialMeasure::Kind::dirac) {
        z.head(d) = comp.q0;
        z.tail(d) = comp.p0;
      } else {
        for (int a = 0; a < d; ++a) {
          const double uq = radical_inverse(index, kHaltonBases[a]);
          const double up = radical_inverse(index, kHaltonBases[d + a]);
          z[a] = comp.q0[a] + comp.sigma_q[a] * normal_quantile(uq);
          z[d + a] = comp.p0[a] + comp.sigma_p[a] * normal_quantile(up);
        }
      }
      pts.push_back(std::move(z));
    }
  }
  return pts;
}

}  // namespace semisplit
