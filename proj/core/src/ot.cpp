#include "semisplit/ot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "network_simplex.hpp"
#include "semisplit/errors.hpp"

namespace semisplit {

void DiscreteMeasure::validate(bool check_distinct) const {
  if (support.empty() || support.size() != weights.size())
    throw ConfigError("DiscreteMeasure: empty or mismatched support/weights");
  const auto dim = support.front().size();
  double sum = 0.0;
  for (std::size_t i = 0; i < support.size(); ++i) {
    if (support[i].size() != dim) throw ConfigError("DiscreteMeasure: mixed point dimensions");
    if (!support[i].allFinite()) throw ConfigError("DiscreteMeasure: non-finite support point");
    if (!(weights[i] > 0.0)) throw ConfigError("DiscreteMeasure: weights must be positive");
    sum += weights[i];
  }
  if (std::fabs(sum - 1.0) > 1e-12)
    throw ConfigError("DiscreteMeasure: weights sum to " + std::to_string(sum));
  if (check_distinct) {
    std::vector<int> idx(support.size());
    std::iota(idx.begin(), idx.end(), 0);
    auto lex = [&](int a, int b) {
      for (Eigen::Index c = 0; c < dim; ++c) {
        if (support[a][c] < support[b][c]) return true;
        if (support[a][c] > support[b][c]) return false;
      }
      return false;
    };
    std::sort(idx.begin(), idx.end(), lex);
    for (std::size_t i = 1; i < idx.size(); ++i)
      if (support[idx[i - 1]] == support[idx[i]])
        throw ConfigError("DiscreteMeasure: duplicate support points");
  }
}

int DiscreteMeasure::point_dim() const {
  return support.empty() ? 0 : static_cast<int>(support.front().size());
}

void Coupling::validate(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                        double tol) const {
  std::vector<double> row(mu.weights.size(), 0.0), col(nu.weights.size(), 0.0);
  for (const auto& e : entries) {
    if (e.source < 0 || e.source >= static_cast<int>(row.size()) || e.target < 0 ||
        e.target >= static_cast<int>(col.size()))
      throw ConfigError("Coupling: entry index out of range");
    if (!(e.mass >= 0.0)) throw ConfigError("Coupling: negative mass");
    row[e.source] += e.mass;
    col[e.target] += e.mass;
  }
  for (std::size_t i = 0; i < row.size(); ++i)
    if (std::fabs(row[i] - mu.weights[i]) > tol)
      throw ConfigError("Coupling: row sum deviates from source weight");
  for (std::size_t j = 0; j < col.size(); ++j)
    if (std::fabs(col[j] - nu.weights[j]) > tol)
      throw ConfigError("Coupling: column sum deviates from target weight");
}

namespace {

Eigen::MatrixXd stack_points(const std::vector<Eigen::VectorXd>& pts) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(pts.size()), pts.front().size());
  for (std::size_t i = 0; i < pts.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = pts[i];
  return out;
}

struct EntropicOut {
  double cost_ub = 0.0;
  double cost_lb = 0.0;
  Coupling plan;
  bool have_plan = false;
};

// Log-domain Sinkhorn with an epsilon ladder. Returns certified upper and
// lower bounds on the unregularized optimal cost via Altschuler-style
// rounding (primal) and a c-transform of the dual potentials (dual).
EntropicOut entropic_transport(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                               const std::vector<double>& a, const std::vector<double>& b,
                               CostKind kind, const OtConfig& cfg, bool want_plan,
                               double cost_tol_rel) {
  const int m = static_cast<int>(a.size());
  const int n = static_cast<int>(b.size());
  const Eigen::RowVectorXd lo = A.colwise().minCoeff().cwiseMin(B.colwise().minCoeff());
  const Eigen::RowVectorXd hi = A.colwise().maxCoeff().cwiseMax(B.colwise().maxCoeff());
  double c_max = (hi - lo).squaredNorm();
  if (kind == CostKind::truncated_euclidean) c_max = std::min(1.0, std::sqrt(c_max));
  c_max = std::max(c_max, 1e-12);

  std::vector<double> f(m, 0.0), g(n, 0.0), la(m), lb(n);
  for (int i = 0; i < m; ++i) la[i] = std::log(a[i]);
  for (int j = 0; j < n; ++j) lb[j] = std::log(b[j]);

  auto cost = [&](int i, int j) { return transport_cost(A, i, B, j, kind); };

  long long iters_left = cfg.max_sinkhorn_iters;
  double eps = c_max / 4.0;
  EntropicOut out;

  std::vector<double> row_scale(m), col_partial(n), rho(m), sigma(n), err_r(m), err_c(n);

  while (true) {
    // --- Inner Sinkhorn loop at this epsilon.
    double marg_err = std::numeric_limits<double>::infinity();
    while (iters_left > 0 && marg_err > 1e-10) {
      --iters_left;
      for (int i = 0; i < m; ++i) {
        double mx = -std::numeric_limits<double>::infinity();
        for (int j = 0; j < n; ++j)
          mx = std::max(mx, (f[i] + g[j] - cost(i, j)) / eps);
        double s = 0.0;
        for (int j = 0; j < n; ++j) s += std::exp((f[i] + g[j] - cost(i, j)) / eps - mx);
        f[i] += eps * (la[i] - mx - std::log(s));
      }
      marg_err = 0.0;
      for (int j = 0; j < n; ++j) {
        double mx = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < m; ++i)
          mx = std::max(mx, (f[i] + g[j] - cost(i, j)) / eps);
        double s = 0.0;
        for (int i = 0; i < m; ++i) s += std::exp((f[i] + g[j] - cost(i, j)) / eps - mx);
        marg_err += std::fabs(std::exp(mx + std::log(s)) - b[j]);
        g[j] += eps * (lb[j] - mx - std::log(s));
      }
    }

    // --- Dual lower bound: make (f, g') feasible by a c-transform.
    double dual_lb = 0.0;
    for (int i = 0; i < m; ++i) dual_lb += a[i] * f[i];
    for (int j = 0; j < n; ++j) {
      double gj = std::numeric_limits<double>::infinity();
      for (int i = 0; i < m; ++i) gj = std::min(gj, cost(i, j) - f[i]);
      dual_lb += b[j] * gj;
    }

    // --- Primal upper bound: round the implicit plan to exact marginals.
    auto p_entry = [&](int i, int j) {
      const double e = (f[i] + g[j] - cost(i, j)) / eps;
      return std::exp(std::min(e, 700.0));
    };
    for (int i = 0; i < m; ++i) {
      double r = 0.0;
      for (int j = 0; j < n; ++j) r += p_entry(i, j);
      row_scale[i] = (r > 0.0) ? std::min(1.0, a[i] / r) : 1.0;
    }
    std::fill(col_partial.begin(), col_partial.end(), 0.0);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) col_partial[j] += row_scale[i] * p_entry(i, j);
    for (int j = 0; j < n; ++j)
      sigma[j] = (col_partial[j] > 0.0) ? std::min(1.0, b[j] / col_partial[j]) : 1.0;
    double cost_p2 = 0.0;
    for (int i = 0; i < m; ++i) {
      double rs = 0.0;
      for (int j = 0; j < n; ++j) {
        const double v = row_scale[i] * sigma[j] * p_entry(i, j);
        rs += v;
        cost_p2 += v * cost(i, j);
      }
      rho[i] = rs;
    }
    double s_def = 0.0;
    for (int i = 0; i < m; ++i) {
      err_r[i] = std::max(0.0, a[i] - rho[i]);
      s_def += err_r[i];
    }
    for (int j = 0; j < n; ++j) err_c[j] = std::max(0.0, b[j] - sigma[j] * col_partial[j]);
    double cost_corr = 0.0;
    if (s_def > 1e-300) {
      for (int i = 0; i < m; ++i) {
        if (err_r[i] == 0.0) continue;
        double inner = 0.0;
        for (int j = 0; j < n; ++j) inner += err_c[j] * cost(i, j);
        cost_corr += err_r[i] * inner;
      }
      cost_corr /= s_def;
    }
    const double primal_ub = cost_p2 + cost_corr;

    out.cost_ub = primal_ub;
    out.cost_lb = std::max(0.0, dual_lb);

    const double gap_rel = (primal_ub - out.cost_lb) / std::max(primal_ub, 1e-300);
    const bool certified = primal_ub <= 1e-14 * c_max || gap_rel <= cost_tol_rel;
    if (certified) {
      if (want_plan) {
        if (static_cast<long long>(m) * n > 4000000)
          throw TooLarge("entropic_transport: plan materialization too large");
        out.have_plan = true;
        for (int i = 0; i < m; ++i)
          for (int j = 0; j < n; ++j) {
            double v = row_scale[i] * sigma[j] * p_entry(i, j);
            if (s_def > 1e-300) v += err_r[i] * err_c[j] / s_def;
            if (v > 0.0) out.plan.entries.push_back({i, j, v});
          }
      }
      return out;
    }
    if (iters_left <= 0)
      throw NonConvergence("entropic_transport: iteration cap reached with relative gap " +
                           std::to_string(gap_rel));
    eps *= 0.25;
    if (eps < 1e-9 * c_max)
      throw NonConvergence("entropic_transport: epsilon ladder exhausted with relative gap " +
                           std::to_string(gap_rel));
  }
}

TransportResult optimal_transport(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                  const OtConfig& cfg, CostKind kind) {
  mu.validate();
  nu.validate();
  if (mu.point_dim() != nu.point_dim())
    throw ConfigError("optimal_transport: point dimensions differ");
  const int m = static_cast<int>(mu.support.size());
  const int n = static_cast<int>(nu.support.size());
  const Eigen::MatrixXd A = stack_points(mu.support);
  const Eigen::MatrixXd B = stack_points(nu.support);

  TransportResult res;
  if (m <= cfg.exact_cap && n <= cfg.exact_cap) {
    TransportInstance inst;
    inst.src_pts = A;
    inst.dst_pts = B;
    inst.supply = mu.weights;
    inst.demand = nu.weights;
    inst.kind = kind;
    TransportSolution sol = solve_transport(inst, cfg.max_pivots);
    res.method = TransportMethod::exact_lp;
    res.tolerance = 0.0;
    res.distance = (kind == CostKind::squared_euclidean)
                       ? std::sqrt(std::max(0.0, sol.cost))
                       : std::min(1.0, std::max(0.0, sol.cost));
    if (cfg.want_plan) {
      Coupling c;
      c.entries = std::move(sol.plan);
      res.plan = std::move(c);
    }
    return res;
  }

  // Entropic tier. The gap is certified on the raw cost; a relative cost gap
  // of cfg.tol implies a distance gap no larger than cfg.tol after the sqrt.
  EntropicOut e = entropic_transport(A, B, mu.weights, nu.weights, kind, cfg,
                                     cfg.want_plan, cfg.tol);
  res.method = TransportMethod::entropic;
  if (kind == CostKind::squared_euclidean) {
    const double d_ub = std::sqrt(std::max(0.0, e.cost_ub));
    const double d_lb = std::sqrt(std::max(0.0, e.cost_lb));
    res.distance = d_ub;
    res.tolerance = (d_ub - d_lb) / std::max(d_ub, 1e-300);
  } else {
    res.distance = std::min(1.0, std::max(0.0, e.cost_ub));
    res.tolerance = (e.cost_ub - e.cost_lb) / std::max(e.cost_ub, 1e-300);
  }
  if (e.have_plan) res.plan = std::move(e.plan);
  return res;
}

}  // namespace

TransportResult wasserstein2(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                             const OtConfig& cfg) {
  return optimal_transport(mu, nu, cfg, CostKind::squared_euclidean);
}

TransportResult dist1_truncated(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                const OtConfig& cfg) {
  return optimal_transport(mu, nu, cfg, CostKind::truncated_euclidean);
}

TransportResult coupled_particle_upper_bound(const PhaseEnsemble& a, const PhaseEnsemble& b) {
  a.validate();
  b.validate();
  if (a.points.size() != b.points.size() || a.rng_seed != b.rng_seed ||
      a.weights != b.weights)
    throw ProvenanceMismatch(
        "coupled_particle_upper_bound: ensembles do not share provenance");
  double s = 0.0;
  for (std::size_t i = 0; i < a.points.size(); ++i)
    s += a.weights[i] * ((a.points[i].x - b.points[i].x).squaredNorm() +
                         (a.points[i].xi - b.points[i].xi).squaredNorm());
  TransportResult res;
  res.distance = std::sqrt(std::max(0.0, s));
  res.method = TransportMethod::identity_upper_bound;
  res.tolerance = 0.0;
  return res;
}

double brute_force_oracle(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                          CostKind kind) {
  mu.validate();
  nu.validate();
  const int m = static_cast<int>(mu.support.size());
  const int n = static_cast<int>(nu.support.size());
  if (m > 4 || n > 4)
    throw TooLarge("brute_force_oracle: supports must have at most 4 points each");
  const Eigen::MatrixXd A = stack_points(mu.support);
  const Eigen::MatrixXd B = stack_points(nu.support);

  const int n_nodes = m + n;
  const int n_arcs = m * n;
  const int basis_size = n_nodes - 1;

  // Enumerate all arc subsets of size m+n-1; keep spanning trees; solve the
  // unique basic flows by leaf elimination; keep feasible ones.
  std::vector<int> comb(basis_size);
  double best = std::numeric_limits<double>::infinity();

  std::vector<int> chosen;
  std::vector<double> node_bal(n_nodes);
  std::vector<int> degree(n_nodes);
  std::vector<bool> arc_done(basis_size);

  auto evaluate = [&]() {
    // Union-find spanning check.
    std::vector<int> uf(n_nodes);
    std::iota(uf.begin(), uf.end(), 0);
    auto find = [&](int x) {
      while (uf[x] != x) x = uf[x] = uf[uf[x]];
      return x;
    };
    for (int a : chosen) {
      const int u = a / n, v = m + a % n;
      const int ru = find(u), rv = find(v);
      if (ru == rv) return;  // cycle
      uf[ru] = rv;
    }
    // Connected (n_nodes-1 acyclic arcs over n_nodes nodes is a tree).
    for (int u = 0; u < n_nodes; ++u) node_bal[u] = (u < m) ? mu.weights[u] : -nu.weights[u - m];
    std::fill(degree.begin(), degree.end(), 0);
    for (int a : chosen) {
      ++degree[a / n];
      ++degree[m + a % n];
    }
    std::fill(arc_done.begin(), arc_done.end(), false);
    double total = 0.0;
    for (int pass = 0; pass < basis_size; ++pass) {
      // Find an arc incident to a leaf.
      int pick = -1, leaf = -1;
      for (int ai = 0; ai < basis_size; ++ai) {
        if (arc_done[ai]) continue;
        const int u = chosen[ai] / n, v = m + chosen[ai] % n;
        if (degree[u] == 1) {
          pick = ai;
          leaf = u;
          break;
        }
        if (degree[v] == 1) {
          pick = ai;
          leaf = v;
          break;
        }
      }
      const int u = chosen[pick] / n, v = m + chosen[pick] % n;
      const int other = (leaf == u) ? v : u;
      // Balances carry sign (+supply at sources, -demand at sinks); the leaf's
      // arc must absorb the leaf's whole remaining balance.
      const double flow = (leaf == u) ? node_bal[u] : -node_bal[v];
      if (flow < -1e-12) return;  // infeasible basis
      node_bal[leaf] = 0.0;
      node_bal[other] += (leaf == u) ? flow : -flow;
      arc_done[pick] = true;
      --degree[u];
      --degree[v];
      total += std::max(0.0, flow) * transport_cost(A, chosen[pick] / n, B, chosen[pick] % n, kind);
    }
    best = std::min(best, total);
  };

  // Iterative combination enumeration.
  for (int i = 0; i < basis_size; ++i) comb[i] = i;
  if (basis_size > n_arcs) throw ConfigError("brute_force_oracle: degenerate instance");
  while (true) {
    chosen = comb;
    evaluate();
    int k = basis_size - 1;
    while (k >= 0 && comb[k] == n_arcs - basis_size + k) --k;
    if (k < 0) break;
    ++comb[k];
    for (int t = k + 1; t < basis_size; ++t) comb[t] = comb[t - 1] + 1;
  }
  if (!(best < std::numeric_limits<double>::infinity()))
    throw NonConvergence("brute_force_oracle: no feasible basis found");
  return (kind == CostKind::squared_euclidean) ? std::sqrt(std::max(0.0, best))
                                               : std::min(1.0, best);
}

DiscreteMeasure ensemble_to_measure(const PhaseEnsemble& ens) {
  ens.validate();
  const int d = static_cast<int>(ens.points.front().x.size());
  std::vector<Eigen::VectorXd> pts(ens.points.size());
  for (std::size_t i = 0; i < ens.points.size(); ++i) {
    Eigen::VectorXd z(2 * d);
    z.head(d) = ens.points[i].x;
    z.tail(d) = ens.points[i].xi;
    pts[i] = std::move(z);
  }
  // Merge exact duplicates so the support stays distinct.
  std::vector<int> idx(pts.size());
  std::iota(idx.begin(), idx.end(), 0);
  auto lex = [&](int a, int b) {
    for (int c = 0; c < 2 * d; ++c) {
      if (pts[a][c] < pts[b][c]) return true;
      if (pts[a][c] > pts[b][c]) return false;
    }
    return false;
  };
  std::stable_sort(idx.begin(), idx.end(), lex);
  DiscreteMeasure out;
  for (std::size_t t = 0; t < idx.size(); ++t) {
    if (t > 0 && pts[idx[t]] == pts[idx[t - 1]]) {
      out.weights.back() += ens.weights[idx[t]];
    } else {
      out.support.push_back(pts[idx[t]]);
      out.weights.push_back(ens.weights[idx[t]]);
    }
  }
  return out;
}

}  // namespace semisplit
