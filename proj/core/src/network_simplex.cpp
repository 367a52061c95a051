#include "network_simplex.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

#include "semisplit/errors.hpp"

namespace semisplit {

double transport_cost(const Eigen::MatrixXd& a, int i, const Eigen::MatrixXd& b, int j,
                      CostKind kind) {
  const double sq = (a.row(i) - b.row(j)).squaredNorm();
  if (kind == CostKind::squared_euclidean) return sq;
  return std::min(1.0, std::sqrt(sq));
}

namespace {

// Spanning-tree representation over m sources, n sinks and an artificial
// root (index m+n). Each non-root node stores its parent arc: orientation
// dir=+1 means the arc points node -> parent, dir=-1 parent -> node; flow
// is the nonnegative flow on that arc.
struct Tree {
  int m, n, root;
  std::vector<int> parent;
  std::vector<int8_t> dir;
  std::vector<double> flow;
  std::vector<double> cost;  // cost coefficient of the parent arc
  std::vector<int> depth;
  std::vector<double> pot;
  std::vector<std::vector<int>> children;

  explicit Tree(int m_, int n_) : m(m_), n(n_), root(m_ + n_) {
    const int N = m + n + 1;
    parent.assign(N, -1);
    dir.assign(N, 0);
    flow.assign(N, 0.0);
    cost.assign(N, 0.0);
    depth.assign(N, 0);
    pot.assign(N, 0.0);
    children.assign(N, {});
  }

  void remove_child(int p, int c) {
    auto& v = children[p];
    auto it = std::find(v.begin(), v.end(), c);
    *it = v.back();
    v.pop_back();
  }
};

}  // namespace

TransportSolution solve_transport(const TransportInstance& inst, long long max_pivots) {
  const int m = static_cast<int>(inst.supply.size());
  const int n = static_cast<int>(inst.demand.size());
  if (m <= 0 || n <= 0) throw ConfigError("solve_transport: empty instance");
  if (inst.src_pts.rows() != m || inst.dst_pts.rows() != n ||
      inst.src_pts.cols() != inst.dst_pts.cols())
    throw ConfigError("solve_transport: coordinate/weight size mismatch");

  // Equalize total supply and demand exactly (inputs agree to ~1e-12).
  std::vector<double> supply = inst.supply, demand = inst.demand;
  {
    double sa = 0.0, sb = 0.0;
    for (double v : supply) sa += v;
    for (double v : demand) sb += v;
    if (std::fabs(sa - sb) > 1e-9)
      throw ConfigError("solve_transport: supply and demand totals differ");
    int jmax = 0;
    for (int j = 1; j < n; ++j)
      if (demand[j] > demand[jmax]) jmax = j;
    demand[jmax] += sa - sb;
  }

  // Upper bound on any arc cost, for the artificial big-M cost.
  double c_max = 1.0;
  {
    const Eigen::RowVectorXd lo =
        inst.src_pts.colwise().minCoeff().cwiseMin(inst.dst_pts.colwise().minCoeff());
    const Eigen::RowVectorXd hi =
        inst.src_pts.colwise().maxCoeff().cwiseMax(inst.dst_pts.colwise().maxCoeff());
    const double diag_sq = (hi - lo).squaredNorm();
    c_max = (inst.kind == CostKind::squared_euclidean) ? std::max(1.0, diag_sq) : 1.0;
  }
  const double big = (static_cast<double>(m) + n) * (c_max + 1.0) + 1.0;
  const double eps_opt = 1e-13 * (1.0 + c_max);

  Tree t(m, n);
  // Initial all-artificial star basis through the root.
  t.pot[t.root] = 0.0;
  t.children[t.root].reserve(m + n);
  for (int i = 0; i < m; ++i) {
    t.parent[i] = t.root;
    t.dir[i] = +1;  // source -> root
    t.flow[i] = supply[i];
    t.cost[i] = big;
    t.depth[i] = 1;
    t.pot[i] = big;  // reduced cost big - pot[i] + pot[root] = 0
    t.children[t.root].push_back(i);
  }
  for (int j = 0; j < n; ++j) {
    const int u = m + j;
    t.parent[u] = t.root;
    t.dir[u] = -1;  // root -> sink
    t.flow[u] = demand[j];
    t.cost[u] = big;
    t.depth[u] = 1;
    t.pot[u] = -big;  // big - pot[root] + pot[u] = 0
    t.children[t.root].push_back(u);
  }

  const long long arc_count = static_cast<long long>(m) * n;
  const long long block =
      std::max<long long>(64, static_cast<long long>(std::sqrt(static_cast<double>(arc_count))));
  if (max_pivots <= 0)
    max_pivots = 1000000 + 256LL * (static_cast<long long>(m) + n);

  long long next_arc = 0;
  long long pivots = 0;
  std::vector<int> path_u, path_v;  // nodes whose parent arc lies on the cycle

  for (;;) {
    // --- Pricing: most negative reduced cost within successive blocks.
    int best_i = -1, best_j = -1;
    double best_r = -eps_opt;
    double best_c = 0.0;
    long long scanned = 0;
    while (scanned < arc_count) {
      const long long stop = std::min(arc_count, scanned + block);
      for (; scanned < stop; ++scanned) {
        const long long a = next_arc;
        ++next_arc;
        if (next_arc == arc_count) next_arc = 0;
        const int i = static_cast<int>(a / n);
        const int j = static_cast<int>(a % n);
        const double c = transport_cost(inst.src_pts, i, inst.dst_pts, j, inst.kind);
        const double r = c - t.pot[i] + t.pot[m + j];
        if (r < best_r) {
          best_r = r;
          best_i = i;
          best_j = j;
          best_c = c;
        }
      }
      if (best_i >= 0) break;
    }
    if (best_i < 0) break;  // optimal

    if (++pivots > max_pivots)
      throw NonConvergence("solve_transport: pivot cap exceeded (" +
                           std::to_string(max_pivots) + ")");

    const int u0 = best_i;
    const int v0 = m + best_j;

    // --- Collect the tree paths from both endpoints to their junction.
    path_u.clear();
    path_v.clear();
    {
      int a = u0, b = v0;
      int da = t.depth[a], db = t.depth[b];
      while (da > db) {
        path_u.push_back(a);
        a = t.parent[a];
        --da;
      }
      while (db > da) {
        path_v.push_back(b);
        b = t.parent[b];
        --db;
      }
      while (a != b) {
        path_u.push_back(a);
        a = t.parent[a];
        path_v.push_back(b);
        b = t.parent[b];
      }
    }

    // --- Ratio test. Pushing theta around the cycle u0 -> v0 -> ... -> u0:
    // on the u0 side the cycle runs parent->node (flow decreases on arcs
    // oriented node->parent); on the v0 side node->parent (flow decreases on
    // arcs oriented parent->node).
    double theta = std::numeric_limits<double>::infinity();
    for (int x : path_u)
      if (t.dir[x] == +1) theta = std::min(theta, t.flow[x]);
    for (int x : path_v)
      if (t.dir[x] == -1) theta = std::min(theta, t.flow[x]);
    if (!(theta < std::numeric_limits<double>::infinity())) theta = 0.0;

    // Leaving arc: the last blocking arc when traversing the cycle in its
    // direction starting at the junction (keeps the basis strongly feasible).
    int leave = -1;
    bool leave_on_u = true;
    for (auto it = path_u.rbegin(); it != path_u.rend(); ++it)
      if (t.dir[*it] == +1 && t.flow[*it] == theta) {
        leave = *it;
        leave_on_u = true;
      }
    for (int x : path_v)
      if (t.dir[x] == -1 && t.flow[x] == theta) {
        leave = x;
        leave_on_u = false;
      }
    if (leave < 0)
      throw NonConvergence("solve_transport: unbounded pivot (no blocking arc)");

    // --- Apply the flow change.
    if (theta != 0.0) {
      for (int x : path_u) t.flow[x] -= t.dir[x] * theta;
      for (int x : path_v) t.flow[x] += t.dir[x] * theta;
    }

    // --- Structural update: re-root the subtree cut off by the leaving arc
    // at the entering arc's endpoint inside it, then hang it on the other
    // endpoint.
    const int p_in = leave_on_u ? u0 : v0;   // endpoint inside the cut subtree
    const int p_out = leave_on_u ? v0 : u0;  // endpoint that stays attached
    const double delta = leave_on_u ? best_r : -best_r;

    // Reverse parent pointers along p_in -> ... -> leave. Every node on the
    // chain gets a new parent, so each is first detached from its old one
    // (detaching 'leave' removes the leaving arc itself).
    {
      int node = p_in;
      int old_parent = t.parent[node];
      int8_t old_dir = t.dir[node];
      double old_flow = t.flow[node];
      double old_cost = t.cost[node];
      t.remove_child(old_parent, node);
      while (node != leave) {
        const int up = old_parent;
        const int up_old_parent = t.parent[up];
        const int8_t up_old_dir = t.dir[up];
        const double up_old_flow = t.flow[up];
        const double up_old_cost = t.cost[up];
        t.remove_child(up_old_parent, up);
        // The arc formerly stored at 'node' now hangs 'up' below 'node',
        // with its orientation flag flipped accordingly.
        t.parent[up] = node;
        t.dir[up] = static_cast<int8_t>(-old_dir);
        t.flow[up] = old_flow;
        t.cost[up] = old_cost;
        t.children[node].push_back(up);
        node = up;
        old_parent = up_old_parent;
        old_dir = up_old_dir;
        old_flow = up_old_flow;
        old_cost = up_old_cost;
      }
    }

    // Attach p_in below p_out via the entering arc.
    t.parent[p_in] = p_out;
    t.dir[p_in] = static_cast<int8_t>(p_in == u0 ? +1 : -1);  // arc u0 -> v0
    t.flow[p_in] = theta;
    t.cost[p_in] = best_c;
    t.children[p_out].push_back(p_in);

    // --- Refresh potentials and depths of the re-rooted subtree (DFS).
    {
      static thread_local std::vector<int> stack;
      stack.clear();
      stack.push_back(p_in);
      while (!stack.empty()) {
        const int u = stack.back();
        stack.pop_back();
        t.pot[u] += delta;
        t.depth[u] = t.depth[t.parent[u]] + 1;
        for (int c : t.children[u]) stack.push_back(c);
      }
    }
  }

  // --- Extract the solution from the tree arcs.
  TransportSolution sol;
  sol.pivots = pivots;
  double artificial_flow = 0.0;
  for (int u = 0; u < m + n; ++u) {
    const int p = t.parent[u];
    if (u == t.root) continue;
    if (p == t.root || u == t.root) {
      artificial_flow += t.flow[u];
      continue;
    }
    if (t.flow[u] <= 0.0) continue;
    const int i = (u < m) ? u : p;
    const int j = (u < m) ? p - m : u - m;
    const double c = transport_cost(inst.src_pts, i, inst.dst_pts, j, inst.kind);
    sol.cost += t.flow[u] * c;
    sol.plan.push_back({i, j, t.flow[u]});
  }
  if (artificial_flow > 1e-9)
    throw NonConvergence("solve_transport: infeasible residual on artificial arcs");
  std::sort(sol.plan.begin(), sol.plan.end(), [](const Coupling::Entry& a, const Coupling::Entry& b) {
    return a.source != b.source ? a.source < b.source : a.target < b.target;
  });
  return sol;
}

}  // namespace semisplit
