// Radial feeder model: per-unit conversion and tree validation, voltage
// sensitivity matrices from common-path impedance sums, and a nonlinear
// backward/forward sweep power flow used as the measurement model and
// as the validation oracle for the linearization.
#pragma once

#include <cmath>
#include <complex>
#include <iostream>
#include <string>
#include <vector>

#include "dermarket/csv.hpp"
#include "dermarket/error.hpp"

namespace dermarket {

struct FeederLine {
  int from = 0, to = 0;
  double r_pu = 0, x_pu = 0;
};

/// Controllable DER record at a feeder node. Power fields in kW/kVA as
/// shipped; the controller converts to per-unit.
struct DerRecord {
  int node = 0;
  double s_max_kva = 0;
  double p_min_kw = 0;
  double p_max_kw = 0;
  double cost_a = 0;
  double cost_b = 0;
};

struct FeederBases {
  double base_mva = 1.0;
  double base_kv = 4.8;
  double v0_pu = 1.0;
};

struct FeederModel {
  int num_nodes = 0;  // including substation node 0
  std::vector<FeederLine> lines;
  std::vector<DerRecord> ders;
  FeederBases bases;
  bool slater_ok = true;

  // tree structure, filled by load/finalize
  std::vector<int> parent;          // parent[i], parent[0] = -1
  std::vector<double> r_up, x_up;   // impedance of the edge to parent
  std::vector<int> order;           // root-first traversal order

  int n() const { return num_nodes - 1; }
  double z_base_ohm() const {
    return bases.base_kv * bases.base_kv / bases.base_mva;
  }
};

namespace detail {

inline void build_tree(FeederModel& f) {
  int n = f.num_nodes;
  std::vector<std::vector<std::pair<int, int>>> adj(n);  // (neighbor, line idx)
  for (size_t e = 0; e < f.lines.size(); ++e) {
    const auto& L = f.lines[e];
    if (L.from < 0 || L.from >= n || L.to < 0 || L.to >= n)
      throw Error(Errc::bad_value, "line references unknown node");
    adj[L.from].push_back({L.to, (int)e});
    adj[L.to].push_back({L.from, (int)e});
  }
  f.parent.assign(n, -1);
  f.r_up.assign(n, 0);
  f.x_up.assign(n, 0);
  f.order.clear();
  std::vector<char> seen(n, 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    f.order.push_back(u);
    for (auto [v, e] : adj[u]) {
      if (v == f.parent[u]) continue;
      if (seen[v])
        throw Error(Errc::cycle_detected,
                    "nodes " + std::to_string(u) + " and " + std::to_string(v));
      seen[v] = 1;
      f.parent[v] = u;
      f.r_up[v] = f.lines[e].r_pu;
      f.x_up[v] = f.lines[e].x_pu;
      stack.push_back(v);
    }
  }
  for (int i = 0; i < n; ++i)
    if (!seen[i])
      throw Error(Errc::disconnected_node, "node " + std::to_string(i));
  if (static_cast<int>(f.lines.size()) != n - 1)
    throw Error(Errc::cycle_detected, "line count does not match a tree");
}

}  // namespace detail

/// Loads the feeder from a line CSV (from,to,r_ohm,x_ohm) and a DER node
/// CSV (node,s_max_kva,p_min_kw,p_max_kw,cost_a,cost_b). Impedances are
/// converted to per-unit on the given bases. Verifies the tree property
/// and warns when the no-injection voltage profile violates the limits
/// (the interior-point requirement of the controller).
inline FeederModel load_feeder(const std::string& lines_path,
                               const std::string& nodes_path,
                               const FeederBases& bases, double v_min = 0.95,
                               double v_max = 1.045) {
  if (!(bases.base_mva > 0) || !(bases.base_kv > 0) || !(bases.v0_pu > 0))
    throw Error(Errc::bad_units, "feeder bases must be positive");
  FeederModel f;
  f.bases = bases;
  double zb = f.z_base_ohm();

  CsvTable lt = read_csv(lines_path);
  int cf = lt.require_column("from", lines_path);
  int ct = lt.require_column("to", lines_path);
  int cr = lt.require_column("r_ohm", lines_path);
  int cx = lt.require_column("x_ohm", lines_path);
  int max_node = 0;
  for (const auto& row : lt.rows) {
    FeederLine L;
    L.from = static_cast<int>(parse_int(row[cf], lines_path));
    L.to = static_cast<int>(parse_int(row[ct], lines_path));
    double r_ohm = parse_num(row[cr], lines_path);
    double x_ohm = parse_num(row[cx], lines_path);
    if (L.from < 0 || L.to < 0)
      throw Error(Errc::bad_value, "negative node id in " + lines_path);
    if (r_ohm < 0 || x_ohm < 0)
      throw Error(Errc::bad_units, "negative impedance in " + lines_path);
    L.r_pu = r_ohm / zb;
    L.x_pu = x_ohm / zb;
    f.lines.push_back(L);
    max_node = std::max({max_node, L.from, L.to});
  }
  f.num_nodes = max_node + 1;
  detail::build_tree(f);

  CsvTable nt = read_csv(nodes_path);
  int cn = nt.require_column("node", nodes_path);
  int cs = nt.require_column("s_max_kva", nodes_path);
  int cpl = nt.require_column("p_min_kw", nodes_path);
  int cpu = nt.require_column("p_max_kw", nodes_path);
  int ca = nt.require_column("cost_a", nodes_path);
  int cb = nt.require_column("cost_b", nodes_path);
  for (const auto& row : nt.rows) {
    DerRecord d;
    d.node = static_cast<int>(parse_int(row[cn], nodes_path));
    d.s_max_kva = parse_num(row[cs], nodes_path);
    d.p_min_kw = parse_num(row[cpl], nodes_path);
    d.p_max_kw = parse_num(row[cpu], nodes_path);
    d.cost_a = parse_num(row[ca], nodes_path);
    d.cost_b = parse_num(row[cb], nodes_path);
    if (d.node <= 0 || d.node >= f.num_nodes)
      throw Error(Errc::bad_value, "DER node out of range in " + nodes_path);
    if (d.s_max_kva < 0 || d.p_min_kw > d.p_max_kw)
      throw Error(Errc::bad_value, "inconsistent DER record in " + nodes_path);
    f.ders.push_back(d);
  }

  f.slater_ok = (bases.v0_pu >= v_min && bases.v0_pu <= v_max);
  if (!f.slater_ok)
    std::cerr << "warning: zero-injection voltage " << bases.v0_pu
              << " violates [" << v_min << ", " << v_max << "]\n";
  return f;
}

/// Voltage sensitivities of the linearized power flow: entry (i,j) sums
/// the resistance (reactance) over the path edges shared between the
/// root-to-i and root-to-j paths, divided by the substation voltage.
struct Sensitivity {
  int n = 0;
  std::vector<double> R, X;      // n*n row-major, nodes 1..n
  std::vector<double> v_tilde;   // length n

  double r(int i, int j) const { return R[static_cast<size_t>(i) * n + j]; }
  double x(int i, int j) const { return X[static_cast<size_t>(i) * n + j]; }
};

inline Sensitivity sensitivity_matrices(const FeederModel& f) {
  int n = f.n();
  Sensitivity s;
  s.n = n;
  s.R.assign(static_cast<size_t>(n) * n, 0.0);
  s.X.assign(static_cast<size_t>(n) * n, 0.0);
  s.v_tilde.assign(n, f.bases.v0_pu);

  // cumulative path impedance from root to each node
  std::vector<double> rsum(f.num_nodes, 0), xsum(f.num_nodes, 0);
  std::vector<int> depth(f.num_nodes, 0);
  for (int u : f.order) {
    if (u == 0) continue;
    rsum[u] = rsum[f.parent[u]] + f.r_up[u];
    xsum[u] = xsum[f.parent[u]] + f.x_up[u];
    depth[u] = depth[f.parent[u]] + 1;
  }
  auto common_ancestor = [&](int a, int b) {
    while (a != b) {
      if (depth[a] >= depth[b]) a = f.parent[a];
      else b = f.parent[b];
    }
    return a;
  };
  for (int i = 1; i <= n; ++i) {
    for (int j = i; j <= n; ++j) {
      int anc = common_ancestor(i, j);
      double rij = rsum[anc] / f.bases.v0_pu;
      double xij = xsum[anc] / f.bases.v0_pu;
      s.R[static_cast<size_t>(i - 1) * n + (j - 1)] = rij;
      s.R[static_cast<size_t>(j - 1) * n + (i - 1)] = rij;
      s.X[static_cast<size_t>(i - 1) * n + (j - 1)] = xij;
      s.X[static_cast<size_t>(j - 1) * n + (i - 1)] = xij;
    }
  }
  return s;
}

/// Linear-model voltage prediction for net injections (per-unit).
inline std::vector<double> linear_voltages(const Sensitivity& s,
                                           const std::vector<double>& p,
                                           const std::vector<double>& q) {
  if (static_cast<int>(p.size()) != s.n || static_cast<int>(q.size()) != s.n)
    throw Error(Errc::dimension_mismatch, "injections vs sensitivity size");
  std::vector<double> v(s.n, 0.0);
  for (int i = 0; i < s.n; ++i) {
    double acc = s.v_tilde[i];
    const double* Ri = &s.R[static_cast<size_t>(i) * s.n];
    const double* Xi = &s.X[static_cast<size_t>(i) * s.n];
    for (int j = 0; j < s.n; ++j) acc += Ri[j] * p[j] + Xi[j] * q[j];
    v[i] = acc;
  }
  return v;
}

/// Backward/forward sweep on the radial feeder. Net injections in
/// per-unit (generation positive), indexed by node-1. Returns voltage
/// magnitudes at nodes 1..n. Throws SweepDiverged when the fixed point
/// is not reached or the voltage leaves a sane band.
inline std::vector<double> ac_power_flow(const FeederModel& f,
                                         const std::vector<double>& p,
                                         const std::vector<double>& q,
                                         int max_iter = 100, double tol = 1e-10,
                                         int* iterations = nullptr) {
  int n = f.n();
  if (static_cast<int>(p.size()) != n || static_cast<int>(q.size()) != n)
    throw Error(Errc::dimension_mismatch, "injections vs feeder size");
  using cplx = std::complex<double>;
  std::vector<cplx> V(f.num_nodes, cplx(f.bases.v0_pu, 0.0));
  std::vector<cplx> branch(f.num_nodes, cplx(0, 0));  // current parent->node

  for (int it = 0; it < max_iter; ++it) {
    // backward: accumulate branch currents from the leaves
    for (int i = 0; i < f.num_nodes; ++i) branch[i] = cplx(0, 0);
    for (auto rit = f.order.rbegin(); rit != f.order.rend(); ++rit) {
      int u = *rit;
      if (u == 0) continue;
      cplx s_inj(p[u - 1], q[u - 1]);
      cplx draw = std::conj(-s_inj / V[u]);
      branch[u] += draw;
      branch[f.parent[u]] += branch[u];
    }
    // forward: update voltages from the substation down
    double worst = 0;
    for (int u : f.order) {
      if (u == 0) continue;
      cplx z(f.r_up[u], f.x_up[u]);
      cplx v_new = V[f.parent[u]] - z * branch[u];
      worst = std::max(worst, std::abs(v_new - V[u]));
      V[u] = v_new;
      double mag = std::abs(v_new);
      if (!(mag > 0.2 && mag < 3.0))
        throw Error(Errc::sweep_diverged,
                    "voltage left the sane band at node " + std::to_string(u));
    }
    if (worst < tol) {
      if (iterations) *iterations = it + 1;
      std::vector<double> out(n);
      for (int i = 1; i <= n; ++i) out[i - 1] = std::abs(V[i]);
      return out;
    }
  }
  throw Error(Errc::sweep_diverged, "no fixed point within iteration cap");
}

}  // namespace dermarket
