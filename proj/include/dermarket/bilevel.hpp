// Deterministic day-ahead bidding: the strategic DSO problem with the
// market clearing embedded through its optimality conditions,
// complementarity linearized with data-driven big-M constants and the
// bilinear revenue term replaced via strong duality. Hours decouple, so
// the day is solved as independent hourly MILPs. A grid-enumeration
// oracle over (caps, prices) validates the MILP on desk instances.
#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "dermarket/clearing.hpp"
#include "dermarket/csv.hpp"
#include "dermarket/error.hpp"
#include "dermarket/market.hpp"
#include "dermarket/solver.hpp"

namespace dermarket {

/// Inputs of one day-ahead hour: rival curves, DSO forecast and
/// capacities, and the fixed balancing prices for the hour.
struct HourInstance {
  BlockCurve supply;
  BlockCurve demand;
  double generation = 0.0;  // G_t, MWh
  double load = 0.0;        // L_t, MWh
  double g_cap = 0.0;       // MWh per slot
  double tr_max = 0.0;      // MWh per slot
  double pr_plus = 0.0;     // EUR/MWh, surplus sold in balancing
  double pr_minus = 0.0;    // EUR/MWh, deficit bought in balancing
};

struct HourDecision {
  double e_das = 0, e_dab = 0;
  double e_das_max = 0, e_dab_max = 0;
  double alpha_s = 0, alpha_b = 0;
  double lambda_da = 0;
  double e_bm_plus = 0, e_bm_minus = 0;
  double objective = 0;  // hour cost, EUR
  SolveStatus status = SolveStatus::optimal;
  double bound = 0;
  /// Embedded market-clearing point recovered from the solved model.
  ClearingResult clearing;
};

struct DaDecision {
  std::vector<HourDecision> hours;
  double objective = 0;
};

/// The assembled hourly MILP plus the variable map and the big-M
/// constants recorded alongside the constraints they bound.
struct MilpModel {
  LinearModel lm;
  HourInstance hour;
  double m_qty = 0;   // bounds E-type complementarity rows
  double m_dual = 0;  // bounds mu-type complementarity rows
  double alpha_lo = 0, alpha_hi = 0;

  int e_das = -1, e_dab = -1, e_das_max = -1, e_dab_max = -1;
  int e_bm_plus = -1, e_bm_minus = -1;
  int alpha_s = -1, alpha_b = -1, lambda = -1;
  int mu_s_min = -1, mu_s_max = -1, mu_b_min = -1, mu_b_max = -1;
  std::vector<int> e_o, e_d, mu_o_min, mu_o_max, mu_d_min, mu_d_max;
  int u_s_min = -1, u_b_min = -1, u_s_max = -1, u_b_max = -1;
  std::vector<int> u_o_min, u_o_max, u_d_min, u_d_max;

  size_t num_binaries() const {
    return 4 + u_o_min.size() + u_o_max.size() + u_d_min.size() + u_d_max.size();
  }
};

inline MilpModel build_milp(const HourInstance& hour) {
  if (hour.supply.blocks.empty() || hour.demand.blocks.empty())
    throw Error(Errc::empty_curve, "build_milp needs nonempty curves");
  if (!(hour.g_cap >= 0) || !(hour.tr_max > 0))
    throw Error(Errc::bad_value, "build_milp: bad capacities");
  if (hour.pr_plus > hour.pr_minus + 1e-12)
    throw Error(Errc::unbounded_model,
                "pr_plus > pr_minus makes the balancing recourse unbounded");

  MilpModel mm;
  mm.hour = hour;

  const auto& sup = hour.supply.blocks;
  const auto& dem = hour.demand.blocks;
  double total_qty = hour.supply.total_quantity() + hour.demand.total_quantity();
  mm.m_qty = total_qty + hour.g_cap + (hour.g_cap + hour.tr_max) + 1.0;

  double pmin = std::min(hour.supply.min_price(), hour.demand.min_price());
  double pmax = std::max(hour.supply.max_price(), hour.demand.max_price());
  double span = pmax - pmin;
  if (span <= 0) span = std::max(1.0, std::abs(pmax));
  mm.alpha_lo = pmin - 0.1 * span;
  mm.alpha_hi = pmax + 0.1 * span;
  mm.m_dual = span + std::max(std::abs(mm.alpha_lo), std::abs(mm.alpha_hi)) + 1.0;
  if (!(mm.m_qty > 0) || !(mm.m_dual > 0))
    throw Error(Errc::non_positive_big_m, "degenerate price/quantity data");

  LinearModel& lm = mm.lm;
  mm.e_das = lm.add_var(0, hour.g_cap, 0);
  mm.e_dab = lm.add_var(0, hour.g_cap + hour.tr_max, 0);
  mm.e_das_max = lm.add_var(0, hour.g_cap, 0);
  mm.e_dab_max = lm.add_var(0, hour.g_cap + hour.tr_max, 0);
  mm.e_bm_plus = lm.add_var(0, kInf, -hour.pr_plus);
  mm.e_bm_minus = lm.add_var(0, kInf, hour.pr_minus);
  mm.alpha_s = lm.add_var(mm.alpha_lo, mm.alpha_hi, 0);
  mm.alpha_b = lm.add_var(mm.alpha_lo, mm.alpha_hi, 0);
  mm.lambda = lm.add_var(mm.alpha_lo, mm.alpha_hi, 0);
  mm.mu_s_min = lm.add_var(0, mm.m_dual, 0);
  mm.mu_s_max = lm.add_var(0, mm.m_dual, 0);
  mm.mu_b_min = lm.add_var(0, mm.m_dual, 0);
  mm.mu_b_max = lm.add_var(0, mm.m_dual, 0);
  for (const auto& b : sup) {
    mm.e_o.push_back(lm.add_var(0, b.quantity, b.price));
    mm.mu_o_min.push_back(lm.add_var(0, mm.m_dual, 0));
    mm.mu_o_max.push_back(lm.add_var(0, mm.m_dual, b.quantity));
  }
  for (const auto& b : dem) {
    mm.e_d.push_back(lm.add_var(0, b.quantity, -b.price));
    mm.mu_d_min.push_back(lm.add_var(0, mm.m_dual, 0));
    mm.mu_d_max.push_back(lm.add_var(0, mm.m_dual, b.quantity));
  }
  mm.u_s_min = lm.add_var(0, 1, 0, true);
  mm.u_b_min = lm.add_var(0, 1, 0, true);
  mm.u_s_max = lm.add_var(0, 1, 0, true);
  mm.u_b_max = lm.add_var(0, 1, 0, true);
  for (size_t j = 0; j < sup.size(); ++j) {
    mm.u_o_min.push_back(lm.add_var(0, 1, 0, true));
    mm.u_o_max.push_back(lm.add_var(0, 1, 0, true));
  }
  for (size_t k = 0; k < dem.size(); ++k) {
    mm.u_d_min.push_back(lm.add_var(0, 1, 0, true));
    mm.u_d_max.push_back(lm.add_var(0, 1, 0, true));
  }

  // DSO energy balance across day-ahead and balancing positions:
  // surplus is sold at pr_plus, deficit bought back at pr_minus.
  lm.add_row(RowSense::eq, hour.generation - hour.load,
             {{mm.e_das, 1.0}, {mm.e_dab, -1.0}, {mm.e_bm_plus, 1.0}, {mm.e_bm_minus, -1.0}});
  // Transmission corridor between offered and bid caps.
  lm.add_row(RowSense::le, hour.tr_max, {{mm.e_das_max, 1.0}, {mm.e_dab_max, -1.0}});
  lm.add_row(RowSense::ge, -hour.tr_max, {{mm.e_das_max, 1.0}, {mm.e_dab_max, -1.0}});

  // Stationarity of the embedded clearing.
  lm.add_row(RowSense::eq, 0.0,
             {{mm.alpha_s, 1.0}, {mm.lambda, -1.0}, {mm.mu_s_max, 1.0}, {mm.mu_s_min, -1.0}});
  lm.add_row(RowSense::eq, 0.0,
             {{mm.alpha_b, -1.0}, {mm.lambda, 1.0}, {mm.mu_b_max, 1.0}, {mm.mu_b_min, -1.0}});
  for (size_t j = 0; j < sup.size(); ++j)
    lm.add_row(RowSense::eq, -sup[j].price,
               {{mm.lambda, -1.0}, {mm.mu_o_max[j], 1.0}, {mm.mu_o_min[j], -1.0}});
  for (size_t k = 0; k < dem.size(); ++k)
    lm.add_row(RowSense::eq, dem[k].price,
               {{mm.lambda, 1.0}, {mm.mu_d_max[k], 1.0}, {mm.mu_d_min[k], -1.0}});

  // Cleared supply equals cleared demand.
  {
    std::vector<std::pair<int, double>> bal{{mm.e_das, 1.0}, {mm.e_dab, -1.0}};
    for (int v : mm.e_o) bal.push_back({v, 1.0});
    for (int v : mm.e_d) bal.push_back({v, -1.0});
    lm.add_row(RowSense::eq, 0.0, bal);
  }

  // Dispatch within the DSO's own caps.
  lm.add_row(RowSense::le, 0.0, {{mm.e_das, 1.0}, {mm.e_das_max, -1.0}});
  lm.add_row(RowSense::le, 0.0, {{mm.e_dab, 1.0}, {mm.e_dab_max, -1.0}});

  // Complementarity pairs, one binary each: u = 1 frees the quantity and
  // pins the dual, u = 0 the other way around.
  auto comp_lower = [&](int evar, int mvar, int uvar) {
    lm.add_row(RowSense::le, 0.0, {{evar, 1.0}, {uvar, -mm.m_qty}});
    lm.add_row(RowSense::le, mm.m_dual, {{mvar, 1.0}, {uvar, mm.m_dual}});
  };
  auto comp_upper_var = [&](int evar, int capvar, int mvar, int uvar) {
    lm.add_row(RowSense::le, 0.0, {{capvar, 1.0}, {evar, -1.0}, {uvar, -mm.m_qty}});
    lm.add_row(RowSense::le, mm.m_dual, {{mvar, 1.0}, {uvar, mm.m_dual}});
  };
  auto comp_upper_const = [&](int evar, double cap, int mvar, int uvar) {
    // cap - e <= M*u, rewritten as -e - M*u <= -cap
    lm.add_row(RowSense::le, -cap, {{evar, -1.0}, {uvar, -mm.m_qty}});
    lm.add_row(RowSense::le, mm.m_dual, {{mvar, 1.0}, {uvar, mm.m_dual}});
  };
  comp_lower(mm.e_das, mm.mu_s_min, mm.u_s_min);
  comp_lower(mm.e_dab, mm.mu_b_min, mm.u_b_min);
  comp_upper_var(mm.e_das, mm.e_das_max, mm.mu_s_max, mm.u_s_max);
  comp_upper_var(mm.e_dab, mm.e_dab_max, mm.mu_b_max, mm.u_b_max);
  for (size_t j = 0; j < sup.size(); ++j) {
    comp_lower(mm.e_o[j], mm.mu_o_min[j], mm.u_o_min[j]);
    comp_upper_const(mm.e_o[j], sup[j].quantity, mm.mu_o_max[j], mm.u_o_max[j]);
  }
  for (size_t k = 0; k < dem.size(); ++k) {
    comp_lower(mm.e_d[k], mm.mu_d_min[k], mm.u_d_min[k]);
    comp_upper_const(mm.e_d[k], dem[k].quantity, mm.mu_d_max[k], mm.u_d_max[k]);
  }
  return mm;
}

namespace detail {

/// Cost of the upper-level objective for a cleared outcome, with the
/// balancing recourse chosen optimally from the energy balance.
inline double ul_cost(const HourInstance& h, double lambda, double e_das,
                      double e_dab, double* bm_plus = nullptr,
                      double* bm_minus = nullptr) {
  double resid = (h.generation - h.load) - e_das + e_dab;
  double plus = std::max(resid, 0.0);
  double minus = std::max(-resid, 0.0);
  if (bm_plus) *bm_plus = plus;
  if (bm_minus) *bm_minus = minus;
  return lambda * (e_dab - e_das) - h.pr_plus * plus + h.pr_minus * minus;
}

/// Assembles a full MILP point from a clearing outcome at fixed quotes;
/// returns an empty vector when the point fails model feasibility.
/// `verify` can be disabled when the caller still has columns to fill.
inline std::vector<double> milp_point_from_clearing(
    const MilpModel& mm, const ClearingResult& c, const DsoQuote& offer,
    const DsoQuote& bid, bool verify = true) {
  std::vector<double> x(mm.lm.num_vars(), 0.0);
  const double tol = 1e-9;
  x[mm.e_das] = c.e_das;
  x[mm.e_dab] = c.e_dab;
  x[mm.e_das_max] = offer.cap;
  x[mm.e_dab_max] = bid.cap;
  double resid = (mm.hour.generation - mm.hour.load) - c.e_das + c.e_dab;
  x[mm.e_bm_plus] = std::max(resid, 0.0);
  x[mm.e_bm_minus] = std::max(-resid, 0.0);
  x[mm.alpha_s] = std::clamp(offer.alpha, mm.alpha_lo, mm.alpha_hi);
  x[mm.alpha_b] = std::clamp(bid.alpha, mm.alpha_lo, mm.alpha_hi);
  x[mm.lambda] = c.lambda_da;
  x[mm.mu_s_min] = c.mu_s_min;
  x[mm.mu_s_max] = c.mu_s_max;
  x[mm.mu_b_min] = c.mu_b_min;
  x[mm.mu_b_max] = c.mu_b_max;
  auto set_u = [&](int uvar, double primal_gap, double dual) {
    x[uvar] = (primal_gap > tol || dual <= tol) ? 1.0 : 0.0;
  };
  set_u(mm.u_s_min, c.e_das, c.mu_s_min);
  set_u(mm.u_b_min, c.e_dab, c.mu_b_min);
  set_u(mm.u_s_max, offer.cap - c.e_das, c.mu_s_max);
  set_u(mm.u_b_max, bid.cap - c.e_dab, c.mu_b_max);
  for (size_t j = 0; j < mm.e_o.size(); ++j) {
    x[mm.e_o[j]] = c.supply_dispatch[j];
    x[mm.mu_o_min[j]] = c.mu_o_min[j];
    x[mm.mu_o_max[j]] = c.mu_o_max[j];
    set_u(mm.u_o_min[j], c.supply_dispatch[j], c.mu_o_min[j]);
    set_u(mm.u_o_max[j], mm.hour.supply.blocks[j].quantity - c.supply_dispatch[j],
          c.mu_o_max[j]);
  }
  for (size_t k = 0; k < mm.e_d.size(); ++k) {
    x[mm.e_d[k]] = c.demand_dispatch[k];
    x[mm.mu_d_min[k]] = c.mu_d_min[k];
    x[mm.mu_d_max[k]] = c.mu_d_max[k];
    set_u(mm.u_d_min[k], c.demand_dispatch[k], c.mu_d_min[k]);
    set_u(mm.u_d_max[k], mm.hour.demand.blocks[k].quantity - c.demand_dispatch[k],
          c.mu_d_max[k]);
  }
  if (verify) {
    if (mm.lm.row_residual(x) > 1e-7) return {};
    for (size_t v = 0; v < mm.lm.num_vars(); ++v)
      if (x[v] < mm.lm.lo[v] - 1e-7 || x[v] > mm.lm.hi[v] + 1e-7) return {};
  }
  return x;
}

/// Clearing-based primal heuristic: a few sensible quote candidates give
/// the branch-and-bound a strong incumbent up front.
inline std::vector<double> warm_start_candidate(const MilpModel& mm) {
  const HourInstance& h = mm.hour;
  std::vector<std::pair<DsoQuote, DsoQuote>> candidates;
  double net = h.generation - h.load;
  double sell_cap = std::min(h.g_cap, std::max(net, 0.0));
  double buy_cap = std::min(h.tr_max, std::max(-net, 0.0));
  candidates.push_back({{0, 0}, {0, 0}});
  candidates.push_back({{mm.alpha_lo, sell_cap}, {mm.alpha_hi, 0}});
  candidates.push_back({{mm.alpha_lo, 0}, {mm.alpha_hi, buy_cap}});
  candidates.push_back({{mm.alpha_lo, std::min(h.g_cap, h.generation)}, {mm.alpha_hi, 0}});

  std::vector<double> best;
  double best_cost = kInf;
  for (const auto& [offer, bid] : candidates) {
    ClearingResult c;
    try {
      c = solve_clearing(h.supply, h.demand, offer, bid);
    } catch (const Error&) {
      continue;
    }
    auto x = milp_point_from_clearing(mm, c, offer, bid);
    if (x.empty()) continue;
    double cost = 0;
    for (size_t v = 0; v < x.size(); ++v) cost += mm.lm.obj[v] * x[v];
    if (cost < best_cost) {
      best_cost = cost;
      best = std::move(x);
    }
  }
  return best;
}

}  // namespace detail

/// Extracts the embedded clearing point (primal dispatch plus duals)
/// from a solved hourly model, for residual checks and reporting.
inline ClearingResult extract_clearing(const MilpModel& mm,
                                       const std::vector<double>& x) {
  ClearingResult c;
  c.lambda_da = x[mm.lambda];
  c.e_das = x[mm.e_das];
  c.e_dab = x[mm.e_dab];
  c.mu_s_min = x[mm.mu_s_min];
  c.mu_s_max = x[mm.mu_s_max];
  c.mu_b_min = x[mm.mu_b_min];
  c.mu_b_max = x[mm.mu_b_max];
  for (size_t j = 0; j < mm.e_o.size(); ++j) {
    c.supply_dispatch.push_back(x[mm.e_o[j]]);
    c.mu_o_min.push_back(x[mm.mu_o_min[j]]);
    c.mu_o_max.push_back(x[mm.mu_o_max[j]]);
  }
  for (size_t k = 0; k < mm.e_d.size(); ++k) {
    c.demand_dispatch.push_back(x[mm.e_d[k]]);
    c.mu_d_min.push_back(x[mm.mu_d_min[k]]);
    c.mu_d_max.push_back(x[mm.mu_d_max[k]]);
  }
  double welfare = x[mm.alpha_b] * c.e_dab - x[mm.alpha_s] * c.e_das;
  for (size_t j = 0; j < mm.e_o.size(); ++j)
    welfare -= mm.hour.supply.blocks[j].price * c.supply_dispatch[j];
  for (size_t k = 0; k < mm.e_d.size(); ++k)
    welfare += mm.hour.demand.blocks[k].price * c.demand_dispatch[k];
  c.welfare = welfare;
  return c;
}

inline HourDecision solve_da_deterministic(const MilpModel& mm) {
  MilpOptions opt;
  auto warm = detail::warm_start_candidate(mm);
  if (!warm.empty()) opt.warm_start = &warm;
  Solution s = solve_milp(mm.lm, opt);
  if (s.status == SolveStatus::infeasible)
    throw Error(Errc::infeasible, "day-ahead MILP infeasible");
  if (s.status == SolveStatus::unbounded)
    throw Error(Errc::unbounded_model, "day-ahead MILP unbounded");

  HourDecision d;
  d.status = s.status;
  d.bound = s.bound;
  d.objective = s.objective;
  d.e_das = s.x[mm.e_das];
  d.e_dab = s.x[mm.e_dab];
  d.e_das_max = s.x[mm.e_das_max];
  d.e_dab_max = s.x[mm.e_dab_max];
  d.alpha_s = s.x[mm.alpha_s];
  d.alpha_b = s.x[mm.alpha_b];
  d.lambda_da = s.x[mm.lambda];
  d.e_bm_plus = s.x[mm.e_bm_plus];
  d.e_bm_minus = s.x[mm.e_bm_minus];
  d.clearing = extract_clearing(mm, s.x);

  // The objective contains neither the quotes nor the DSO cap duals, so
  // the quote prices are only pinned by stationarity when the dispatch is
  // strictly interior. Among equivalent optima, report the market
  // convention: offer production at the clearing price, bid demand at
  // the price cap when the bid is fully dispatched.
  const double tol = 1e-9;
  if (d.e_das > tol) {
    d.alpha_s = d.lambda_da;
    d.clearing.mu_s_min = 0.0;
    d.clearing.mu_s_max = 0.0;
  }
  if (d.e_dab > tol) {
    if (d.e_dab >= d.e_dab_max - tol) {
      d.alpha_b = mm.alpha_hi;
      d.clearing.mu_b_max = mm.alpha_hi - d.lambda_da;
      d.clearing.mu_b_min = 0.0;
    } else {
      d.alpha_b = d.lambda_da;
      d.clearing.mu_b_max = 0.0;
      d.clearing.mu_b_min = 0.0;
    }
  }
  // Welfare of the embedded point changes with the canonical quotes.
  {
    double welfare = d.alpha_b * d.e_dab - d.alpha_s * d.e_das;
    for (size_t j = 0; j < mm.e_o.size(); ++j)
      welfare -= mm.hour.supply.blocks[j].price * d.clearing.supply_dispatch[j];
    for (size_t k = 0; k < mm.e_d.size(); ++k)
      welfare += mm.hour.demand.blocks[k].price * d.clearing.demand_dispatch[k];
    d.clearing.welfare = welfare;
  }
  return d;
}

/// Residual of the strong-duality linearization at a solved hour:
/// checks both the dual-objective identity of the embedded clearing and
/// the linearized revenue identity used in the objective.
inline double verify_duality_identity(const HourDecision& d, const HourInstance& h) {
  const auto& c = d.clearing;
  double lhs = d.lambda_da * (d.e_dab - d.e_das);
  double rhs = 0;
  for (size_t j = 0; j < h.supply.blocks.size(); ++j)
    rhs += h.supply.blocks[j].price * c.supply_dispatch[j] +
           c.mu_o_max[j] * h.supply.blocks[j].quantity;
  for (size_t k = 0; k < h.demand.blocks.size(); ++k)
    rhs += -h.demand.blocks[k].price * c.demand_dispatch[k] +
           c.mu_d_max[k] * h.demand.blocks[k].quantity;
  double identity = std::abs(lhs - rhs);

  double welfare = d.alpha_b * d.e_dab - d.alpha_s * d.e_das;
  for (size_t j = 0; j < h.supply.blocks.size(); ++j)
    welfare -= h.supply.blocks[j].price * c.supply_dispatch[j];
  for (size_t k = 0; k < h.demand.blocks.size(); ++k)
    welfare += h.demand.blocks[k].price * c.demand_dispatch[k];
  double dual_obj = c.mu_s_max * d.e_das_max + c.mu_b_max * d.e_dab_max;
  for (size_t j = 0; j < h.supply.blocks.size(); ++j)
    dual_obj += c.mu_o_max[j] * h.supply.blocks[j].quantity;
  for (size_t k = 0; k < h.demand.blocks.size(); ++k)
    dual_obj += c.mu_d_max[k] * h.demand.blocks[k].quantity;
  double strong_duality = std::abs(welfare - dual_obj);
  return std::max(identity, strong_duality);
}

/// Candidate grids for the enumeration oracle, one axis per decision.
struct OracleGrid {
  std::vector<double> cap_s, cap_b, alpha_s, alpha_b;
};

struct OracleResult {
  double objective = kInf;
  DsoQuote offer, bid;
  ClearingResult clearing;
  double e_bm_plus = 0, e_bm_minus = 0;
};

inline OracleResult enumeration_oracle(const HourInstance& h, const OracleGrid& g) {
  size_t per_side = std::max(h.supply.blocks.size(), h.demand.blocks.size());
  if (per_side > 8)
    throw Error(Errc::grid_too_large, "oracle limited to <= 8 blocks per side");
  for (const auto* axis : {&g.cap_s, &g.cap_b, &g.alpha_s, &g.alpha_b})
    if (axis->empty() || axis->size() > 50)
      throw Error(Errc::grid_too_large, "each decision axis needs 1..50 points");

  OracleResult best;
  for (double cs : g.cap_s) {
    if (cs < 0 || cs > h.g_cap + 1e-12) continue;
    for (double cb : g.cap_b) {
      if (cb < 0 || std::abs(cs - cb) > h.tr_max + 1e-12) continue;
      for (double as : g.alpha_s) {
        for (double ab : g.alpha_b) {
          DsoQuote offer{as, cs}, bid{ab, cb};
          ClearingResult c = solve_clearing(h.supply, h.demand, offer, bid);
          double bp, bm;
          double cost = detail::ul_cost(h, c.lambda_da, c.e_das, c.e_dab, &bp, &bm);
          if (cost < best.objective - 1e-12) {
            best.objective = cost;
            best.offer = offer;
            best.bid = bid;
            best.clearing = c;
            best.e_bm_plus = bp;
            best.e_bm_minus = bm;
          }
        }
      }
    }
  }
  if (!std::isfinite(best.objective))
    throw Error(Errc::infeasible, "oracle grid had no feasible candidate");
  return best;
}

inline DaDecision solve_da_day(const std::vector<HourInstance>& hours) {
  DaDecision day;
  for (const auto& h : hours) {
    MilpModel mm = build_milp(h);
    day.hours.push_back(solve_da_deterministic(mm));
    day.objective += day.hours.back().objective;
  }
  return day;
}

inline void write_da_csv(const std::string& path, const DaDecision& day) {
  CsvWriter w(path, {"hour", "E_das_mwh", "E_dab_mwh", "E_das_max", "E_dab_max",
                     "alpha_s", "alpha_b", "lambda_da", "E_bm_plus", "E_bm_minus"});
  for (size_t t = 0; t < day.hours.size(); ++t) {
    const auto& d = day.hours[t];
    w.row({fmt_num((long long)t), fmt_num(d.e_das), fmt_num(d.e_dab),
           fmt_num(d.e_das_max), fmt_num(d.e_dab_max), fmt_num(d.alpha_s),
           fmt_num(d.alpha_b), fmt_num(d.lambda_da), fmt_num(d.e_bm_plus),
           fmt_num(d.e_bm_minus)});
  }
}

inline DaDecision load_da_csv(const std::string& path) {
  CsvTable t = read_csv(path);
  DaDecision day;
  int ch = t.require_column("hour", path);
  int cs = t.require_column("E_das_mwh", path);
  int cb = t.require_column("E_dab_mwh", path);
  int csm = t.require_column("E_das_max", path);
  int cbm = t.require_column("E_dab_max", path);
  int cas = t.require_column("alpha_s", path);
  int cab = t.require_column("alpha_b", path);
  int cl = t.require_column("lambda_da", path);
  int cp = t.require_column("E_bm_plus", path);
  int cm = t.require_column("E_bm_minus", path);
  day.hours.resize(t.rows.size());
  for (const auto& r : t.rows) {
    int hour = static_cast<int>(parse_int(r[ch], path));
    if (hour < 0 || hour >= static_cast<int>(day.hours.size()))
      throw Error(Errc::bad_value, "non-contiguous hours in " + path);
    HourDecision& d = day.hours[hour];
    d.e_das = parse_num(r[cs], path);
    d.e_dab = parse_num(r[cb], path);
    d.e_das_max = parse_num(r[csm], path);
    d.e_dab_max = parse_num(r[cbm], path);
    d.alpha_s = parse_num(r[cas], path);
    d.alpha_b = parse_num(r[cab], path);
    d.lambda_da = parse_num(r[cl], path);
    d.e_bm_plus = parse_num(r[cp], path);
    d.e_bm_minus = parse_num(r[cm], path);
  }
  return day;
}

}  // namespace dermarket
