// Hourly market clearing: welfare-maximizing dispatch of stepwise
// supply/demand curves plus the DSO's price-quantity quotes, with the
// clearing price taken from the balance-constraint dual. A residual
// checker for the clearing optimality conditions doubles as a
// validation oracle for the day-ahead MILP.
#pragma once

#include <cmath>
#include <vector>

#include "dermarket/error.hpp"
#include "dermarket/market.hpp"
#include "dermarket/solver.hpp"

namespace dermarket {

/// DSO offer or bid: a price and a quantity cap for one hour.
struct DsoQuote {
  double alpha = 0.0;  // EUR/MWh
  double cap = 0.0;    // MWh
};

struct ClearingResult {
  double lambda_da = 0.0;
  double e_das = 0.0;  // dispatched DSO supply
  double e_dab = 0.0;  // dispatched DSO demand
  std::vector<double> supply_dispatch;
  std::vector<double> demand_dispatch;
  // Duals of the quantity bounds, one pair per entity.
  double mu_s_min = 0.0, mu_s_max = 0.0;
  double mu_b_min = 0.0, mu_b_max = 0.0;
  std::vector<double> mu_o_min, mu_o_max;
  std::vector<double> mu_d_min, mu_d_max;
  double welfare = 0.0;
  /// Set when the optimal vertex is degenerate (a marginal quantity sits
  /// exactly at a bound), i.e. the clearing price may be nonunique.
  bool degenerate = false;
};

namespace detail {
inline void check_curve_inputs(const BlockCurve& c) {
  for (const auto& b : c.blocks) {
    if (!std::isfinite(b.price)) throw Error(Errc::non_finite_price, "clearing input");
    if (!(b.quantity >= 0)) throw Error(Errc::bad_value, "negative block quantity");
  }
}
}  // namespace detail

/// Clears one hour. Curves may be empty (e.g. the DSO faces no rival
/// supply); a zero-trade outcome is always feasible.
inline ClearingResult solve_clearing(const BlockCurve& supply,
                                     const BlockCurve& demand,
                                     const DsoQuote& offer,
                                     const DsoQuote& bid) {
  detail::check_curve_inputs(supply);
  detail::check_curve_inputs(demand);
  if (!(offer.cap >= 0) || !(bid.cap >= 0))
    throw Error(Errc::bad_value, "DSO caps must be >= 0");

  const size_t nj = supply.blocks.size(), nm = demand.blocks.size();
  LinearModel m;
  m.sense = Sense::maximize;
  int vs = m.add_var(0, offer.cap, -offer.alpha);
  int vb = m.add_var(0, bid.cap, bid.alpha);
  std::vector<int> vo(nj), vd(nm);
  for (size_t j = 0; j < nj; ++j)
    vo[j] = m.add_var(0, supply.blocks[j].quantity, -supply.blocks[j].price);
  for (size_t k = 0; k < nm; ++k)
    vd[k] = m.add_var(0, demand.blocks[k].quantity, demand.blocks[k].price);

  std::vector<std::pair<int, double>> balance{{vb, 1.0}, {vs, -1.0}};
  for (size_t j = 0; j < nj; ++j) balance.push_back({vo[j], -1.0});
  for (size_t k = 0; k < nm; ++k) balance.push_back({vd[k], 1.0});
  m.add_row(RowSense::eq, 0.0, balance);

  Solution s = solve_lp(m);
  if (s.status == SolveStatus::unbounded)
    throw Error(Errc::unbounded_model, "clearing LP unbounded (malformed input)");
  if (s.status != SolveStatus::optimal)
    throw Error(Errc::infeasible, "clearing LP infeasible");

  ClearingResult r;
  r.lambda_da = s.row_dual[0];
  r.welfare = s.objective;
  r.e_das = s.x[vs];
  r.e_dab = s.x[vb];
  r.supply_dispatch.resize(nj);
  r.demand_dispatch.resize(nm);
  r.mu_o_min.resize(nj);
  r.mu_o_max.resize(nj);
  r.mu_d_min.resize(nm);
  r.mu_d_max.resize(nm);

  // Bound duals from reduced costs (maximize convention): at the lower
  // bound the reduced cost is <= 0 and mu_min = -rc; at the upper bound
  // it is >= 0 and mu_max = rc. Basic variables have rc = 0.
  auto mu_pair = [&](int var, double& mmin, double& mmax) {
    double rc = s.reduced_cost[var];
    mmin = std::max(0.0, -rc);
    mmax = std::max(0.0, rc);
  };
  mu_pair(vs, r.mu_s_min, r.mu_s_max);
  mu_pair(vb, r.mu_b_min, r.mu_b_max);
  for (size_t j = 0; j < nj; ++j) {
    r.supply_dispatch[j] = s.x[vo[j]];
    mu_pair(vo[j], r.mu_o_min[j], r.mu_o_max[j]);
  }
  for (size_t k = 0; k < nm; ++k) {
    r.demand_dispatch[k] = s.x[vd[k]];
    mu_pair(vd[k], r.mu_d_min[k], r.mu_d_max[k]);
  }

  // Degeneracy probe: a non-fixed variable resting on a bound with zero
  // reduced cost signals a dual interval (nonunique price).
  for (size_t v = 0; v < m.num_vars(); ++v) {
    if (m.lo[v] >= m.hi[v]) continue;
    bool at_bound = s.x[v] <= m.lo[v] + 1e-9 || s.x[v] >= m.hi[v] - 1e-9;
    if (at_bound && std::abs(s.reduced_cost[v]) <= 1e-9) {
      r.degenerate = true;
      break;
    }
  }
  return r;
}

struct ResidualReport {
  double stationarity = 0.0;
  double complementarity = 0.0;
  double balance = 0.0;
  double max() const { return std::max(stationarity, std::max(complementarity, balance)); }
};

/// Residuals of the clearing optimality conditions at a candidate
/// primal/dual point. A valid optimum yields all three <= 1e-6.
inline ResidualReport kkt_residuals(const ClearingResult& r,
                                    const BlockCurve& supply,
                                    const BlockCurve& demand,
                                    const DsoQuote& offer,
                                    const DsoQuote& bid) {
  const size_t nj = supply.blocks.size(), nm = demand.blocks.size();
  if (r.supply_dispatch.size() != nj || r.demand_dispatch.size() != nm ||
      r.mu_o_min.size() != nj || r.mu_o_max.size() != nj ||
      r.mu_d_min.size() != nm || r.mu_d_max.size() != nm)
    throw Error(Errc::dimension_mismatch, "kkt_residuals: result vs inputs");

  ResidualReport rep;
  auto stat = [&](double v) { rep.stationarity = std::max(rep.stationarity, std::abs(v)); };
  stat(offer.alpha - r.lambda_da + r.mu_s_max - r.mu_s_min);
  stat(-bid.alpha + r.lambda_da + r.mu_b_max - r.mu_b_min);
  for (size_t j = 0; j < nj; ++j)
    stat(supply.blocks[j].price - r.lambda_da + r.mu_o_max[j] - r.mu_o_min[j]);
  for (size_t k = 0; k < nm; ++k)
    stat(-demand.blocks[k].price + r.lambda_da + r.mu_d_max[k] - r.mu_d_min[k]);

  auto comp = [&](double primal, double dual) {
    double v = std::max({-primal, -dual, std::abs(primal * dual)});
    rep.complementarity = std::max(rep.complementarity, std::max(0.0, v));
  };
  comp(r.e_das, r.mu_s_min);
  comp(offer.cap - r.e_das, r.mu_s_max);
  comp(r.e_dab, r.mu_b_min);
  comp(bid.cap - r.e_dab, r.mu_b_max);
  for (size_t j = 0; j < nj; ++j) {
    comp(r.supply_dispatch[j], r.mu_o_min[j]);
    comp(supply.blocks[j].quantity - r.supply_dispatch[j], r.mu_o_max[j]);
  }
  for (size_t k = 0; k < nm; ++k) {
    comp(r.demand_dispatch[k], r.mu_d_min[k]);
    comp(demand.blocks[k].quantity - r.demand_dispatch[k], r.mu_d_max[k]);
  }

  double bal = r.e_das - r.e_dab;
  for (size_t j = 0; j < nj; ++j) bal += r.supply_dispatch[j];
  for (size_t k = 0; k < nm; ++k) bal -= r.demand_dispatch[k];
  rep.balance = std::abs(bal);
  return rep;
}

}  // namespace dermarket
