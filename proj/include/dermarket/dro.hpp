// Distributionally robust day-ahead layer: moment ambiguity sets
// estimated from forecast-error samples, affine (linear decision rule)
// balancing recourse over a lifted uncertainty set, and the robust
// counterpart solved by constraint generation. The separation step
// extremizes affine functions over the lifted set exactly, so the
// generated cuts converge to the true worst-case expectation; a
// sample-supported moment LP provides the matching lower-bound oracle.
#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "dermarket/bilevel.hpp"
#include "dermarket/csv.hpp"
#include "dermarket/error.hpp"
#include "dermarket/solver.hpp"

namespace dermarket {

/// Per-hour moment bounds and support of the forecast-error family.
struct AmbiguityHour {
  double zeta1 = 0;      // bound on E|delta|, MWh
  double zeta2 = 0;      // bound on E[delta^2], MWh^2
  double delta_min = 0;  // support, MWh
  double delta_max = 0;
  double u1_max = 0;
  double u2_max = 0;

  void validate() const {
    const double tol = 1e-9;
    if (!(delta_min <= tol) || !(delta_max >= -tol))
      throw Error(Errc::bad_value, "ambiguity support must contain zero");
    if (zeta1 < -tol || zeta2 < -tol)
      throw Error(Errc::bad_value, "moment bounds must be nonnegative");
    double umax1 = std::max(delta_max, -delta_min);
    double umax2 = std::max(delta_min * delta_min, delta_max * delta_max);
    if (zeta1 > umax1 + tol || zeta2 > umax2 + tol)
      throw Error(Errc::bad_value, "moment bounds exceed the support range");
    if (std::abs(u1_max - umax1) > tol || std::abs(u2_max - umax2) > tol)
      throw Error(Errc::bad_value, "lifted bounds inconsistent with support");
  }

  AmbiguityHour scaled(double factor) const {
    AmbiguityHour a;
    a.zeta1 = zeta1 * factor;
    a.zeta2 = zeta2 * factor * factor;
    a.delta_min = delta_min * factor;
    a.delta_max = delta_max * factor;
    a.u1_max = std::max(a.delta_max, -a.delta_min);
    a.u2_max = std::max(a.delta_min * a.delta_min, a.delta_max * a.delta_max);
    return a;
  }

  bool is_degenerate() const {
    return zeta1 <= 0 && zeta2 <= 0 && delta_min >= -1e-15 && delta_max <= 1e-15;
  }
};

struct AmbiguitySet {
  std::vector<AmbiguityHour> hours;
};

/// Sample moments after per-hour mean-centering. Requires at least two
/// samples per hour; support and lifted bounds come from the centered
/// sample extremes.
inline AmbiguitySet estimate_ambiguity(
    const std::vector<std::vector<double>>& samples_per_hour) {
  AmbiguitySet set;
  for (size_t t = 0; t < samples_per_hour.size(); ++t) {
    const auto& raw = samples_per_hour[t];
    if (raw.size() < 2)
      throw Error(Errc::empty_samples,
                  "hour " + std::to_string(t) + " needs >= 2 samples");
    double mean = 0;
    for (double d : raw) mean += d;
    mean /= static_cast<double>(raw.size());
    AmbiguityHour a;
    a.delta_min = kInf;
    a.delta_max = -kInf;
    for (double d : raw) {
      double c = d - mean;
      a.zeta1 += std::abs(c);
      a.zeta2 += c * c;
      a.delta_min = std::min(a.delta_min, c);
      a.delta_max = std::max(a.delta_max, c);
    }
    a.zeta1 /= static_cast<double>(raw.size());
    a.zeta2 /= static_cast<double>(raw.size());
    a.u1_max = std::max(a.delta_max, -a.delta_min);
    a.u2_max = std::max(a.delta_min * a.delta_min, a.delta_max * a.delta_max);
    a.validate();
    set.hours.push_back(a);
  }
  return set;
}

/// A point of the lifted uncertainty set W.
struct LiftedPoint {
  double delta = 0, u1 = 0, u2 = 0;
};

/// f(delta,u1,u2) = c0 + c_delta*delta + c_u1*u1 + c_u2*u2.
struct AffineRecourse {
  double c0 = 0, c_delta = 0, c_u1 = 0, c_u2 = 0;
  double eval(const LiftedPoint& w) const {
    return c0 + c_delta * w.delta + c_u1 * w.u1 + c_u2 * w.u2;
  }
};

struct ExtremeResult {
  double value = 0;
  LiftedPoint point;
};

/// Exact extremum of an affine function over
///   W = { delta in [dmin,dmax], |delta| <= u1 <= u1max, delta^2 <= u2 <= u2max }.
/// For fixed delta the optimum in (u1,u2) is at a face chosen by the
/// coefficient signs; on each sign branch of delta the reduced function
/// is quadratic, so the extreme lies at a support endpoint, at zero, or
/// at the branch's stationary point.
inline ExtremeResult extremize_lifted(const AffineRecourse& f,
                                      const AmbiguityHour& amb, bool maximize) {
  auto face_u1 = [&](double delta) {
    bool top = maximize ? (f.c_u1 > 0) : (f.c_u1 < 0);
    return top ? amb.u1_max : std::abs(delta);
  };
  auto face_u2 = [&](double delta) {
    bool top = maximize ? (f.c_u2 > 0) : (f.c_u2 < 0);
    return top ? amb.u2_max : delta * delta;
  };

  std::vector<double> candidates{amb.delta_min, amb.delta_max, 0.0};
  bool u1_on_curve = maximize ? (f.c_u1 <= 0) : (f.c_u1 >= 0);
  bool u2_on_curve = maximize ? (f.c_u2 <= 0) : (f.c_u2 >= 0);
  double quad = u2_on_curve ? f.c_u2 : 0.0;
  if (quad != 0.0) {
    double lin_pos = f.c_delta + (u1_on_curve ? f.c_u1 : 0.0);
    double lin_neg = f.c_delta - (u1_on_curve ? f.c_u1 : 0.0);
    double s_pos = -lin_pos / (2 * quad);
    double s_neg = -lin_neg / (2 * quad);
    if (s_pos > 0 && s_pos < amb.delta_max) candidates.push_back(s_pos);
    if (s_neg < 0 && s_neg > amb.delta_min) candidates.push_back(s_neg);
  }

  ExtremeResult best;
  bool first = true;
  for (double d : candidates) {
    LiftedPoint w{d, face_u1(d), face_u2(d)};
    double v = f.eval(w);
    if (first || (maximize ? v > best.value : v < best.value)) {
      best = {v, w};
      first = false;
    }
  }
  return best;
}

inline bool point_in_lifted_set(const LiftedPoint& w, const AmbiguityHour& a,
                                double tol = 1e-9) {
  if (w.delta < a.delta_min - tol || w.delta > a.delta_max + tol) return false;
  if (w.u1 < std::abs(w.delta) - tol || w.u1 > a.u1_max + tol) return false;
  if (w.u2 < w.delta * w.delta - tol || w.u2 > a.u2_max + tol) return false;
  return true;
}

struct MomentLpResult {
  double value = 0;
  std::vector<double> weights;
  // duals of (normalization, zero-mean, E[u1] <= zeta1, E[u2] <= zeta2)
  double r = 0, s = 0, t1 = 0, t2 = 0;
};

/// Maximizes E[f] over probability weights on the given atoms subject to
/// the moment constraints. Lower-bounds the worst-case expectation.
inline MomentLpResult sample_support_oracle(const AffineRecourse& f,
                                            const AmbiguityHour& amb,
                                            const std::vector<LiftedPoint>& atoms) {
  if (atoms.empty())
    throw Error(Errc::empty_samples, "oracle needs at least one support point");
  for (const auto& w : atoms)
    if (!point_in_lifted_set(w, amb))
      throw Error(Errc::bad_value, "oracle atom outside the lifted set");

  LinearModel m;
  m.sense = Sense::maximize;
  std::vector<int> wv;
  for (const auto& w : atoms) wv.push_back(m.add_var(0, kInf, f.eval(w)));
  std::vector<std::pair<int, double>> norm, mean, m1, m2;
  for (size_t i = 0; i < atoms.size(); ++i) {
    norm.push_back({wv[i], 1.0});
    mean.push_back({wv[i], atoms[i].delta});
    m1.push_back({wv[i], atoms[i].u1});
    m2.push_back({wv[i], atoms[i].u2});
  }
  int row_norm = m.add_row(RowSense::eq, 1.0, norm);
  int row_mean = m.add_row(RowSense::eq, 0.0, mean);
  int row_m1 = m.add_row(RowSense::le, amb.zeta1, m1);
  int row_m2 = m.add_row(RowSense::le, amb.zeta2, m2);

  Solution s = solve_lp(m);
  if (s.status == SolveStatus::infeasible)
    throw Error(Errc::infeasible_moments,
                "atoms cannot satisfy the moment constraints");
  if (s.status != SolveStatus::optimal)
    throw Error(Errc::bad_value, "moment LP did not solve");
  MomentLpResult out;
  out.value = s.objective;
  out.weights = s.x;
  out.r = s.row_dual[row_norm];
  out.s = s.row_dual[row_mean];
  out.t1 = std::max(0.0, s.row_dual[row_m1]);
  out.t2 = std::max(0.0, s.row_dual[row_m2]);
  return out;
}

inline std::vector<LiftedPoint> initial_lifted_points(const AmbiguityHour& a) {
  auto curve = [](double d) { return LiftedPoint{d, std::abs(d), d * d}; };
  std::vector<LiftedPoint> pts{curve(0.0), curve(a.delta_min), curve(a.delta_max),
                               {0.0, a.u1_max, a.u2_max},
                               {a.delta_min, a.u1_max, a.u2_max},
                               {a.delta_max, a.u1_max, a.u2_max}};
  return pts;
}

struct WceResult {
  double value = 0;
  std::vector<LiftedPoint> support;
  int iterations = 0;
};

/// Worst-case expectation of an affine recourse objective over the
/// moment ambiguity set, by cutting planes on the moment-dual
/// certificate with exact separation.
inline WceResult worst_case_expectation(const AffineRecourse& f,
                                        const AmbiguityHour& amb,
                                        double tol = 1e-7, int max_iter = 200) {
  amb.validate();
  WceResult out;
  out.support = initial_lifted_points(amb);
  double prev_viol = kInf;
  int stalled = 0;
  for (int it = 0; it < max_iter; ++it) {
    out.iterations = it + 1;
    MomentLpResult lp = sample_support_oracle(f, amb, out.support);
    out.value = lp.value;
    AffineRecourse gap{f.c0 - lp.r, f.c_delta - lp.s, f.c_u1 - lp.t1,
                       f.c_u2 - lp.t2};
    ExtremeResult sep = extremize_lifted(gap, amb, /*maximize=*/true);
    if (sep.value <= tol) return out;
    if (sep.value >= prev_viol - 1e-12) {
      if (++stalled >= 10)
        throw Error(Errc::separation_stalled,
                    "violation stopped decreasing at " + std::to_string(sep.value));
    } else {
      stalled = 0;
    }
    prev_viol = sep.value;
    out.support.push_back(sep.point);
  }
  throw Error(Errc::separation_stalled, "iteration cap reached");
}

/// Linear-decision-rule coefficients for one hour: surplus recourse
/// k(w) = k0 + k1 d + k2 u1 + k3 u2, deficit recourse l(w) likewise.
struct LdrPolicyHour {
  double k[4] = {0, 0, 0, 0};
  double l[4] = {0, 0, 0, 0};
};

struct LdrPolicy {
  std::vector<LdrPolicyHour> hours;
};

/// Variable handles of the robust recourse structure added to an hourly
/// model. k0/l0 reuse the scalar balancing columns, so the energy
/// balance row doubles as the constant coefficient-matching condition.
struct LdrVars {
  int k0 = -1, k1 = -1, k2 = -1, k3 = -1;
  int l0 = -1, l1 = -1, l2 = -1, l3 = -1;
  int r = -1, s = -1, t1 = -1, t2 = -1;
};

/// Adds the LDR coefficient-matching conditions and the worst-case
/// certificate variables to a deterministic hourly model. The balancing
/// cost moves from the scalar recourse columns into r + zeta't.
inline LdrVars build_ldr_constraints(MilpModel& mm, const AmbiguityHour& amb) {
  LinearModel& lm = mm.lm;
  LdrVars v;
  v.k0 = mm.e_bm_plus;
  v.l0 = mm.e_bm_minus;
  lm.obj[v.k0] = 0;
  lm.obj[v.l0] = 0;
  lm.hi[v.k0] = mm.m_qty + amb.u1_max;
  lm.hi[v.l0] = mm.m_qty + amb.u1_max;
  // Slope safeguards: optimal rules have unit-scale slopes (the realized
  // surplus tracks the error one-for-one), so a generous box keeps the
  // partially-cut master bounded without touching the optimum.
  double s1 = 16.0;
  double s2 = 16.0 / std::max(amb.u1_max, 1e-6);
  v.k1 = lm.add_var(-s1, s1, 0);
  v.k2 = lm.add_var(-s1, s1, 0);
  v.k3 = lm.add_var(-s2, s2, 0);
  v.l1 = lm.add_var(-s1, s1, 0);
  v.l2 = lm.add_var(-s1, s1, 0);
  v.l3 = lm.add_var(-s2, s2, 0);
  v.r = lm.add_var(-kInf, kInf, 1.0);
  v.s = lm.add_var(-kInf, kInf, 0);
  v.t1 = lm.add_var(0, kInf, amb.zeta1);
  v.t2 = lm.add_var(0, kInf, amb.zeta2);

  // Almost-sure balance under the rule: matching the delta coefficient
  // (the realized surplus tracks the error one-for-one) and the lifted
  // coefficients. The constant part is the existing balance row.
  lm.add_row(RowSense::eq, 1.0, {{v.k1, 1.0}, {v.l1, -1.0}});
  lm.add_row(RowSense::eq, 0.0, {{v.k2, 1.0}, {v.l2, -1.0}});
  lm.add_row(RowSense::eq, 0.0, {{v.k3, 1.0}, {v.l3, -1.0}});
  return v;
}

/// Registers one lifted point: certificate dominance of the balancing
/// cost plus robust nonnegativity of both recourse rules at that point.
inline void add_lifted_point_cuts(MilpModel& mm, const LdrVars& v,
                                  const HourInstance& hour, const LiftedPoint& w) {
  LinearModel& lm = mm.lm;
  // r + s d + t1 u1 + t2 u2 >= pr_minus*l(w) - pr_plus*k(w)
  std::vector<std::pair<int, double>> cert{
      {v.r, 1.0},
      {v.s, w.delta},
      {v.t1, w.u1},
      {v.t2, w.u2},
      {v.l0, -hour.pr_minus},
      {v.l1, -hour.pr_minus * w.delta},
      {v.l2, -hour.pr_minus * w.u1},
      {v.l3, -hour.pr_minus * w.u2},
      {v.k0, hour.pr_plus},
      {v.k1, hour.pr_plus * w.delta},
      {v.k2, hour.pr_plus * w.u1},
      {v.k3, hour.pr_plus * w.u2}};
  lm.add_row(RowSense::ge, 0.0, cert);
  lm.add_row(RowSense::ge, 0.0, {{v.k0, 1.0}, {v.k1, w.delta}, {v.k2, w.u1}, {v.k3, w.u2}});
  lm.add_row(RowSense::ge, 0.0, {{v.l0, 1.0}, {v.l1, w.delta}, {v.l2, w.u1}, {v.l3, w.u2}});
}

struct DroHourResult {
  HourDecision decision;
  LdrPolicyHour policy;
  int cut_rounds = 0;
  double worst_case_bm_cost = 0;  // r + zeta1 t1 + zeta2 t2
};

namespace detail {

inline std::vector<double> dro_warm_start(const MilpModel& mm, const LdrVars& v,
                                          const AmbiguityHour& amb,
                                          const std::vector<LiftedPoint>& pts) {
  // Zero-trade policy: hold the forecast position, absorb the error with
  // k(delta) = k0 + delta, l constant.
  const HourInstance& h = mm.hour;
  ClearingResult c;
  try {
    c = solve_clearing(h.supply, h.demand, {0, 0}, {0, 0});
  } catch (const Error&) {
    return {};
  }
  auto x = milp_point_from_clearing(mm, c, {0, 0}, {0, 0}, /*verify=*/false);
  if (x.empty()) return {};
  double net = h.generation - h.load;
  double k0 = std::max(net, -amb.delta_min);
  double l0 = k0 - net;
  x[v.k0] = k0;
  x[v.l0] = l0;
  x[v.k1] = 1.0;
  x[v.l1] = 0.0;
  double r = -kInf;
  for (const auto& w : pts) {
    double lw = l0;
    double kw = k0 + w.delta;
    r = std::max(r, h.pr_minus * lw - h.pr_plus * kw);
  }
  x[v.r] = r;
  if (mm.lm.row_residual(x) > 1e-7) return {};
  for (size_t j = 0; j < mm.lm.num_vars(); ++j)
    if (x[j] < mm.lm.lo[j] - 1e-7 || x[j] > mm.lm.hi[j] + 1e-7) return {};
  return x;
}

}  // namespace detail

/// Robust counterpart of one day-ahead hour: constraint generation over
/// lifted points, master solved as a MILP each round.
inline DroHourResult solve_da_dro_hour(const HourInstance& hour,
                                       const AmbiguityHour& amb,
                                       double tol = 1e-7, int max_rounds = 200) {
  amb.validate();
  MilpModel mm = build_milp(hour);
  LdrVars v = build_ldr_constraints(mm, amb);
  std::vector<LiftedPoint> pts = initial_lifted_points(amb);
  for (const auto& w : pts) add_lifted_point_cuts(mm, v, hour, w);

  DroHourResult out;
  double prev_viol = kInf;
  int stalled = 0;
  for (int round = 0; round < max_rounds; ++round) {
    out.cut_rounds = round + 1;
    MilpOptions opt;
    auto warm = detail::dro_warm_start(mm, v, amb, pts);
    if (!warm.empty()) opt.warm_start = &warm;
    Solution s = solve_milp(mm.lm, opt);
    if (s.status == SolveStatus::infeasible)
      throw Error(Errc::infeasible, "robust day-ahead master infeasible");
    if (s.status == SolveStatus::unbounded)
      throw Error(Errc::unbounded_model, "robust day-ahead master unbounded");

    double k[4] = {s.x[v.k0], s.x[v.k1], s.x[v.k2], s.x[v.k3]};
    double l[4] = {s.x[v.l0], s.x[v.l1], s.x[v.l2], s.x[v.l3]};
    AffineRecourse cost_gap{
        hour.pr_minus * l[0] - hour.pr_plus * k[0] - s.x[v.r],
        hour.pr_minus * l[1] - hour.pr_plus * k[1] - s.x[v.s],
        hour.pr_minus * l[2] - hour.pr_plus * k[2] - s.x[v.t1],
        hour.pr_minus * l[3] - hour.pr_plus * k[3] - s.x[v.t2]};
    ExtremeResult viol_cost = extremize_lifted(cost_gap, amb, true);
    AffineRecourse krule{k[0], k[1], k[2], k[3]};
    AffineRecourse lrule{l[0], l[1], l[2], l[3]};
    ExtremeResult min_k = extremize_lifted(krule, amb, false);
    ExtremeResult min_l = extremize_lifted(lrule, amb, false);

    double worst = std::max({viol_cost.value, -min_k.value, -min_l.value});
    if (worst <= tol) {
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
      const double qtol = 1e-9;
      if (d.e_das > qtol) {
        d.alpha_s = d.lambda_da;
        d.clearing.mu_s_min = 0.0;
        d.clearing.mu_s_max = 0.0;
      }
      if (d.e_dab > qtol) {
        if (d.e_dab >= d.e_dab_max - qtol) {
          d.alpha_b = mm.alpha_hi;
          d.clearing.mu_b_max = mm.alpha_hi - d.lambda_da;
          d.clearing.mu_b_min = 0.0;
        } else {
          d.alpha_b = d.lambda_da;
          d.clearing.mu_b_max = 0.0;
          d.clearing.mu_b_min = 0.0;
        }
      }
      out.decision = d;
      for (int i = 0; i < 4; ++i) {
        out.policy.k[i] = k[i];
        out.policy.l[i] = l[i];
      }
      out.worst_case_bm_cost =
          s.x[v.r] + amb.zeta1 * s.x[v.t1] + amb.zeta2 * s.x[v.t2];
      return out;
    }
    if (worst >= prev_viol - 1e-12) {
      if (++stalled >= 10)
        throw Error(Errc::separation_stalled,
                    "master violation stopped decreasing at " + std::to_string(worst));
    } else {
      stalled = 0;
    }
    prev_viol = worst;
    if (viol_cost.value > tol) {
      pts.push_back(viol_cost.point);
      add_lifted_point_cuts(mm, v, hour, viol_cost.point);
    }
    if (-min_k.value > tol) {
      pts.push_back(min_k.point);
      add_lifted_point_cuts(mm, v, hour, min_k.point);
    }
    if (-min_l.value > tol && !(min_l.point.delta == min_k.point.delta &&
                                min_l.point.u1 == min_k.point.u1 &&
                                min_l.point.u2 == min_k.point.u2)) {
      pts.push_back(min_l.point);
      add_lifted_point_cuts(mm, v, hour, min_l.point);
    }
  }
  throw Error(Errc::separation_stalled, "cut rounds exhausted");
}

struct DroDayResult {
  DaDecision decision;
  LdrPolicy policy;
};

inline DroDayResult solve_da_dro(const std::vector<HourInstance>& hours,
                                 const AmbiguitySet& amb) {
  if (amb.hours.size() != hours.size())
    throw Error(Errc::dimension_mismatch, "ambiguity hours vs instance hours");
  DroDayResult out;
  for (size_t t = 0; t < hours.size(); ++t) {
    DroHourResult r = solve_da_dro_hour(hours[t], amb.hours[t]);
    out.decision.hours.push_back(r.decision);
    out.decision.objective += r.decision.objective;
    out.policy.hours.push_back(r.policy);
  }
  return out;
}

inline void write_ldr_csv(const std::string& path, const LdrPolicy& p) {
  CsvWriter w(path, {"hour", "k0", "k1", "k2", "k3", "l0", "l1", "l2", "l3"});
  for (size_t t = 0; t < p.hours.size(); ++t) {
    const auto& h = p.hours[t];
    w.row({fmt_num((long long)t), fmt_num(h.k[0]), fmt_num(h.k[1]), fmt_num(h.k[2]),
           fmt_num(h.k[3]), fmt_num(h.l[0]), fmt_num(h.l[1]), fmt_num(h.l[2]),
           fmt_num(h.l[3])});
  }
}

}  // namespace dermarket
