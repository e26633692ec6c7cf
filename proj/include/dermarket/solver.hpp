// Dense bounded-variable simplex (two-phase, with duals) and a
// best-bound branch-and-bound for models with binary variables.
// Deterministic: re-solving a model yields bit-identical results.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <vector>

#include "dermarket/error.hpp"

namespace dermarket {

enum class Sense { minimize, maximize };
enum class RowSense { le, eq, ge };
enum class SolveStatus { optimal, infeasible, unbounded, gap_not_closed };

inline const char* status_name(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "Optimal";
    case SolveStatus::infeasible: return "Infeasible";
    case SolveStatus::unbounded: return "Unbounded";
    case SolveStatus::gap_not_closed: return "GapNotClosed";
  }
  return "?";
}

constexpr double kInf = std::numeric_limits<double>::infinity();

struct LinearModel {
  struct Row {
    RowSense sense;
    double rhs;
    std::vector<std::pair<int, double>> terms;  // (variable, coefficient)
  };

  Sense sense = Sense::minimize;
  std::vector<double> obj, lo, hi;
  std::vector<char> integral;
  std::vector<Row> rows;

  int add_var(double lb, double ub, double cost, bool is_integral = false) {
    if (!(lb <= ub))
      throw Error(Errc::bad_value, "variable bounds inconsistent (lo > hi)");
    if (!std::isfinite(cost))
      throw Error(Errc::bad_value, "non-finite objective coefficient");
    obj.push_back(cost);
    lo.push_back(lb);
    hi.push_back(ub);
    integral.push_back(is_integral ? 1 : 0);
    return static_cast<int>(obj.size()) - 1;
  }

  int add_row(RowSense s, double rhs, std::vector<std::pair<int, double>> terms) {
    if (!std::isfinite(rhs)) throw Error(Errc::bad_value, "non-finite rhs");
    for (auto& [v, c] : terms) {
      if (v < 0 || v >= static_cast<int>(obj.size()))
        throw Error(Errc::bad_value, "row references unknown variable");
      if (!std::isfinite(c))
        throw Error(Errc::bad_value, "non-finite row coefficient");
    }
    rows.push_back({s, rhs, std::move(terms)});
    return static_cast<int>(rows.size()) - 1;
  }

  size_t num_vars() const { return obj.size(); }
  size_t num_rows() const { return rows.size(); }

  bool has_integrality() const {
    for (char c : integral)
      if (c) return true;
    return false;
  }

  /// Max row violation of a candidate point (bounds not included).
  double row_residual(const std::vector<double>& x) const {
    double worst = 0;
    for (const auto& r : rows) {
      double lhs = 0;
      for (auto [v, c] : r.terms) lhs += c * x[v];
      double viol = 0;
      if (r.sense == RowSense::le) viol = lhs - r.rhs;
      else if (r.sense == RowSense::ge) viol = r.rhs - lhs;
      else viol = std::abs(lhs - r.rhs);
      worst = std::max(worst, viol);
    }
    return worst;
  }
};

struct Solution {
  SolveStatus status = SolveStatus::infeasible;
  std::vector<double> x;
  std::vector<double> row_dual;      // LP only; in the model's own sense
  std::vector<double> reduced_cost;  // LP only; in the model's own sense
  double objective = 0.0;
  double bound = 0.0;  // branch-and-bound best bound (MILP)
  long iterations = 0;
  long nodes = 0;
};

namespace detail {

// Two-phase primal simplex on bounded variables. Works internally in
// minimize convention; rows are converted to equalities with slack
// columns, and the start basis is built from signed artificials.
class Simplex {
 public:
  static constexpr double kPivotTol = 1e-9;
  static constexpr double kDualTol = 1e-9;
  static constexpr double kFeasTol = 1e-9;

  explicit Simplex(const LinearModel& m) : model_(m) {
    n_ = static_cast<int>(m.num_vars());
    m_ = static_cast<int>(m.num_rows());
    n_slack_ = m_;
    total_ = n_ + n_slack_ + m_;  // structurals + slacks + artificials

    cols_.assign(total_, {});
    lb_.assign(total_, 0.0);
    ub_.assign(total_, 0.0);
    val_.assign(total_, 0.0);
    b_.resize(m_);

    for (int j = 0; j < n_; ++j) {
      lb_[j] = m.lo[j];
      ub_[j] = m.hi[j];
    }
    for (int i = 0; i < m_; ++i) {
      const auto& row = m.rows[i];
      b_[i] = row.rhs;
      for (auto [v, c] : row.terms) cols_[v].push_back({i, c});
      int s = n_ + i;
      cols_[s].push_back({i, 1.0});
      switch (row.sense) {
        case RowSense::le: lb_[s] = 0.0; ub_[s] = kInf; break;
        case RowSense::ge: lb_[s] = -kInf; ub_[s] = 0.0; break;
        case RowSense::eq: lb_[s] = 0.0; ub_[s] = 0.0; break;
      }
    }
  }

  SolveStatus solve() {
    // Nonbasic start values: the finite bound nearest zero, or 0 if free.
    for (int j = 0; j < n_ + n_slack_; ++j) val_[j] = start_value_(j);

    // Signed artificials absorb the start residual so the initial basis
    // (the artificial identity columns) is primal feasible.
    basis_.resize(m_);
    phase1_cost_.assign(total_, 0.0);
    std::vector<double> resid(b_);
    for (int j = 0; j < n_ + n_slack_; ++j) {
      if (val_[j] == 0.0) continue;
      for (auto [i, c] : cols_[j]) resid[i] -= c * val_[j];
    }
    for (int i = 0; i < m_; ++i) {
      int a = n_ + n_slack_ + i;
      cols_[a] = {{i, 1.0}};
      if (resid[i] >= 0) {
        lb_[a] = 0.0; ub_[a] = kInf; phase1_cost_[a] = 1.0;
      } else {
        lb_[a] = -kInf; ub_[a] = 0.0; phase1_cost_[a] = -1.0;
      }
      val_[a] = resid[i];
      basis_[i] = a;
    }
    in_basis_.assign(total_, 0);
    for (int i = 0; i < m_; ++i) in_basis_[basis_[i]] = 1;
    binv_.assign(static_cast<size_t>(m_) * m_, 0.0);
    for (int i = 0; i < m_; ++i) binv_[i * static_cast<size_t>(m_) + i] = 1.0;

    // Phase 1
    cost_ = &phase1_cost_;
    SolveStatus st = iterate_();
    if (st == SolveStatus::unbounded)
      throw Error(Errc::bad_value, "phase-1 objective unbounded (numerical)");
    if (st != SolveStatus::optimal) return st;
    double infeas = 0;
    for (int i = 0; i < m_; ++i) {
      int a = basis_[i];
      if (a >= n_ + n_slack_) infeas += std::abs(val_[a]);
    }
    for (int a = n_ + n_slack_; a < total_; ++a)
      if (!in_basis_[a]) infeas += std::abs(val_[a]);
    double scale = 1.0;
    for (int i = 0; i < m_; ++i) scale = std::max(scale, std::abs(b_[i]));
    if (infeas > 1e-7 * scale) return SolveStatus::infeasible;

    // Freeze artificials at zero for phase 2.
    for (int a = n_ + n_slack_; a < total_; ++a) {
      lb_[a] = 0.0;
      ub_[a] = 0.0;
      if (!in_basis_[a]) val_[a] = 0.0;
    }
    phase2_cost_.assign(total_, 0.0);
    for (int j = 0; j < n_; ++j) phase2_cost_[j] = model_.obj[j];
    cost_ = &phase2_cost_;
    st = iterate_();
    if (st != SolveStatus::optimal) return st;

    refactorize_();
    return SolveStatus::optimal;
  }

  void extract(Solution& out) const {
    out.x.assign(model_.num_vars(), 0.0);
    for (int j = 0; j < n_; ++j) out.x[j] = val_[j];
    double obj = 0;
    for (int j = 0; j < n_; ++j) obj += model_.obj[j] * val_[j];
    out.objective = obj;
    // Duals y = cB' Binv, reduced costs d = c - y'A.
    std::vector<double> y(m_, 0.0);
    for (int i = 0; i < m_; ++i) {
      double cb = phase2_cost_[basis_[i]];
      if (cb == 0.0) continue;
      const double* row = &binv_[i * static_cast<size_t>(m_)];
      for (int k = 0; k < m_; ++k) y[k] += cb * row[k];
    }
    out.row_dual.assign(m_, 0.0);
    for (int i = 0; i < m_; ++i) out.row_dual[i] = y[i];
    out.reduced_cost.assign(n_, 0.0);
    for (int j = 0; j < n_; ++j) {
      double d = phase2_cost_[j];
      for (auto [i, c] : cols_[j]) d -= y[i] * c;
      out.reduced_cost[j] = d;
    }
    out.iterations = iterations_;
  }

  long iterations() const { return iterations_; }

 private:
  double start_value_(int j) const {
    if (std::isfinite(lb_[j])) return lb_[j];
    if (std::isfinite(ub_[j])) return ub_[j];
    return 0.0;
  }

  // Recompute Binv and basic values from scratch (numerical refresh).
  void refactorize_() {
    // Gauss-Jordan inversion of the basis matrix with partial pivoting.
    std::vector<double> B(static_cast<size_t>(m_) * m_, 0.0);
    for (int k = 0; k < m_; ++k)
      for (auto [i, c] : cols_[basis_[k]]) B[i * static_cast<size_t>(m_) + k] = c;
    std::vector<double> inv(static_cast<size_t>(m_) * m_, 0.0);
    for (int i = 0; i < m_; ++i) inv[i * static_cast<size_t>(m_) + i] = 1.0;
    for (int col = 0; col < m_; ++col) {
      int piv = col;
      double best = std::abs(B[col * static_cast<size_t>(m_) + col]);
      for (int r = col + 1; r < m_; ++r) {
        double v = std::abs(B[r * static_cast<size_t>(m_) + col]);
        if (v > best) { best = v; piv = r; }
      }
      if (best < 1e-13)
        throw Error(Errc::bad_value, "singular basis during refactorization");
      if (piv != col) {
        for (int k = 0; k < m_; ++k) {
          std::swap(B[piv * static_cast<size_t>(m_) + k], B[col * static_cast<size_t>(m_) + k]);
          std::swap(inv[piv * static_cast<size_t>(m_) + k], inv[col * static_cast<size_t>(m_) + k]);
        }
      }
      double d = B[col * static_cast<size_t>(m_) + col];
      for (int k = 0; k < m_; ++k) {
        B[col * static_cast<size_t>(m_) + k] /= d;
        inv[col * static_cast<size_t>(m_) + k] /= d;
      }
      for (int r = 0; r < m_; ++r) {
        if (r == col) continue;
        double f = B[r * static_cast<size_t>(m_) + col];
        if (f == 0.0) continue;
        for (int k = 0; k < m_; ++k) {
          B[r * static_cast<size_t>(m_) + k] -= f * B[col * static_cast<size_t>(m_) + k];
          inv[r * static_cast<size_t>(m_) + k] -= f * inv[col * static_cast<size_t>(m_) + k];
        }
      }
    }
    binv_ = std::move(inv);
    recompute_basics_();
  }

  void recompute_basics_() {
    std::vector<double> rhs(b_);
    for (int j = 0; j < total_; ++j) {
      if (in_basis_[j] || val_[j] == 0.0) continue;
      for (auto [i, c] : cols_[j]) rhs[i] -= c * val_[j];
    }
    for (int i = 0; i < m_; ++i) {
      const double* row = &binv_[i * static_cast<size_t>(m_)];
      double v = 0;
      for (int k = 0; k < m_; ++k) v += row[k] * rhs[k];
      val_[basis_[i]] = v;
    }
  }

  SolveStatus iterate_() {
    recompute_basics_();
    int degenerate_streak = 0;
    bool bland = false;
    long since_refactor = 0;

    while (true) {
      if (++iterations_ > iteration_limit_)
        throw Error(Errc::bad_value, "simplex iteration limit exceeded");
      if (++since_refactor >= 512) {
        refactorize_();
        since_refactor = 0;
      }

      // Pricing: y = cB' Binv, then reduced costs of nonbasic columns.
      std::vector<double> y(m_, 0.0);
      for (int i = 0; i < m_; ++i) {
        double cb = (*cost_)[basis_[i]];
        if (cb == 0.0) continue;
        const double* row = &binv_[i * static_cast<size_t>(m_)];
        for (int k = 0; k < m_; ++k) y[k] += cb * row[k];
      }

      int enter = -1, dir = 0;
      double best_score = kDualTol;
      for (int j = 0; j < total_; ++j) {
        if (in_basis_[j]) continue;
        if (lb_[j] == ub_[j]) continue;  // fixed column can never improve
        double d = (*cost_)[j];
        for (auto [i, c] : cols_[j]) d -= y[i] * c;
        bool at_lb = std::isfinite(lb_[j]) && val_[j] <= lb_[j] + kFeasTol;
        bool at_ub = std::isfinite(ub_[j]) && val_[j] >= ub_[j] - kFeasTol;
        int cand_dir = 0;
        double score = 0;
        if ((at_lb || (!at_lb && !at_ub)) && d < -kDualTol) {
          cand_dir = +1;
          score = -d;
        } else if ((at_ub || (!at_lb && !at_ub)) && d > kDualTol) {
          cand_dir = -1;
          score = d;
        } else {
          continue;
        }
        if (bland) {
          enter = j; dir = cand_dir;
          break;  // Bland: first eligible (lowest index)
        }
        if (score > best_score) {
          best_score = score;
          enter = j;
          dir = cand_dir;
        }
      }
      if (enter < 0) return SolveStatus::optimal;

      // Column update direction w = Binv * A_enter.
      std::vector<double> w(m_, 0.0);
      for (auto [i, c] : cols_[enter]) {
        for (int r = 0; r < m_; ++r) w[r] += binv_[r * static_cast<size_t>(m_) + i] * c;
      }

      // Ratio test: basic i moves as xB_i - t*dir*w_i.
      double t_best = kInf;
      int leave_row = -1;
      double range = ub_[enter] - lb_[enter];  // bound-flip distance
      if (std::isfinite(range)) t_best = range;
      for (int i = 0; i < m_; ++i) {
        double g = dir * w[i];
        int bj = basis_[i];
        double t = kInf;
        if (g > kPivotTol) {
          if (std::isfinite(lb_[bj])) t = (val_[bj] - lb_[bj]) / g;
        } else if (g < -kPivotTol) {
          if (std::isfinite(ub_[bj])) t = (val_[bj] - ub_[bj]) / g;
        } else {
          continue;
        }
        if (t < -kFeasTol) t = 0;  // numerical guard
        if (t < t_best - 1e-12) {
          t_best = t;
          leave_row = i;
        } else if (leave_row >= 0 && t <= t_best + 1e-12) {
          // deterministic tie-break: prefer larger |pivot|, then lower row
          double cur = std::abs(w[leave_row]);
          double alt = std::abs(w[i]);
          if (bland ? (basis_[i] < basis_[leave_row]) : (alt > cur + 1e-12)) {
            t_best = std::min(t_best, t);
            leave_row = i;
          }
        }
      }

      if (!std::isfinite(t_best)) return SolveStatus::unbounded;

      if (t_best <= 1e-12) {
        if (++degenerate_streak > 64) bland = true;
      } else {
        degenerate_streak = 0;
        bland = false;
      }

      // Apply the step.
      if (t_best > 0) {
        val_[enter] += dir * t_best;
        for (int i = 0; i < m_; ++i) val_[basis_[i]] -= t_best * dir * w[i];
      }
      if (leave_row < 0) continue;  // bound flip, basis unchanged

      int leave = basis_[leave_row];
      // Snap the leaving variable onto the bound it reached.
      double g = dir * w[leave_row];
      val_[leave] = (g > 0) ? lb_[leave] : ub_[leave];

      double piv = w[leave_row];
      if (std::abs(piv) < kPivotTol) {
        refactorize_();
        since_refactor = 0;
        continue;  // retry with a fresh factorization
      }
      size_t M = static_cast<size_t>(m_);
      double* prow = &binv_[leave_row * M];
      for (int k = 0; k < m_; ++k) prow[k] /= piv;
      for (int r = 0; r < m_; ++r) {
        if (r == leave_row) continue;
        double f = w[r];
        if (f == 0.0) continue;
        double* rrow = &binv_[r * M];
        for (int k = 0; k < m_; ++k) rrow[k] -= f * prow[k];
      }
      in_basis_[leave] = 0;
      in_basis_[enter] = 1;
      basis_[leave_row] = enter;
    }
  }

  const LinearModel& model_;
  int n_ = 0, m_ = 0, n_slack_ = 0, total_ = 0;
  std::vector<std::vector<std::pair<int, double>>> cols_;
  std::vector<double> lb_, ub_, val_, b_;
  std::vector<double> phase1_cost_, phase2_cost_;
  const std::vector<double>* cost_ = nullptr;
  std::vector<int> basis_;
  std::vector<char> in_basis_;
  std::vector<double> binv_;
  long iterations_ = 0;
  long iteration_limit_ = 2000000;
};

}  // namespace detail

/// Solves a pure LP (no integrality flags honored). Returns primal and
/// dual values in the model's own objective sense.
inline Solution solve_lp(const LinearModel& model) {
  Solution out;
  if (model.sense == Sense::maximize) {
    LinearModel flipped = model;
    flipped.sense = Sense::minimize;
    for (auto& c : flipped.obj) c = -c;
    out = solve_lp(flipped);
    out.objective = -out.objective;
    out.bound = -out.bound;
    for (auto& d : out.row_dual) d = -d;
    for (auto& d : out.reduced_cost) d = -d;
    return out;
  }
  detail::Simplex s(model);
  out.status = s.solve();
  if (out.status == SolveStatus::optimal) {
    s.extract(out);
    out.bound = out.objective;
  } else {
    out.iterations = s.iterations();
  }
  return out;
}

struct MilpOptions {
  double rel_gap = 1e-6;
  double int_tol = 1e-6;
  long node_limit = 200000;
  /// Optional integral-feasible point used to seed the incumbent.
  const std::vector<double>* warm_start = nullptr;
};

/// Branch-and-bound on binary variables: best-bound node selection,
/// most-fractional branching, deterministic tie-breaks by index.
inline Solution solve_milp(const LinearModel& model, const MilpOptions& opt = {}) {
  if (model.sense == Sense::maximize) {
    LinearModel flipped = model;
    flipped.sense = Sense::minimize;
    for (auto& c : flipped.obj) c = -c;
    Solution out = solve_milp(flipped, opt);
    out.objective = -out.objective;
    out.bound = -out.bound;
    return out;
  }
  for (size_t j = 0; j < model.num_vars(); ++j) {
    if (!model.integral[j]) continue;
    if (model.lo[j] < -1e-12 || model.hi[j] > 1 + 1e-12)
      throw Error(Errc::bad_value, "integrality supported for binaries only");
  }

  struct Node {
    double bound;
    long id;
    std::vector<std::pair<int, double>> fixings;  // (var, value)
  };
  auto cmp = [](const Node& a, const Node& b) {
    if (a.bound != b.bound) return a.bound > b.bound;  // min-heap on bound
    return a.id > b.id;
  };
  std::priority_queue<Node, std::vector<Node>, decltype(cmp)> open(cmp);

  Solution incumbent;
  incumbent.status = SolveStatus::infeasible;
  double inc_obj = kInf;
  bool have_inc = false;

  if (opt.warm_start) {
    const auto& x = *opt.warm_start;
    bool ok = x.size() == model.num_vars() &&
              model.row_residual(x) <= 1e-7;
    if (ok) {
      for (size_t j = 0; j < model.num_vars() && ok; ++j) {
        if (x[j] < model.lo[j] - 1e-7 || x[j] > model.hi[j] + 1e-7) ok = false;
        if (model.integral[j] && std::abs(x[j] - std::round(x[j])) > opt.int_tol)
          ok = false;
      }
    }
    if (ok) {
      double obj = 0;
      for (size_t j = 0; j < model.num_vars(); ++j) obj += model.obj[j] * x[j];
      inc_obj = obj;
      have_inc = true;
      incumbent.x = x;
      incumbent.objective = obj;
    }
  }

  long next_id = 0;
  open.push({-kInf, next_id++, {}});
  long nodes = 0;
  long iterations = 0;
  double best_open_bound = -kInf;

  auto gap_closed = [&](double lb) {
    if (!have_inc) return false;
    return inc_obj - lb <= opt.rel_gap * std::max(1.0, std::abs(inc_obj));
  };

  SolveStatus final_status = SolveStatus::optimal;
  LinearModel sub = model;  // reused per node; only bounds change
  while (!open.empty()) {
    Node node = open.top();
    open.pop();
    best_open_bound = node.bound;
    if (gap_closed(node.bound)) break;
    if (nodes >= opt.node_limit) {
      final_status = SolveStatus::gap_not_closed;
      break;
    }
    ++nodes;

    sub.lo = model.lo;
    sub.hi = model.hi;
    for (auto [v, value] : node.fixings) {
      sub.lo[v] = value;
      sub.hi[v] = value;
    }
    Solution rel = solve_lp(sub);
    iterations += rel.iterations;
    if (rel.status == SolveStatus::infeasible) continue;
    if (rel.status == SolveStatus::unbounded) {
      Solution out;
      out.status = SolveStatus::unbounded;
      out.nodes = nodes;
      out.iterations = iterations;
      return out;
    }
    if (have_inc && rel.objective >= inc_obj - 1e-12) continue;

    // Most fractional binary; ties broken by lowest index.
    int branch_var = -1;
    double best_frac = opt.int_tol;
    for (size_t j = 0; j < model.num_vars(); ++j) {
      if (!model.integral[j]) continue;
      double f = std::abs(rel.x[j] - std::round(rel.x[j]));
      if (f > best_frac + 1e-15) {
        best_frac = f;
        branch_var = static_cast<int>(j);
      }
    }
    if (branch_var < 0) {
      // Integral: candidate incumbent.
      if (rel.objective < inc_obj - 1e-12) {
        inc_obj = rel.objective;
        have_inc = true;
        incumbent.x = rel.x;
        incumbent.objective = rel.objective;
        incumbent.row_dual = rel.row_dual;
        incumbent.reduced_cost = rel.reduced_cost;
      }
      continue;
    }
    for (double v : {0.0, 1.0}) {
      auto fixings = node.fixings;
      fixings.emplace_back(branch_var, v);
      open.push({rel.objective, next_id++, std::move(fixings)});
    }
  }

  if (!have_inc) {
    Solution out;
    out.status = final_status == SolveStatus::gap_not_closed
                     ? SolveStatus::gap_not_closed
                     : SolveStatus::infeasible;
    out.nodes = nodes;
    out.iterations = iterations;
    out.bound = best_open_bound;
    return out;
  }
  incumbent.status = final_status;
  incumbent.nodes = nodes;
  incumbent.iterations = iterations;
  incumbent.bound = open.empty() ? inc_obj : std::min(inc_obj, best_open_bound);
  if (final_status == SolveStatus::optimal) incumbent.bound = std::min(inc_obj, incumbent.bound);
  return incumbent;
}

}  // namespace dermarket
