#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "odmts/milp/model.hpp"

namespace odmts::milp {

// Column-compressed LP: min c'x  s.t.  A x - r = 0,  lb <= (x, r) <= ub.
// Variables n..n+m-1 are the row activities r ("logicals"); their bounds encode
// the row senses.
struct LpProblem {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::size_t> col_start;  // cols + 1
  std::vector<std::size_t> row_index;
  std::vector<double> value;
  std::vector<double> cost;  // cols
  std::vector<double> lb;    // cols + rows
  std::vector<double> ub;    // cols + rows

  static LpProblem from_model(const MilpModel& model) {
    model.check();
    LpProblem p;
    p.rows = model.num_constraints();
    p.cols = model.num_variables();
    std::vector<std::size_t> count(p.cols, 0);
    for (const auto& row : model.constraints()) {
      for (const auto& t : row.terms) ++count[t.var];
    }
    p.col_start.assign(p.cols + 1, 0);
    for (std::size_t j = 0; j < p.cols; ++j) p.col_start[j + 1] = p.col_start[j] + count[j];
    p.row_index.resize(p.col_start.back());
    p.value.resize(p.col_start.back());
    std::vector<std::size_t> fill(p.col_start.begin(), p.col_start.end() - 1);
    for (std::size_t i = 0; i < p.rows; ++i) {
      for (const auto& t : model.constraints()[i].terms) {
        p.row_index[fill[t.var]] = i;
        p.value[fill[t.var]++] = t.coef;
      }
    }
    for (const auto& v : model.variables()) {
      p.cost.push_back(v.obj);
      p.lb.push_back(v.lb);
      p.ub.push_back(v.ub);
    }
    for (const auto& row : model.constraints()) {
      switch (row.sense) {
        case RowSense::LessEqual:
          p.lb.push_back(-kInfinity);
          p.ub.push_back(row.rhs);
          break;
        case RowSense::GreaterEqual:
          p.lb.push_back(row.rhs);
          p.ub.push_back(kInfinity);
          break;
        case RowSense::Equal:
          p.lb.push_back(row.rhs);
          p.ub.push_back(row.rhs);
          break;
      }
    }
    return p;
  }
};

// Nonbasic position of every variable; basic variables are marked kBasic.
enum class VarState : std::uint8_t { kBasic, kLower, kUpper, kZero };

struct Basis {
  std::vector<VarState> state;  // cols + rows
};

struct LpResult {
  SolveStatus status = SolveStatus::Infeasible;
  double objective = 0.0;
  std::vector<double> x;  // structural values
  Basis basis;
  std::size_t iterations = 0;
};

inline bool solve_log_enabled() {
  const char* env = std::getenv("ODMTS_SOLVE_LOG");
  return env != nullptr && *env != '\0' && std::string(env) != "0";
}

// Bounded-variable simplex with a product-form basis inverse that is rebuilt
// every `kRefactorInterval` pivots. A solve first runs the dual method when
// the starting basis can be made dual feasible (always the case for
// nonnegative costs on boxed columns, and for a parent basis after a bound
// change), then a primal pass that confirms optimality or takes over. The
// primal phase 1 minimizes the sum of bound infeasibilities of basic
// variables. Dantzig pricing, Harris two-pass ratio tests, Bland's rule after
// a run of degenerate primal pivots.
class BoundedSimplex {
 public:
  explicit BoundedSimplex(const LpProblem& p) : p_(p), m_(p.rows), n_(p.cols), total_(p.rows + p.cols) {}

  // `lb`/`ub` override the structural bounds (size cols); logical bounds come
  // from the problem.
  LpResult solve(const std::vector<double>& lb, const std::vector<double>& ub,
                 const Basis* warm = nullptr) {
    lb_ = p_.lb;
    ub_ = p_.ub;
    std::copy(lb.begin(), lb.end(), lb_.begin());
    std::copy(ub.begin(), ub.end(), ub_.begin());
    log_ = solve_log_enabled();
    init_basis(warm);
    if (const auto status = run_dual(); status == SolveStatus::Infeasible) {
      LpResult r;
      r.status = SolveStatus::Infeasible;
      r.basis.state = state_;
      r.iterations = dual_iterations_;
      return r;
    }
    LpResult r = run();
    r.iterations += dual_iterations_;
    return r;
  }

  LpResult solve() {
    std::vector<double> lb(p_.lb.begin(), p_.lb.begin() + static_cast<std::ptrdiff_t>(n_));
    std::vector<double> ub(p_.ub.begin(), p_.ub.begin() + static_cast<std::ptrdiff_t>(n_));
    return solve(lb, ub, nullptr);
  }

 private:
  static constexpr std::size_t kRefactorInterval = 100;
  static constexpr double kPrimalTol = 1e-9;
  static constexpr double kDualTol = 1e-9;
  static constexpr double kPivotTol = 1e-9;
  static constexpr std::size_t kDegenerateRun = 50;

  // --- column access -------------------------------------------------------

  template <typename F>
  void for_column(std::size_t j, F&& f) const {
    if (j < n_) {
      for (std::size_t k = p_.col_start[j]; k < p_.col_start[j + 1]; ++k) f(p_.row_index[k], p_.value[k]);
    } else {
      f(j - n_, -1.0);
    }
  }

  std::size_t column_nnz(std::size_t j) const {
    return j < n_ ? p_.col_start[j + 1] - p_.col_start[j] : 1;
  }

  // --- basis inverse (product form over B0 = -I) ---------------------------

  void ftran(std::vector<double>& a) const {
    for (double& v : a) v = -v;
    for (std::size_t e = 0; e < eta_row_.size(); ++e) {
      const std::size_t p = eta_row_[e];
      if (a[p] == 0.0) continue;
      const double xp = a[p] / eta_pivot_[e];
      a[p] = xp;
      for (std::size_t k = eta_start_[e]; k < eta_start_[e + 1]; ++k) a[eta_index_[k]] -= eta_value_[k] * xp;
    }
  }

  void btran(std::vector<double>& y) const {
    for (std::size_t e = eta_row_.size(); e-- > 0;) {
      const std::size_t p = eta_row_[e];
      double s = y[p];
      for (std::size_t k = eta_start_[e]; k < eta_start_[e + 1]; ++k) s -= eta_value_[k] * y[eta_index_[k]];
      y[p] = s / eta_pivot_[e];
    }
    for (double& v : y) v = -v;
  }

  void push_eta(std::size_t row, const std::vector<double>& alpha) {
    eta_row_.push_back(row);
    eta_pivot_.push_back(alpha[row]);
    for (std::size_t i = 0; i < m_; ++i) {
      if (i != row && std::fabs(alpha[i]) > 1e-14) {
        eta_index_.push_back(i);
        eta_value_.push_back(alpha[i]);
      }
    }
    eta_start_.push_back(eta_index_.size());
  }

  void clear_etas() {
    eta_row_.clear();
    eta_pivot_.clear();
    eta_index_.clear();
    eta_value_.clear();
    eta_start_.assign(1, 0);
  }

  void load_column(std::size_t j, std::vector<double>& a) const {
    std::fill(a.begin(), a.end(), 0.0);
    for_column(j, [&](std::size_t i, double v) { a[i] = v; });
  }

  // Rebuilds the eta file for the current basic set. Columns that turn out
  // dependent are dropped to a bound and replaced by row logicals.
  void refactor() {
    clear_etas();
    std::vector<char> row_taken(m_, 0);
    std::vector<std::size_t> structurals;
    for (std::size_t i = 0; i < m_; ++i) {
      if (state_[n_ + i] == VarState::kBasic) row_taken[i] = 1;
    }
    for (std::size_t j = 0; j < n_; ++j) {
      if (state_[j] == VarState::kBasic) structurals.push_back(j);
    }
    std::stable_sort(structurals.begin(), structurals.end(),
                     [&](std::size_t a, std::size_t b) { return column_nnz(a) < column_nnz(b); });
    head_.assign(m_, 0);
    for (std::size_t i = 0; i < m_; ++i) head_[i] = n_ + i;
    std::vector<double> a(m_);
    for (std::size_t j : structurals) {
      load_column(j, a);
      ftran(a);
      std::size_t best = m_;
      double best_abs = 1e-7;
      for (std::size_t i = 0; i < m_; ++i) {
        if (!row_taken[i] && std::fabs(a[i]) > best_abs) {
          best_abs = std::fabs(a[i]);
          best = i;
        }
      }
      if (best == m_) {
        state_[j] = nearest_bound_state(j);
        x_[j] = nonbasic_value(j);
        continue;
      }
      push_eta(best, a);
      row_taken[best] = 1;
      head_[best] = j;
    }
    for (std::size_t i = 0; i < m_; ++i) {
      if (head_[i] == n_ + i) state_[n_ + i] = VarState::kBasic;
    }
    since_refactor_ = 0;
    compute_basic_values();
  }

  // --- state helpers ---------------------------------------------------------

  VarState nearest_bound_state(std::size_t j) const {
    const bool has_lb = std::isfinite(lb_[j]), has_ub = std::isfinite(ub_[j]);
    if (has_lb && has_ub) {
      return std::fabs(x_[j] - lb_[j]) <= std::fabs(x_[j] - ub_[j]) ? VarState::kLower
                                                                    : VarState::kUpper;
    }
    if (has_lb) return VarState::kLower;
    if (has_ub) return VarState::kUpper;
    return VarState::kZero;
  }

  double nonbasic_value(std::size_t j) const {
    switch (state_[j]) {
      case VarState::kLower:
        return lb_[j];
      case VarState::kUpper:
        return ub_[j];
      default:
        return 0.0;
    }
  }

  // Re-anchors a nonbasic variable whose bound disappeared.
  void fix_nonbasic_state(std::size_t j) {
    if (state_[j] == VarState::kBasic) return;
    if (state_[j] == VarState::kLower && !std::isfinite(lb_[j])) state_[j] = nearest_bound_state(j);
    if (state_[j] == VarState::kUpper && !std::isfinite(ub_[j])) state_[j] = nearest_bound_state(j);
    if (state_[j] == VarState::kZero && (std::isfinite(lb_[j]) || std::isfinite(ub_[j]))) {
      state_[j] = nearest_bound_state(j);
    }
    x_[j] = nonbasic_value(j);
  }

  void compute_basic_values() {
    std::vector<double> rhs(m_, 0.0);
    for (std::size_t j = 0; j < total_; ++j) {
      if (state_[j] == VarState::kBasic || x_[j] == 0.0) continue;
      for_column(j, [&](std::size_t i, double v) { rhs[i] -= v * x_[j]; });
    }
    ftran(rhs);
    for (std::size_t i = 0; i < m_; ++i) x_[head_[i]] = rhs[i];
  }

  void init_basis(const Basis* warm) {
    x_.assign(total_, 0.0);
    if (warm != nullptr && warm->state.size() == total_ &&
        static_cast<std::size_t>(std::count(warm->state.begin(), warm->state.end(), VarState::kBasic)) == m_) {
      state_ = warm->state;
    } else {
      state_.assign(total_, VarState::kLower);
      for (std::size_t i = 0; i < m_; ++i) state_[n_ + i] = VarState::kBasic;
      for (std::size_t j = 0; j < n_; ++j) state_[j] = nearest_bound_state(j);
    }
    for (std::size_t j = 0; j < total_; ++j) fix_nonbasic_state(j);
    refactor();
  }

  double infeasibility(std::size_t j) const {
    const double v = x_[j];
    if (v < lb_[j] - kPrimalTol * (1.0 + std::fabs(lb_[j]))) return lb_[j] - v;
    if (v > ub_[j] + kPrimalTol * (1.0 + std::fabs(ub_[j]))) return v - ub_[j];
    return 0.0;
  }

  // --- dual simplex ------------------------------------------------------------

  // Reduced costs of every nonbasic variable for the current basis.
  void reduced_costs(std::vector<double>& y, std::vector<double>& d) const {
    for (std::size_t i = 0; i < m_; ++i) y[i] = head_[i] < n_ ? p_.cost[head_[i]] : 0.0;
    btran(y);
    for (std::size_t j = 0; j < total_; ++j) {
      if (state_[j] == VarState::kBasic) continue;
      double dj = j < n_ ? p_.cost[j] : 0.0;
      for_column(j, [&](std::size_t i, double v) { dj -= y[i] * v; });
      d[j] = dj;
    }
  }

  // Dual simplex from the current basis. Boxed variables are moved to the
  // bound their reduced cost prefers; any other dual infeasibility returns
  // nullopt so the primal method takes over. Optimal means primal feasible
  // with the dual kept feasible, which the caller confirms with a primal pass.
  std::optional<SolveStatus> run_dual() {
    dual_iterations_ = 0;
    std::vector<double> y(m_), d(total_, 0.0), rho(m_), alpha(m_), row(total_, 0.0);
    reduced_costs(y, d);
    for (std::size_t j = 0; j < total_; ++j) {
      if (state_[j] == VarState::kBasic || lb_[j] == ub_[j]) continue;
      const bool at_lower = state_[j] == VarState::kLower, at_upper = state_[j] == VarState::kUpper;
      if ((at_lower || state_[j] == VarState::kZero) && d[j] < -kDualTol) {
        if (!std::isfinite(ub_[j])) return std::nullopt;
        state_[j] = VarState::kUpper;
      } else if ((at_upper || state_[j] == VarState::kZero) && d[j] > kDualTol) {
        if (!std::isfinite(lb_[j])) return std::nullopt;
        state_[j] = VarState::kLower;
      }
      x_[j] = nonbasic_value(j);
    }
    compute_basic_values();

    const std::size_t max_iter = 50 * (m_ + n_) + 10000;
    int refactor_retries = 0;
    for (;;) {
      if (++dual_iterations_ > max_iter) return std::nullopt;
      std::size_t r = m_;
      double worst = 0.0;
      for (std::size_t i = 0; i < m_; ++i) {
        const double inf = infeasibility(head_[i]);
        if (inf > worst) {
          worst = inf;
          r = i;
        }
      }
      if (r == m_) return SolveStatus::Optimal;
      const std::size_t out = head_[r];
      const bool raise = x_[out] < lb_[out];
      const double target = raise ? lb_[out] : ub_[out];

      reduced_costs(y, d);
      std::fill(rho.begin(), rho.end(), 0.0);
      rho[r] = 1.0;
      btran(rho);

      // Harris two-pass ratio test over eligible nonbasic columns.
      double theta_max = kInfinity;
      for (std::size_t j = 0; j < total_; ++j) {
        row[j] = 0.0;
        if (state_[j] == VarState::kBasic || lb_[j] == ub_[j]) continue;
        double a = 0.0;
        for_column(j, [&](std::size_t i, double v) { a += rho[i] * v; });
        row[j] = a;
        if (std::fabs(a) <= kPivotTol) continue;
        const double gain = raise ? -a : a;  // change in x_out per unit increase of j
        const bool up = gain > 0 && state_[j] != VarState::kUpper;
        const bool down = gain < 0 && state_[j] != VarState::kLower;
        if (!up && !down) continue;
        theta_max = std::min(theta_max, (std::fabs(d[j]) + kDualTol) / std::fabs(a));
      }
      std::size_t enter = total_;
      double enter_abs = 0.0;
      for (std::size_t j = 0; j < total_; ++j) {
        const double a = row[j];
        if (std::fabs(a) <= kPivotTol) continue;
        const double gain = raise ? -a : a;
        const bool up = gain > 0 && state_[j] != VarState::kUpper;
        const bool down = gain < 0 && state_[j] != VarState::kLower;
        if (!up && !down) continue;
        if (std::fabs(d[j]) / std::fabs(a) <= theta_max && std::fabs(a) > enter_abs) {
          enter = j;
          enter_abs = std::fabs(a);
        }
      }
      if (enter == total_) {
        if (since_refactor_ > 0 && refactor_retries < 3) {
          ++refactor_retries;
          refactor();
          continue;
        }
        return SolveStatus::Infeasible;
      }
      refactor_retries = 0;

      load_column(enter, alpha);
      ftran(alpha);
      if (std::fabs(alpha[r]) <= kPivotTol) {
        refactor();
        continue;
      }
      const double t = (x_[out] - target) / alpha[r];
      x_[enter] += t;
      for (std::size_t i = 0; i < m_; ++i) {
        if (alpha[i] != 0.0) x_[head_[i]] -= t * alpha[i];
      }
      x_[out] = target;
      state_[out] = raise ? VarState::kLower : VarState::kUpper;
      state_[enter] = VarState::kBasic;
      head_[r] = enter;
      push_eta(r, alpha);
      if (++since_refactor_ >= kRefactorInterval) refactor();
    }
  }

  // --- main loop ---------------------------------------------------------------

  LpResult run() {
    LpResult result;
    std::vector<double> y(m_), alpha(m_), d(total_);
    std::size_t iter = 0, degenerate = 0;
    bool bland = false;
    const std::size_t max_iter = 50 * (m_ + n_) + 10000;
    int refactor_retries = 0;

    for (;;) {
      if (++iter > max_iter) throw NumericalError("simplex iteration limit reached");

      // Phase selection and basic costs.
      double sum_infeas = 0.0;
      std::fill(y.begin(), y.end(), 0.0);
      for (std::size_t i = 0; i < m_; ++i) {
        const std::size_t j = head_[i];
        const double inf = infeasibility(j);
        if (inf > 0.0) {
          sum_infeas += inf;
          y[i] = x_[j] < lb_[j] ? -1.0 : 1.0;
        }
      }
      const bool phase1 = sum_infeas > 0.0;
      if (!phase1) {
        for (std::size_t i = 0; i < m_; ++i) y[i] = head_[i] < n_ ? p_.cost[head_[i]] : 0.0;
      }
      btran(y);

      if (log_ && iter % 100 == 1) {
        std::fprintf(stderr, "[simplex] iter %zu phase %d infeas %.3e obj %.10g etas %zu\n", iter,
                     phase1 ? 1 : 2, sum_infeas, objective(), eta_row_.size());
      }

      // Pricing.
      std::size_t enter = total_;
      double best = 0.0;
      int dir = 0;
      for (std::size_t j = 0; j < total_; ++j) {
        const VarState s = state_[j];
        if (s == VarState::kBasic || lb_[j] == ub_[j]) continue;
        double dj = (!phase1 && j < n_) ? p_.cost[j] : 0.0;
        for_column(j, [&](std::size_t i, double v) { dj -= y[i] * v; });
        int dj_dir = 0;
        if (dj < -kDualTol && (s == VarState::kLower || s == VarState::kZero)) dj_dir = 1;
        if (dj > kDualTol && (s == VarState::kUpper || s == VarState::kZero)) dj_dir = -1;
        if (dj_dir == 0) continue;
        if (bland) {
          enter = j;
          dir = dj_dir;
          break;
        }
        if (std::fabs(dj) > best) {
          best = std::fabs(dj);
          enter = j;
          dir = dj_dir;
        }
      }

      if (enter == total_) {
        // Confirm on a fresh factorization before declaring the outcome.
        if (since_refactor_ > 0 && refactor_retries < 3) {
          ++refactor_retries;
          refactor();
          continue;
        }
        if (phase1) {
          result.status = SolveStatus::Infeasible;
          break;
        }
        result.status = SolveStatus::Optimal;
        break;
      }
      refactor_retries = 0;

      load_column(enter, alpha);
      ftran(alpha);

      // Harris pass 1: relaxed bound on the step.
      double theta_max = ub_[enter] - lb_[enter];  // bound flip
      if (!std::isfinite(theta_max)) theta_max = kInfinity;
      for (std::size_t i = 0; i < m_; ++i) {
        if (std::fabs(alpha[i]) <= kPivotTol) continue;
        const std::size_t j = head_[i];
        const double rate = -dir * alpha[i];
        const double v = x_[j];
        const double tol = kPrimalTol * (1.0 + std::fabs(v));
        double limit = kInfinity;
        if (rate < 0) {
          if (v < lb_[j] - tol) continue;
          const double bound = v > ub_[j] + tol ? ub_[j] : lb_[j];
          if (std::isfinite(bound)) limit = (v - bound + tol) / -rate;
        } else {
          if (v > ub_[j] + tol) continue;
          const double bound = v < lb_[j] - tol ? lb_[j] : ub_[j];
          if (std::isfinite(bound)) limit = (bound - v + tol) / rate;
        }
        theta_max = std::min(theta_max, limit);
      }
      if (!std::isfinite(theta_max)) {
        if (phase1) throw NumericalError("unbounded ray in phase 1");
        result.status = SolveStatus::Unbounded;
        break;
      }

      // Harris pass 2: largest pivot among rows blocking within theta_max.
      std::size_t leave = m_;
      double leave_abs = 0.0, theta = theta_max;
      double leave_bound = 0.0;
      for (std::size_t i = 0; i < m_; ++i) {
        if (std::fabs(alpha[i]) <= kPivotTol) continue;
        const std::size_t j = head_[i];
        const double rate = -dir * alpha[i];
        const double v = x_[j];
        const double tol = kPrimalTol * (1.0 + std::fabs(v));
        double bound;
        if (rate < 0) {
          if (v < lb_[j] - tol) continue;
          bound = v > ub_[j] + tol ? ub_[j] : lb_[j];
        } else {
          if (v > ub_[j] + tol) continue;
          bound = v < lb_[j] - tol ? lb_[j] : ub_[j];
        }
        if (!std::isfinite(bound)) continue;
        const double ratio = std::max(0.0, (bound - v) / rate);
        if (ratio > theta_max) continue;
        const bool better = bland ? (leave == m_ || head_[i] < head_[leave])
                                  : std::fabs(alpha[i]) > leave_abs;
        if (better) {
          leave = i;
          leave_abs = std::fabs(alpha[i]);
          theta = ratio;
          leave_bound = bound;
        }
      }
      const double flip = ub_[enter] - lb_[enter];
      const bool bound_flip = leave == m_ || (std::isfinite(flip) && flip <= theta);
      if (bound_flip) theta = flip;
      if (!std::isfinite(theta)) throw NumericalError("simplex step is not finite");

      // Update primal values.
      x_[enter] += dir * theta;
      for (std::size_t i = 0; i < m_; ++i) {
        if (alpha[i] != 0.0) x_[head_[i]] -= dir * theta * alpha[i];
      }
      if (theta <= 1e-12) {
        if (++degenerate > kDegenerateRun) bland = true;
      } else {
        degenerate = 0;
        bland = false;
      }

      if (bound_flip) {
        state_[enter] = dir > 0 ? VarState::kUpper : VarState::kLower;
        x_[enter] = nonbasic_value(enter);
        continue;
      }

      const std::size_t out = head_[leave];
      x_[out] = leave_bound;
      state_[out] = leave_bound == lb_[out] ? VarState::kLower : VarState::kUpper;
      state_[enter] = VarState::kBasic;
      head_[leave] = enter;
      push_eta(leave, alpha);
      if (++since_refactor_ >= kRefactorInterval) refactor();
    }

    if (result.status == SolveStatus::Optimal) {
      result.objective = objective();
      result.x.assign(x_.begin(), x_.begin() + static_cast<std::ptrdiff_t>(n_));
    }
    result.basis.state = state_;
    result.iterations = iter;
    return result;
  }

  double objective() const {
    double obj = 0.0;
    for (std::size_t j = 0; j < n_; ++j) obj += p_.cost[j] * x_[j];
    return obj;
  }

  const LpProblem& p_;
  std::size_t m_, n_, total_;
  std::vector<double> lb_, ub_, x_;
  std::vector<VarState> state_;
  std::vector<std::size_t> head_;
  std::vector<std::size_t> eta_row_;
  std::vector<double> eta_pivot_;
  std::vector<std::size_t> eta_start_{0};
  std::vector<std::size_t> eta_index_;
  std::vector<double> eta_value_;
  std::size_t since_refactor_ = 0;
  std::size_t dual_iterations_ = 0;
  bool log_ = false;
};

// Continuous relaxation (integrality flags ignored). Returns a basic optimal
// solution.
inline MilpSolution solve_lp(const MilpModel& model) {
  const LpProblem p = LpProblem::from_model(model);
  BoundedSimplex simplex(p);
  const LpResult r = simplex.solve();
  MilpSolution sol;
  sol.status = r.status;
  sol.iterations = r.iterations;
  if (r.status == SolveStatus::Optimal) {
    sol.objective = r.objective;
    sol.values = r.x;
    sol.best_bound = r.objective;
  }
  return sol;
}

}  // namespace odmts::milp
