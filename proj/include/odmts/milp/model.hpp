#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "odmts/common.hpp"

namespace odmts::milp {

enum class RowSense { LessEqual, Equal, GreaterEqual };

struct Variable {
  std::string name;
  double lb = 0.0;
  double ub = kInfinity;
  bool integer = false;
  double obj = 0.0;
};

struct Term {
  std::size_t var;
  double coef;
};

struct Constraint {
  std::string name;
  std::vector<Term> terms;
  RowSense sense = RowSense::LessEqual;
  double rhs = 0.0;
};

class ModelError : public Error {
 public:
  using Error::Error;
};

// Minimization model: bounded variables, linear rows, linear objective.
class MilpModel {
 public:
  std::size_t add_variable(std::string name, double lb, double ub, bool integer,
                           double obj = 0.0) {
    if (name.empty()) name = "x" + std::to_string(vars_.size());
    if (!var_index_.emplace(name, vars_.size()).second) {
      throw ModelError("duplicate variable name '" + name + "'");
    }
    vars_.push_back({std::move(name), lb, ub, integer, obj});
    return vars_.size() - 1;
  }

  std::size_t add_binary(std::string name, double obj = 0.0) {
    return add_variable(std::move(name), 0.0, 1.0, true, obj);
  }

  // Duplicate variables within `terms` are merged; zero coefficients dropped.
  std::size_t add_constraint(std::string name, std::vector<Term> terms, RowSense sense,
                             double rhs) {
    if (name.empty()) name = "c" + std::to_string(rows_.size());
    if (!row_index_.emplace(name, rows_.size()).second) {
      throw ModelError("duplicate constraint name '" + name + "'");
    }
    std::sort(terms.begin(), terms.end(),
              [](const Term& a, const Term& b) { return a.var < b.var; });
    std::vector<Term> merged;
    for (const auto& t : terms) {
      if (t.var >= vars_.size()) throw ModelError("constraint '" + name + "' uses unknown variable");
      if (!merged.empty() && merged.back().var == t.var) {
        merged.back().coef += t.coef;
      } else {
        merged.push_back(t);
      }
    }
    std::erase_if(merged, [](const Term& t) { return t.coef == 0.0; });
    rows_.push_back({std::move(name), std::move(merged), sense, rhs});
    return rows_.size() - 1;
  }

  void set_objective(std::size_t var, double coef) { vars_.at(var).obj = coef; }
  void set_bounds(std::size_t var, double lb, double ub) {
    vars_.at(var).lb = lb;
    vars_.at(var).ub = ub;
  }

  const std::vector<Variable>& variables() const { return vars_; }
  const std::vector<Constraint>& constraints() const { return rows_; }
  std::size_t num_variables() const { return vars_.size(); }
  std::size_t num_constraints() const { return rows_.size(); }

  std::optional<std::size_t> find_variable(const std::string& name) const {
    auto it = var_index_.find(name);
    if (it == var_index_.end()) return std::nullopt;
    return it->second;
  }

  std::optional<std::size_t> find_constraint(const std::string& name) const {
    auto it = row_index_.find(name);
    if (it == row_index_.end()) return std::nullopt;
    return it->second;
  }

  bool has_integers() const {
    return std::any_of(vars_.begin(), vars_.end(), [](const Variable& v) { return v.integer; });
  }

  // Throws ModelError unless all numbers are finite (bounds may be infinite)
  // and every variable has lb <= ub.
  void check() const {
    for (const auto& v : vars_) {
      if (!std::isfinite(v.obj)) throw ModelError("non-finite objective on '" + v.name + "'");
      if (std::isnan(v.lb) || std::isnan(v.ub) || v.lb > v.ub || v.lb == kInfinity ||
          v.ub == -kInfinity) {
        throw ModelError("inconsistent bounds on '" + v.name + "'");
      }
    }
    for (const auto& r : rows_) {
      if (!std::isfinite(r.rhs)) throw ModelError("non-finite rhs on '" + r.name + "'");
      for (const auto& t : r.terms) {
        if (!std::isfinite(t.coef)) throw ModelError("non-finite coefficient in '" + r.name + "'");
      }
    }
  }

  double objective_value(const std::vector<double>& x) const {
    double obj = 0.0;
    for (std::size_t j = 0; j < vars_.size(); ++j) obj += vars_[j].obj * x[j];
    return obj;
  }

  double row_activity(std::size_t row, const std::vector<double>& x) const {
    double a = 0.0;
    for (const auto& t : rows_[row].terms) a += t.coef * x[t.var];
    return a;
  }

  // Largest violation of any row or bound by `x`.
  double max_violation(const std::vector<double>& x) const {
    double worst = 0.0;
    for (std::size_t j = 0; j < vars_.size(); ++j) {
      worst = std::max({worst, vars_[j].lb - x[j], x[j] - vars_[j].ub});
    }
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      const double a = row_activity(i, x);
      switch (rows_[i].sense) {
        case RowSense::LessEqual:
          worst = std::max(worst, a - rows_[i].rhs);
          break;
        case RowSense::GreaterEqual:
          worst = std::max(worst, rows_[i].rhs - a);
          break;
        case RowSense::Equal:
          worst = std::max(worst, std::fabs(a - rows_[i].rhs));
          break;
      }
    }
    return worst;
  }

  double max_integrality_violation(const std::vector<double>& x) const {
    double worst = 0.0;
    for (std::size_t j = 0; j < vars_.size(); ++j) {
      if (vars_[j].integer) worst = std::max(worst, std::fabs(x[j] - std::round(x[j])));
    }
    return worst;
  }

 private:
  std::vector<Variable> vars_;
  std::vector<Constraint> rows_;
  std::unordered_map<std::string, std::size_t> var_index_;
  std::unordered_map<std::string, std::size_t> row_index_;
};

enum class SolveStatus { Optimal, Infeasible, Unbounded };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal:
      return "optimal";
    case SolveStatus::Infeasible:
      return "infeasible";
    case SolveStatus::Unbounded:
      return "unbounded";
  }
  return "?";
}

struct MilpSolution {
  SolveStatus status = SolveStatus::Infeasible;
  double objective = 0.0;
  std::vector<double> values;
  double best_bound = -kInfinity;
  std::size_t iterations = 0;
  std::size_t nodes = 0;

  double value(std::size_t var) const { return values.at(var); }
};

// Simplex exceeded its pivot budget or lost numerical control.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Branch-and-bound effort limit reached before optimality was proven.
class SolveLimitError : public Error {
 public:
  SolveLimitError(const std::string& what, std::optional<MilpSolution> incumbent, double bound)
      : Error(what), incumbent_(std::move(incumbent)), bound_(bound) {}

  const std::optional<MilpSolution>& incumbent() const { return incumbent_; }
  double bound() const { return bound_; }

 private:
  std::optional<MilpSolution> incumbent_;
  double bound_;
};

inline constexpr double kFeasibilityTol = 1e-6;
inline constexpr double kIntegralityTol = 1e-6;
inline constexpr double kRelativeGap = 1e-6;

}  // namespace odmts::milp
