#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <memory>
#include <optional>
#include <vector>

#include "odmts/milp/model.hpp"
#include "odmts/milp/simplex.hpp"

namespace odmts::milp {

struct MilpOptions {
  std::size_t node_limit = 2'000'000;
  double time_limit_seconds = kInfinity;
  std::size_t reprioritize_every = 1000;
};

namespace detail {

struct BoundChange {
  std::size_t var;
  double lb, ub;
};

struct Node {
  std::vector<BoundChange> changes;  // relative to the root bounds
  std::shared_ptr<const Basis> basis;
  double bound;  // parent LP objective
};

inline bool prunable(double bound, double incumbent) {
  if (!std::isfinite(incumbent)) return false;
  return bound >= incumbent - kRelativeGap * std::max(1.0, std::fabs(incumbent));
}

}  // namespace detail

// LP-based branch-and-bound. Most-fractional branching (ties: lowest index),
// depth-first with the rounding-side child first, and every
// `reprioritize_every` nodes the open list is reordered so the best bound is
// explored next.
inline MilpSolution solve_milp(const MilpModel& model, const MilpOptions& options = {}) {
  const LpProblem p = LpProblem::from_model(model);
  for (const auto& v : model.variables()) {
    if (v.integer && (!std::isfinite(v.lb) || !std::isfinite(v.ub))) {
      throw ModelError("integer variable '" + v.name + "' must be bounded");
    }
  }
  // Empty rows decide feasibility on their own.
  for (const auto& row : model.constraints()) {
    if (!row.terms.empty()) continue;
    const bool ok = (row.sense == RowSense::LessEqual && 0.0 <= row.rhs + kFeasibilityTol) ||
                    (row.sense == RowSense::GreaterEqual && 0.0 >= row.rhs - kFeasibilityTol) ||
                    (row.sense == RowSense::Equal && std::fabs(row.rhs) <= kFeasibilityTol);
    if (!ok) return MilpSolution{};
  }

  const std::size_t n = p.cols;
  std::vector<double> root_lb(n), root_ub(n);
  std::vector<char> integer(n, 0);
  for (std::size_t j = 0; j < n; ++j) {
    const auto& v = model.variables()[j];
    integer[j] = v.integer;
    root_lb[j] = v.integer ? std::ceil(v.lb - kIntegralityTol) : v.lb;
    root_ub[j] = v.integer ? std::floor(v.ub + kIntegralityTol) : v.ub;
    if (root_lb[j] > root_ub[j]) return MilpSolution{};
  }

  const bool log = solve_log_enabled();
  const auto started = std::chrono::steady_clock::now();
  BoundedSimplex simplex(p);
  std::optional<MilpSolution> incumbent;
  double incumbent_obj = kInfinity;
  std::size_t nodes = 0, iterations = 0;

  std::vector<detail::Node> open;
  open.push_back({{}, nullptr, -kInfinity});
  std::vector<double> lb, ub;

  auto open_bound = [&] {
    double b = incumbent_obj;
    for (const auto& node : open) b = std::min(b, node.bound);
    return b;
  };

  while (!open.empty()) {
    if (nodes >= options.node_limit ||
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count() >
            options.time_limit_seconds) {
      throw SolveLimitError("branch-and-bound effort limit reached", incumbent, open_bound());
    }
    if (options.reprioritize_every > 0 && nodes > 0 && nodes % options.reprioritize_every == 0) {
      std::stable_sort(open.begin(), open.end(), [](const detail::Node& a, const detail::Node& b) {
        return a.bound > b.bound;
      });
    }
    detail::Node node = std::move(open.back());
    open.pop_back();
    if (detail::prunable(node.bound, incumbent_obj)) continue;
    ++nodes;

    lb = root_lb;
    ub = root_ub;
    for (const auto& c : node.changes) {
      lb[c.var] = c.lb;
      ub[c.var] = c.ub;
    }
    LpResult lp = simplex.solve(lb, ub, node.basis.get());
    iterations += lp.iterations;
    if (lp.status == SolveStatus::Unbounded) {
      if (nodes == 1) {
        MilpSolution sol;
        sol.status = SolveStatus::Unbounded;
        sol.iterations = iterations;
        sol.nodes = nodes;
        return sol;
      }
      throw NumericalError("unbounded LP below the root of a bounded-integer model");
    }
    if (lp.status != SolveStatus::Optimal) continue;
    if (detail::prunable(lp.objective, incumbent_obj)) continue;

    std::size_t branch_var = n;
    double best_frac = -1.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (!integer[j]) continue;
      const double f = lp.x[j] - std::floor(lp.x[j]);
      if (f <= kIntegralityTol || f >= 1.0 - kIntegralityTol) continue;
      const double score = 0.5 - std::fabs(f - 0.5);
      if (score > best_frac) {
        best_frac = score;
        branch_var = j;
      }
    }

    if (branch_var == n) {
      MilpSolution sol;
      sol.status = SolveStatus::Optimal;
      sol.values = lp.x;
      for (std::size_t j = 0; j < n; ++j) {
        if (integer[j]) sol.values[j] = std::round(sol.values[j]);
      }
      sol.objective = model.objective_value(sol.values);
      incumbent_obj = sol.objective;
      incumbent = std::move(sol);
      if (log) {
        std::fprintf(stderr, "[bnb] node %zu incumbent %.10g open %zu\n", nodes, incumbent_obj,
                     open.size());
      }
      continue;
    }

    const double v = lp.x[branch_var];
    auto basis = std::make_shared<const Basis>(std::move(lp.basis));
    detail::Node down{node.changes, basis, lp.objective};
    down.changes.push_back({branch_var, lb[branch_var], std::floor(v)});
    detail::Node up{std::move(node.changes), basis, lp.objective};
    up.changes.push_back({branch_var, std::ceil(v), ub[branch_var]});
    // The child on the rounding side is explored first (pushed last).
    if (v - std::floor(v) >= 0.5) {
      open.push_back(std::move(down));
      open.push_back(std::move(up));
    } else {
      open.push_back(std::move(up));
      open.push_back(std::move(down));
    }
    if (log && nodes % 100 == 0) {
      std::fprintf(stderr, "[bnb] node %zu lp %.10g incumbent %.10g open %zu\n", nodes,
                   lp.objective, incumbent_obj, open.size());
    }
  }

  if (!incumbent) {
    MilpSolution sol;
    sol.iterations = iterations;
    sol.nodes = nodes;
    return sol;
  }
  incumbent->best_bound = incumbent->objective;
  incumbent->iterations = iterations;
  incumbent->nodes = nodes;
  return *incumbent;
}

}  // namespace odmts::milp
