#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "json.hpp"
#include "odmts/design.hpp"
#include "odmts/instance.hpp"
#include "odmts/milp.hpp"

namespace odmts {

struct Task {
  std::string id;
  NodeIndex start_loc = kNoNode;
  NodeIndex end_loc = kNoNode;
  double start = 0.0;
  double duration = 0.0;

  friend bool operator==(const Task&, const Task&) = default;
};

inline bool task_before(const Task& a, const Task& b) {
  if (a.start != b.start) return a.start < b.start;
  return a.id < b.id;
}

// Sorted by (start, id), which is the order every fleet routine assumes.
inline std::vector<Task> routes_to_tasks(const DesignSolution& sol, const Instance& inst) {
  std::vector<Task> tasks;
  std::size_t pick = 0, drop = 0;
  for (const auto& w : sol.selected_routes) {
    if (w.kind == RouteKind::Pickup) {
      tasks.push_back({"pickup-" + std::to_string(pick++),
                       inst.commodities.at(w.commodities.front()).origin, w.hub, w.start_time,
                       w.duration});
    } else if (w.kind == RouteKind::Dropoff) {
      tasks.push_back({"dropoff-" + std::to_string(drop++), w.hub,
                       inst.commodities.at(w.commodities.back()).destination, w.start_time,
                       w.duration});
    }
  }
  for (CommodityIndex r : sol.direct) {
    const auto& c = inst.commodities.at(r);
    for (int k = 0; k < c.passengers; ++k) {
      tasks.push_back({"direct-" + c.id + "-" + std::to_string(k), c.origin, c.destination,
                       c.depart, inst.time(c.origin, c.destination)});
    }
  }
  std::sort(tasks.begin(), tasks.end(), task_before);
  return tasks;
}

// A shuttle finishing `a` can still start `b` on time, and `a` comes first
// in the (start, id) order.
inline bool compatible(const Task& a, const Task& b, const Instance& inst) {
  if (!task_before(a, b)) return false;
  return leq_eps(a.start + a.duration + inst.time(a.end_loc, b.start_loc), b.start);
}

enum class Formulation { Dense, Sparse };

inline const char* to_string(Formulation f) { return f == Formulation::Dense ? "dense" : "sparse"; }

inline Formulation formulation_from_string(const std::string& s) {
  if (s == "dense") return Formulation::Dense;
  if (s == "sparse") return Formulation::Sparse;
  throw InvalidArgument("unknown formulation '" + s + "' (expected dense or sparse)");
}

// Nodes 0..n-1 are tasks, n is the source and n+1 the sink.
struct FleetGraph {
  Formulation kind = Formulation::Dense;
  std::vector<Task> tasks;
  std::vector<std::pair<std::size_t, std::size_t>> arcs;

  std::size_t source() const { return tasks.size(); }
  std::size_t sink() const { return tasks.size() + 1; }

  std::size_t task_arc_count() const {
    return static_cast<std::size_t>(std::count_if(arcs.begin(), arcs.end(), [&](const auto& a) {
      return a.first < source() && a.second < source();
    }));
  }
};

namespace detail {

inline void require_sorted(const std::vector<Task>& tasks) {
  for (std::size_t i = 1; i < tasks.size(); ++i) {
    if (task_before(tasks[i], tasks[i - 1])) {
      throw InvalidArgument("tasks must be sorted by start time and id");
    }
  }
}

// Row i: bitset of tasks compatible after task i. Rows are filled in parallel.
inline std::vector<std::vector<std::uint64_t>> successor_sets(const std::vector<Task>& tasks,
                                                              const Instance& inst,
                                                              unsigned threads) {
  const std::size_t n = tasks.size(), words = (n + 63) / 64;
  std::vector<std::vector<std::uint64_t>> succ(n, std::vector<std::uint64_t>(words, 0));
  auto fill = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (compatible(tasks[i], tasks[j], inst)) succ[i][j / 64] |= std::uint64_t{1} << (j % 64);
      }
    }
  };
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (threads == 1) {
    fill(0, n);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      // Interleaved blocks balance the triangular workload.
      pool.emplace_back([&, t] {
        for (std::size_t lo = t * 16; lo < n; lo += threads * 16) fill(lo, std::min(n, lo + 16));
      });
    }
  }
  return succ;
}

inline bool test_bit(const std::vector<std::uint64_t>& row, std::size_t j) {
  return (row[j / 64] >> (j % 64)) & 1u;
}

}  // namespace detail

inline FleetGraph build_dense_graph(std::vector<Task> tasks, const Instance& inst,
                                    unsigned threads = 1) {
  detail::require_sorted(tasks);
  FleetGraph g;
  g.kind = Formulation::Dense;
  const std::size_t n = tasks.size();
  const auto succ = detail::successor_sets(tasks, inst, threads);
  g.tasks = std::move(tasks);
  for (std::size_t i = 0; i < n; ++i) g.arcs.emplace_back(g.source(), i);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (detail::test_bit(succ[i], j)) g.arcs.emplace_back(i, j);
    }
  }
  for (std::size_t i = 0; i < n; ++i) g.arcs.emplace_back(i, g.sink());
  return g;
}

// Drops (w, m) whenever some successor w' of w also reaches m.
inline FleetGraph build_sparse_graph(std::vector<Task> tasks, const Instance& inst,
                                     unsigned threads = 1) {
  detail::require_sorted(tasks);
  FleetGraph g;
  g.kind = Formulation::Sparse;
  const std::size_t n = tasks.size(), words = (n + 63) / 64;
  const auto succ = detail::successor_sets(tasks, inst, threads);
  g.tasks = std::move(tasks);
  std::vector<std::pair<std::size_t, std::size_t>> task_arcs;
  std::vector<char> has_pred(n, 0), has_succ(n, 0);
  std::vector<std::uint64_t> reach(words);
  for (std::size_t i = 0; i < n; ++i) {
    std::fill(reach.begin(), reach.end(), 0);
    for (std::size_t k = i + 1; k < n; ++k) {
      if (!detail::test_bit(succ[i], k)) continue;
      for (std::size_t w = 0; w < words; ++w) reach[w] |= succ[k][w];
    }
    for (std::size_t j = i + 1; j < n; ++j) {
      if (detail::test_bit(succ[i], j) && !detail::test_bit(reach, j)) {
        task_arcs.emplace_back(i, j);
        has_succ[i] = has_pred[j] = 1;
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!has_pred[i]) g.arcs.emplace_back(g.source(), i);
  }
  g.arcs.insert(g.arcs.end(), task_arcs.begin(), task_arcs.end());
  for (std::size_t i = 0; i < n; ++i) {
    if (!has_succ[i]) g.arcs.emplace_back(i, g.sink());
  }
  return g;
}

inline FleetGraph build_fleet_graph(std::vector<Task> tasks, const Instance& inst, Formulation f,
                                    unsigned threads = 1) {
  return f == Formulation::Dense ? build_dense_graph(std::move(tasks), inst, threads)
                                 : build_sparse_graph(std::move(tasks), inst, threads);
}

struct FleetResult {
  Formulation kind = Formulation::Dense;
  int fleet_size = 0;
  std::vector<std::vector<std::size_t>> schedules;  // task indices in visiting order
  std::vector<double> flow;                         // per graph arc
  double lp_integrality_violation = 0.0;            // of the raw LP solution
};

// Dense: each task entered exactly once, unit arc capacities. Sparse: each
// task entered at least once, uncapacitated arcs.
inline milp::MilpModel fleet_model(const FleetGraph& g) {
  using milp::RowSense;
  using milp::Term;
  milp::MilpModel m;
  const bool dense = g.kind == Formulation::Dense;
  const std::size_t n = g.tasks.size();
  std::vector<std::vector<Term>> in(n), out(n);
  for (std::size_t a = 0; a < g.arcs.size(); ++a) {
    const auto [u, v] = g.arcs[a];
    const double obj = u == g.source() ? 1.0 : 0.0;
    const auto var = m.add_variable("v_" + std::to_string(u) + "_" + std::to_string(v), 0.0,
                                    dense ? 1.0 : kInfinity, !dense, obj);
    if (v < n) in[v].push_back({var, 1.0});
    if (u < n) out[u].push_back({var, 1.0});
  }
  for (std::size_t i = 0; i < n; ++i) {
    m.add_constraint("visit_" + std::to_string(i), in[i],
                     dense ? RowSense::Equal : RowSense::GreaterEqual, 1.0);
  }
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<Term> terms = in[i];
    for (const auto& t : out[i]) terms.push_back({t.var, -1.0});
    m.add_constraint("conserve_" + std::to_string(i), std::move(terms), RowSense::Equal, 0.0);
  }
  return m;
}

// Repeatedly follows positive flow from the source, always to the smallest
// successor index, and assigns the path's not yet covered tasks to a new
// shuttle.
inline std::vector<std::vector<std::size_t>> recover_schedules(const FleetGraph& g,
                                                               const std::vector<double>& flow) {
  if (flow.size() != g.arcs.size()) throw InvalidArgument("flow size does not match the graph");
  const std::size_t n = g.tasks.size();
  std::vector<std::vector<std::size_t>> out_arcs(n + 2);
  std::vector<long long> units(flow.size());
  for (std::size_t a = 0; a < flow.size(); ++a) {
    const double r = std::round(flow[a]);
    if (std::fabs(flow[a] - r) > milp::kIntegralityTol || r < 0) {
      throw InvalidArgument("flow is not integral");
    }
    units[a] = static_cast<long long>(r);
    out_arcs[g.arcs[a].first].push_back(a);
  }
  for (auto& arcs : out_arcs) {
    std::sort(arcs.begin(), arcs.end(),
              [&](std::size_t a, std::size_t b) { return g.arcs[a].second < g.arcs[b].second; });
  }
  auto next_arc = [&](std::size_t u) -> std::optional<std::size_t> {
    for (std::size_t a : out_arcs[u]) {
      if (units[a] > 0) return a;
    }
    return std::nullopt;
  };
  std::vector<char> covered(n, 0);
  std::vector<std::vector<std::size_t>> schedules;
  while (auto first = next_arc(g.source())) {
    std::vector<std::size_t> schedule;
    std::size_t a = *first;
    for (std::size_t steps = 0;; ++steps) {
      if (steps > n + 1) throw InvalidArgument("flow contains a cycle");
      --units[a];
      const std::size_t v = g.arcs[a].second;
      if (v == g.sink()) break;
      if (!covered[v]) {
        covered[v] = 1;
        schedule.push_back(v);
      }
      auto nxt = next_arc(v);
      if (!nxt) throw InvalidArgument("flow is not conserved at a task");
      a = *nxt;
    }
    if (schedule.empty()) throw InvalidArgument("a flow unit covers no new task");
    schedules.push_back(std::move(schedule));
  }
  if (std::any_of(units.begin(), units.end(), [](long long u) { return u != 0; })) {
    throw InvalidArgument("flow left after all source units were traced");
  }
  if (std::count(covered.begin(), covered.end(), 1) != static_cast<std::ptrdiff_t>(n)) {
    throw InvalidArgument("flow leaves some task uncovered");
  }
  return schedules;
}

inline FleetResult solve_fleet(const FleetGraph& g) {
  FleetResult res;
  res.kind = g.kind;
  if (g.tasks.empty()) return res;
  const milp::MilpModel m = fleet_model(g);
  const milp::MilpSolution lp = milp::solve_lp(m);
  if (lp.status != milp::SolveStatus::Optimal) {
    throw Error(std::string("fleet model not solved: ") + milp::to_string(lp.status));
  }
  res.lp_integrality_violation = 0.0;
  for (double v : lp.values) {
    res.lp_integrality_violation = std::max(res.lp_integrality_violation, std::fabs(v - std::round(v)));
  }
  if (res.lp_integrality_violation > milp::kIntegralityTol) {
    throw milp::NumericalError("fleet LP relaxation returned a fractional solution");
  }
  res.flow.reserve(lp.values.size());
  for (double v : lp.values) res.flow.push_back(std::round(v));
  res.fleet_size = static_cast<int>(std::llround(lp.objective));
  res.schedules = recover_schedules(g, res.flow);
  if (static_cast<int>(res.schedules.size()) != res.fleet_size) {
    throw Error("recovered schedule count differs from the fleet optimum");
  }
  return res;
}

inline FleetResult solve_fleet_dense(const FleetGraph& g) {
  if (g.kind != Formulation::Dense) throw InvalidArgument("expected a dense fleet graph");
  return solve_fleet(g);
}

inline FleetResult solve_fleet_sparse(const FleetGraph& g) {
  if (g.kind != Formulation::Sparse) throw InvalidArgument("expected a sparse fleet graph");
  return solve_fleet(g);
}

// Minimum path cover of the compatibility order: tasks minus a maximum
// bipartite matching.
inline int min_fleet_oracle(const std::vector<Task>& tasks, const Instance& inst) {
  const std::size_t n = tasks.size();
  std::vector<std::vector<std::size_t>> adj(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j && compatible(tasks[i], tasks[j], inst)) adj[i].push_back(j);
    }
  }
  std::vector<std::size_t> match_right(n, kNoNode);
  std::vector<char> seen;
  auto augment = [&](auto&& self, std::size_t u) -> bool {
    for (std::size_t v : adj[u]) {
      if (seen[v]) continue;
      seen[v] = 1;
      if (match_right[v] == kNoNode || self(self, match_right[v])) {
        match_right[v] = u;
        return true;
      }
    }
    return false;
  };
  int matched = 0;
  for (std::size_t u = 0; u < n; ++u) {
    seen.assign(n, 0);
    if (augment(augment, u)) ++matched;
  }
  return static_cast<int>(n) - matched;
}

// Consecutive-pair violations across all schedules plus partition errors.
inline std::vector<std::string> schedule_violations(const FleetResult& res,
                                                    const std::vector<Task>& tasks,
                                                    const Instance& inst) {
  std::vector<std::string> out;
  std::vector<int> seen(tasks.size(), 0);
  for (const auto& s : res.schedules) {
    if (s.empty()) out.push_back("empty schedule");
    for (std::size_t k = 0; k < s.size(); ++k) {
      if (s[k] >= tasks.size()) {
        out.push_back("schedule references unknown task");
        continue;
      }
      ++seen[s[k]];
      if (k > 0 && !compatible(tasks[s[k - 1]], tasks[s[k]], inst)) {
        out.push_back("task " + tasks[s[k]].id + " cannot follow " + tasks[s[k - 1]].id);
      }
    }
  }
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    if (seen[i] != 1) {
      out.push_back("task " + tasks[i].id + " appears " + std::to_string(seen[i]) + " times");
    }
  }
  if (static_cast<int>(res.schedules.size()) != res.fleet_size) {
    out.push_back("schedule count differs from fleet size");
  }
  return out;
}

inline nlohmann::json fleet_to_json(const FleetResult& res, const FleetGraph& g,
                                    const Instance& inst) {
  using nlohmann::json;
  json j;
  j["formulation"] = to_string(res.kind);
  j["fleet_size"] = res.fleet_size;
  j["tasks"] = json::array();
  for (const auto& t : g.tasks) {
    j["tasks"].push_back({{"id", t.id},
                          {"start_loc", inst.node_name(t.start_loc)},
                          {"end_loc", inst.node_name(t.end_loc)},
                          {"start", t.start},
                          {"duration", t.duration}});
  }
  j["schedules"] = json::array();
  for (const auto& s : res.schedules) {
    json ids = json::array();
    for (std::size_t t : s) ids.push_back(g.tasks[t].id);
    j["schedules"].push_back(ids);
  }
  auto label = [&](std::size_t v) -> std::string {
    if (v == g.source()) return "source";
    if (v == g.sink()) return "sink";
    return g.tasks[v].id;
  };
  j["arc_count"] = g.arcs.size();
  j["flow"] = json::array();
  for (std::size_t a = 0; a < res.flow.size(); ++a) {
    if (res.flow[a] == 0.0) continue;
    j["flow"].push_back({label(g.arcs[a].first), label(g.arcs[a].second), res.flow[a]});
  }
  return j;
}

}  // namespace odmts
