#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "json.hpp"
#include "odmts/instance.hpp"
#include "odmts/milp.hpp"
#include "odmts/routegen.hpp"

namespace odmts {

using Line = std::pair<NodeIndex, NodeIndex>;

inline void require_line(NodeIndex h, NodeIndex l, const Instance& inst) {
  if (h >= inst.nodes.size() || l >= inst.nodes.size() || !inst.is_hub(h) || !inst.is_hub(l)) {
    throw InvalidArgument("bus line endpoints must be hubs");
  }
  if (h == l) throw InvalidArgument("bus line needs two distinct hubs");
}

inline double line_open_cost(NodeIndex h, NodeIndex l, const Instance& inst) {
  require_line(h, l, inst);
  const auto& cp = inst.cost;
  return (1.0 - cp.alpha) * cp.bus_cost_per_km * cp.bus_trips_per_line * inst.dist(h, l);
}

inline double line_use_cost(CommodityIndex r, NodeIndex h, NodeIndex l, const Instance& inst) {
  require_line(h, l, inst);
  return inst.commodities.at(r).passengers * inst.cost.alpha * (inst.time(h, l) + inst.cost.bus_wait);
}

inline double direct_cost(CommodityIndex r, const Instance& inst) {
  return route_cost(materialize_direct(r, inst), inst.cost, inst);
}

// All ordered pairs of distinct hubs, in hub-list order.
inline std::vector<Line> bus_lines(const Instance& inst) {
  std::vector<Line> lines;
  for (NodeIndex h : inst.hubs) {
    for (NodeIndex l : inst.hubs) {
      if (h != l) lines.emplace_back(h, l);
    }
  }
  return lines;
}

// The design MIP together with the variable layout needed to read a solution.
struct DesignModel {
  milp::MilpModel model;
  std::vector<Line> lines;
  std::vector<std::size_t> z;               // per line
  std::vector<std::vector<std::size_t>> y;  // [commodity][line]
  std::vector<Route> routes;                // distinct pickup and dropoff routes
  std::vector<std::size_t> x;               // per route
  std::vector<std::size_t> eta;             // per commodity
  std::vector<double> direct_costs;         // per commodity
};

namespace detail {

inline void check_route(const Route& w, const Instance& inst) {
  if (w.kind == RouteKind::Direct) throw InvalidArgument("direct routes are not design routes");
  if (w.hub >= inst.nodes.size() || !inst.is_hub(w.hub)) {
    throw InvalidArgument("route references an unknown hub");
  }
  if (w.commodities.empty()) throw InvalidArgument("route serves no commodity");
  for (CommodityIndex r : w.commodities) {
    if (r >= inst.commodities.size()) throw InvalidArgument("route references an unknown commodity");
  }
}

}  // namespace detail

inline DesignModel build_design_model(const Instance& inst, const RouteSet& pickups,
                                      const RouteSet& dropoffs) {
  using milp::RowSense;
  using milp::Term;
  DesignModel dm;
  auto& m = dm.model;
  const std::size_t nc = inst.commodities.size();
  dm.lines = bus_lines(inst);
  const std::size_t nl = dm.lines.size();

  auto line_tag = [&](const Line& hl) {
    return std::to_string(hl.first) + "_" + std::to_string(hl.second);
  };
  for (const auto& hl : dm.lines) {
    dm.z.push_back(m.add_binary("z_" + line_tag(hl), line_open_cost(hl.first, hl.second, inst)));
  }
  dm.y.assign(nc, {});
  for (CommodityIndex r = 0; r < nc; ++r) {
    for (const auto& hl : dm.lines) {
      dm.y[r].push_back(m.add_binary("y_" + std::to_string(r) + "_" + line_tag(hl),
                                     line_use_cost(r, hl.first, hl.second, inst)));
    }
  }

  std::map<std::tuple<RouteKind, NodeIndex, std::vector<CommodityIndex>>, std::size_t> seen;
  std::vector<std::vector<std::size_t>> omega_minus(nc), omega_plus(nc);
  for (const RouteSet* set : {&pickups, &dropoffs}) {
    for (const Route& w : set->routes) {
      detail::check_route(w, inst);
      auto [it, fresh] = seen.try_emplace({w.kind, w.hub, w.commodities}, dm.routes.size());
      if (!fresh) continue;
      const std::size_t k = dm.routes.size();
      dm.routes.push_back(w);
      dm.x.push_back(m.add_binary("x_" + std::to_string(k), w.cost));
      for (CommodityIndex r : w.served_set()) {
        (w.kind == RouteKind::Pickup ? omega_minus : omega_plus)[r].push_back(k);
      }
    }
  }
  for (CommodityIndex r = 0; r < nc; ++r) {
    dm.direct_costs.push_back(direct_cost(r, inst));
    dm.eta.push_back(m.add_binary("eta_" + std::to_string(r), dm.direct_costs.back()));
  }

  // Degree balance at every hub.
  for (NodeIndex h : inst.hubs) {
    std::vector<Term> terms;
    for (std::size_t e = 0; e < nl; ++e) {
      if (dm.lines[e].first == h) terms.push_back({dm.z[e], 1.0});
      if (dm.lines[e].second == h) terms.push_back({dm.z[e], -1.0});
    }
    m.add_constraint("balance_" + std::to_string(h), std::move(terms), RowSense::Equal, 0.0);
  }
  for (CommodityIndex r = 0; r < nc; ++r) {
    const std::string tag = std::to_string(r);
    for (int side = 0; side < 2; ++side) {
      std::vector<Term> terms{{dm.eta[r], 1.0}};
      for (std::size_t k : side == 0 ? omega_minus[r] : omega_plus[r]) terms.push_back({dm.x[k], 1.0});
      m.add_constraint((side == 0 ? "cover_pick_" : "cover_drop_") + tag, std::move(terms),
                       RowSense::GreaterEqual, 1.0);
    }
    for (std::size_t e = 0; e < nl; ++e) {
      m.add_constraint("open_" + tag + "_" + line_tag(dm.lines[e]),
                       {{dm.y[r][e], 1.0}, {dm.z[e], -1.0}}, RowSense::LessEqual, 0.0);
    }
    // Inbound bus legs and arriving pickups equal outbound legs and departing dropoffs.
    for (NodeIndex h : inst.hubs) {
      std::vector<Term> terms;
      for (std::size_t e = 0; e < nl; ++e) {
        if (dm.lines[e].second == h) terms.push_back({dm.y[r][e], 1.0});
        if (dm.lines[e].first == h) terms.push_back({dm.y[r][e], -1.0});
      }
      for (std::size_t k : omega_minus[r]) {
        if (dm.routes[k].hub == h) terms.push_back({dm.x[k], 1.0});
      }
      for (std::size_t k : omega_plus[r]) {
        if (dm.routes[k].hub == h) terms.push_back({dm.x[k], -1.0});
      }
      m.add_constraint("flow_" + tag + "_" + std::to_string(h), std::move(terms), RowSense::Equal,
                       0.0);
    }
  }
  return dm;
}

struct CostBreakdown {
  double bus_fixed = 0.0;
  double route_cost = 0.0;
  double direct_cost = 0.0;
  double bus_inconvenience = 0.0;

  double total() const { return bus_fixed + route_cost + direct_cost + bus_inconvenience; }

  friend bool operator==(const CostBreakdown&, const CostBreakdown&) = default;
};

struct DesignSolution {
  std::vector<Line> opened_lines;
  std::vector<std::vector<Line>> bus_legs;  // per commodity
  std::vector<Route> selected_routes;
  std::vector<CommodityIndex> direct;
  double objective = 0.0;
  CostBreakdown breakdown;
  double best_bound = 0.0;

  bool is_direct(CommodityIndex r) const {
    return std::binary_search(direct.begin(), direct.end(), r);
  }
};

namespace detail {

// Removes directed cycles from a 0/1 edge set; balance at every node is kept.
inline void cancel_cycles(std::vector<Line>& legs) {
  for (;;) {
    std::map<NodeIndex, std::vector<std::size_t>> out;
    for (std::size_t e = 0; e < legs.size(); ++e) out[legs[e].first].push_back(e);
    std::optional<std::vector<std::size_t>> cycle;
    std::map<NodeIndex, int> color;
    std::vector<std::size_t> stack;
    auto dfs = [&](auto&& self, NodeIndex v) -> bool {
      color[v] = 1;
      for (std::size_t e : out[v]) {
        const NodeIndex w = legs[e].second;
        stack.push_back(e);
        if (color[w] == 1) {
          std::vector<std::size_t> c;
          for (auto it = stack.rbegin(); it != stack.rend(); ++it) {
            c.push_back(*it);
            if (legs[*it].first == w) break;
          }
          cycle = std::move(c);
          return true;
        }
        if (color[w] == 0 && self(self, w)) return true;
        stack.pop_back();
      }
      color[v] = 2;
      return false;
    };
    for (const auto& [v, edges] : out) {
      if (color[v] == 0 && dfs(dfs, v)) break;
    }
    if (!cycle) return;
    std::sort(cycle->rbegin(), cycle->rend());
    for (std::size_t e : *cycle) legs.erase(legs.begin() + static_cast<std::ptrdiff_t>(e));
  }
}

}  // namespace detail

// Recomputes the breakdown from the solution's own vectors.
inline CostBreakdown design_breakdown(const DesignSolution& sol, const Instance& inst) {
  CostBreakdown b;
  for (const auto& [h, l] : sol.opened_lines) b.bus_fixed += line_open_cost(h, l, inst);
  for (const auto& w : sol.selected_routes) b.route_cost += w.cost;
  for (CommodityIndex r : sol.direct) b.direct_cost += direct_cost(r, inst);
  for (CommodityIndex r = 0; r < sol.bus_legs.size(); ++r) {
    for (const auto& [h, l] : sol.bus_legs[r]) b.bus_inconvenience += line_use_cost(r, h, l, inst);
  }
  return b;
}

inline DesignSolution extract_design(const DesignModel& dm, const milp::MilpSolution& s,
                                     const Instance& inst) {
  auto on = [&](std::size_t var) { return s.values.at(var) > 0.5; };
  DesignSolution sol;
  for (std::size_t e = 0; e < dm.lines.size(); ++e) {
    if (on(dm.z[e])) sol.opened_lines.push_back(dm.lines[e]);
  }
  sol.bus_legs.resize(dm.y.size());
  for (CommodityIndex r = 0; r < dm.y.size(); ++r) {
    for (std::size_t e = 0; e < dm.lines.size(); ++e) {
      if (on(dm.y[r][e])) sol.bus_legs[r].push_back(dm.lines[e]);
    }
    detail::cancel_cycles(sol.bus_legs[r]);
  }
  for (std::size_t k = 0; k < dm.routes.size(); ++k) {
    if (on(dm.x[k])) sol.selected_routes.push_back(dm.routes[k]);
  }
  for (CommodityIndex r = 0; r < dm.eta.size(); ++r) {
    if (on(dm.eta[r])) sol.direct.push_back(r);
  }
  sol.breakdown = design_breakdown(sol, inst);
  sol.objective = sol.breakdown.total();
  sol.best_bound = s.best_bound;
  return sol;
}

inline DesignSolution solve_design_model(const DesignModel& dm, const Instance& inst,
                                         const milp::MilpOptions& options = {}) {
  const milp::MilpSolution s = milp::solve_milp(dm.model, options);
  if (s.status != milp::SolveStatus::Optimal) {
    throw Error(std::string("design model not solved to optimality: ") + milp::to_string(s.status));
  }
  return extract_design(dm, s, inst);
}

inline DesignSolution solve_design(const Instance& inst, const RouteSet& pickups,
                                   const RouteSet& dropoffs, const milp::MilpOptions& options = {}) {
  return solve_design_model(build_design_model(inst, pickups, dropoffs), inst, options);
}

// ---------------------------------------------------------------------------
// Checks and itineraries

// Empty when all structural constraints hold on the solution vectors.
inline std::vector<std::string> design_violations(const DesignSolution& sol, const Instance& inst) {
  std::vector<std::string> out;
  std::map<NodeIndex, int> degree;
  std::set<Line> opened(sol.opened_lines.begin(), sol.opened_lines.end());
  for (const auto& [h, l] : sol.opened_lines) {
    ++degree[h];
    --degree[l];
  }
  for (const auto& [h, d] : degree) {
    if (d != 0) out.push_back("degree imbalance at hub " + inst.node_name(h));
  }
  for (CommodityIndex r = 0; r < inst.commodities.size(); ++r) {
    const std::string& id = inst.commodities[r].id;
    std::map<NodeIndex, int> net;  // inflow minus outflow
    int pick = 0, drop = 0;
    for (const auto& w : sol.selected_routes) {
      if (!w.serves(r)) continue;
      if (w.kind == RouteKind::Pickup) {
        ++pick;
        ++net[w.hub];
      } else {
        ++drop;
        --net[w.hub];
      }
    }
    const bool direct = sol.is_direct(r);
    if (!direct && pick == 0) out.push_back("commodity " + id + " has no pickup cover");
    if (!direct && drop == 0) out.push_back("commodity " + id + " has no dropoff cover");
    if (r < sol.bus_legs.size()) {
      for (const auto& hl : sol.bus_legs[r]) {
        if (!opened.count(hl)) out.push_back("commodity " + id + " rides a closed line");
        ++net[hl.second];
        --net[hl.first];
      }
    }
    for (const auto& [h, v] : net) {
      if (v != 0) out.push_back("flow imbalance for " + id + " at hub " + inst.node_name(h));
    }
  }
  return out;
}

enum class LegKind { Direct, Pickup, Bus, Dropoff };

inline const char* to_string(LegKind k) {
  switch (k) {
    case LegKind::Direct:
      return "direct";
    case LegKind::Pickup:
      return "pickup";
    case LegKind::Bus:
      return "bus";
    case LegKind::Dropoff:
      return "dropoff";
  }
  return "?";
}

struct Leg {
  LegKind kind;
  NodeIndex from;
  NodeIndex to;
  std::optional<std::size_t> route;  // index into selected_routes
};

// Direct, or pickup, bus legs along a simple hub path, dropoff.
inline std::vector<Leg> commodity_itinerary(const DesignSolution& sol, CommodityIndex r,
                                            const Instance& inst) {
  const auto& c = inst.commodities.at(r);
  std::optional<std::size_t> pickup, dropoff;
  for (std::size_t k = 0; k < sol.selected_routes.size(); ++k) {
    const auto& w = sol.selected_routes[k];
    if (!w.serves(r)) continue;
    auto& slot = w.kind == RouteKind::Pickup ? pickup : dropoff;
    if (slot) throw Error("commodity " + c.id + " is covered by several routes on one side");
    slot = k;
  }
  const auto& legs = r < sol.bus_legs.size() ? sol.bus_legs[r] : std::vector<Line>{};
  if (!pickup && !dropoff) {
    if (!legs.empty()) throw Error("commodity " + c.id + " rides buses without shuttle legs");
    return {{LegKind::Direct, c.origin, c.destination, std::nullopt}};
  }
  if (!pickup || !dropoff) throw Error("commodity " + c.id + " is covered on one side only");
  const NodeIndex start = sol.selected_routes[*pickup].hub;
  const NodeIndex end = sol.selected_routes[*dropoff].hub;
  std::vector<Leg> out{{LegKind::Pickup, c.origin, start, pickup}};
  std::vector<char> used(legs.size(), 0);
  std::set<NodeIndex> visited{start};
  NodeIndex at = start;
  for (std::size_t step = 0; step < legs.size(); ++step) {
    std::optional<std::size_t> next;
    for (std::size_t e = 0; e < legs.size(); ++e) {
      if (used[e] || legs[e].first != at) continue;
      if (next) throw Error("bus legs of " + c.id + " branch at hub " + inst.node_name(at));
      next = e;
    }
    if (!next) throw Error("bus legs of " + c.id + " do not form a path");
    used[*next] = 1;
    at = legs[*next].second;
    if (!visited.insert(at).second) throw Error("bus legs of " + c.id + " revisit a hub");
    out.push_back({LegKind::Bus, legs[*next].first, at, std::nullopt});
  }
  if (at != end) throw Error("bus legs of " + c.id + " end away from the dropoff hub");
  out.push_back({LegKind::Dropoff, end, c.destination, dropoff});
  return out;
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::json line_json(const Line& hl, const Instance& inst) {
  return nlohmann::json::array({inst.node_name(hl.first), inst.node_name(hl.second)});
}

inline Line line_from_json(const nlohmann::json& j, const Instance& inst) {
  if (!j.is_array() || j.size() != 2) throw ParseError("bus line must be a pair of hub ids");
  const NodeIndex h = inst.index_of(j[0].get<std::string>());
  const NodeIndex l = inst.index_of(j[1].get<std::string>());
  if (h == kNoNode || l == kNoNode) throw ParseError("bus line references an unknown node");
  return {h, l};
}

inline nlohmann::json design_to_json(const DesignSolution& sol, const Instance& inst) {
  using nlohmann::json;
  json j;
  j["K"] = inst.routing.shuttle_capacity;
  j["objective"] = sol.objective;
  j["best_bound"] = sol.best_bound;
  j["breakdown"] = {{"bus_fixed", sol.breakdown.bus_fixed},
                    {"route_cost", sol.breakdown.route_cost},
                    {"direct_cost", sol.breakdown.direct_cost},
                    {"bus_inconvenience", sol.breakdown.bus_inconvenience}};
  j["opened_lines"] = json::array();
  for (const auto& hl : sol.opened_lines) j["opened_lines"].push_back(line_json(hl, inst));
  j["selected_routes"] = json::array();
  for (const auto& w : sol.selected_routes) j["selected_routes"].push_back(route_to_json(w, inst));
  j["commodities"] = json::array();
  for (CommodityIndex r = 0; r < inst.commodities.size(); ++r) {
    json c;
    c["id"] = inst.commodities[r].id;
    c["direct"] = sol.is_direct(r);
    c["bus_legs"] = json::array();
    if (r < sol.bus_legs.size()) {
      for (const auto& hl : sol.bus_legs[r]) c["bus_legs"].push_back(line_json(hl, inst));
    }
    try {
      json legs = json::array();
      for (const auto& leg : commodity_itinerary(sol, r, inst)) {
        json l = {{"kind", to_string(leg.kind)},
                  {"from", inst.node_name(leg.from)},
                  {"to", inst.node_name(leg.to)}};
        if (leg.route) l["route"] = *leg.route;
        legs.push_back(l);
      }
      c["itinerary"] = legs;
    } catch (const Error&) {
      c["itinerary"] = nullptr;
    }
    j["commodities"].push_back(c);
  }
  return j;
}

inline DesignSolution design_from_json(const nlohmann::json& j, const Instance& inst) {
  DesignSolution sol;
  try {
    sol.best_bound = j.at("best_bound").get<double>();
    for (const auto& hl : j.at("opened_lines")) sol.opened_lines.push_back(line_from_json(hl, inst));
    for (const auto& w : j.at("selected_routes")) sol.selected_routes.push_back(route_from_json(w, inst));
    sol.bus_legs.resize(inst.commodities.size());
    for (const auto& c : j.at("commodities")) {
      const auto id = c.at("id").get<std::string>();
      auto it = std::find_if(inst.commodities.begin(), inst.commodities.end(),
                             [&](const Commodity& x) { return x.id == id; });
      if (it == inst.commodities.end()) throw ParseError("design references unknown commodity '" + id + "'");
      const auto r = static_cast<CommodityIndex>(it - inst.commodities.begin());
      if (c.at("direct").get<bool>()) sol.direct.push_back(r);
      for (const auto& hl : c.at("bus_legs")) sol.bus_legs[r].push_back(line_from_json(hl, inst));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed design JSON: ") + e.what());
  }
  std::sort(sol.direct.begin(), sol.direct.end());
  sol.breakdown = design_breakdown(sol, inst);
  sol.objective = sol.breakdown.total();
  return sol;
}

}  // namespace odmts
