#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "json.hpp"
#include "odmts/common.hpp"
#include "odmts/instance.hpp"

namespace odmts {

enum class RouteKind { Pickup, Dropoff, Direct };

inline const char* to_string(RouteKind k) {
  switch (k) {
    case RouteKind::Pickup:
      return "pickup";
    case RouteKind::Dropoff:
      return "dropoff";
    case RouteKind::Direct:
      return "direct";
  }
  return "?";
}

inline RouteKind route_kind_from_string(const std::string& s) {
  if (s == "pickup") return RouteKind::Pickup;
  if (s == "dropoff") return RouteKind::Dropoff;
  if (s == "direct") return RouteKind::Direct;
  throw ParseError("unknown route kind '" + s + "'");
}

using Arc = std::pair<NodeIndex, NodeIndex>;

// A materialized shuttle route. For pickup routes `commodities` is the pickup
// order and the route ends at `hub`; for dropoff routes it is the dropoff order
// and the route starts at `hub`. xi[j] is the time commodity j spends on the
// route (dropoff: including its wait at the hub).
struct Route {
  RouteKind kind = RouteKind::Pickup;
  std::vector<CommodityIndex> commodities;
  NodeIndex hub = kNoNode;
  std::vector<double> xi;
  int passengers = 0;
  std::vector<Arc> arcs;
  double dist = 0.0;
  double cost = 0.0;
  double start_time = 0.0;
  // Pickup: xi of the first commodity. Dropoff: drive time from the hub
  // through all stops, excluding hub waiting. Direct: T(or, de).
  double duration = 0.0;

  std::size_t size() const { return commodities.size(); }

  std::vector<CommodityIndex> served_set() const {
    auto s = commodities;
    std::sort(s.begin(), s.end());
    return s;
  }

  double xi_of(CommodityIndex r) const {
    for (std::size_t j = 0; j < commodities.size(); ++j) {
      if (commodities[j] == r) return xi[j];
    }
    throw InvalidArgument("commodity is not served by this route");
  }

  bool serves(CommodityIndex r) const {
    return std::find(commodities.begin(), commodities.end(), r) != commodities.end();
  }
};

// Feasible first (H_r^-) and last (H_r^+) hubs per commodity, nearest first.
struct HubSets {
  std::vector<std::vector<NodeIndex>> first;
  std::vector<std::vector<NodeIndex>> last;
};

inline HubSets compute_hub_sets(const Instance& inst) {
  HubSets hs;
  const auto nearest = [&](auto&& travel, int count) {
    std::vector<NodeIndex> hubs = inst.hubs;
    std::stable_sort(hubs.begin(), hubs.end(), [&](NodeIndex a, NodeIndex b) {
      const double ta = travel(a), tb = travel(b);
      if (ta != tb) return ta < tb;
      return a < b;
    });
    hubs.resize(std::min<std::size_t>(hubs.size(), static_cast<std::size_t>(count)));
    return hubs;
  };
  for (const auto& r : inst.commodities) {
    hs.first.push_back(
        nearest([&](NodeIndex h) { return inst.time(r.origin, h); }, inst.routing.first_hub_count));
    hs.last.push_back(nearest([&](NodeIndex h) { return inst.time(h, r.destination); },
                              inst.routing.last_hub_count));
  }
  return hs;
}

// t1(r, l) = t0(r) + mean over h in H_r^- of (T(or, h) + S + T(h, l)).
inline double estimate_hub_arrival(const Instance& inst, CommodityIndex r, NodeIndex l,
                                   const HubSets& hs) {
  const auto& c = inst.commodities.at(r);
  const auto& first = hs.first.at(r);
  if (first.empty()) throw InvalidArgument("commodity '" + c.id + "' has no feasible first hub");
  double sum = 0.0;
  for (NodeIndex h : first) sum += inst.time(c.origin, h) + inst.cost.bus_wait + inst.time(h, l);
  return c.depart + sum / static_cast<double>(first.size());
}

// Per (commodity, hub) values: t1 estimates or additive offsets on them.
class HubTable {
 public:
  HubTable() = default;
  HubTable(const Instance& inst, double fill)
      : hub_count_(inst.hubs.size()),
        position_(inst.node_count(), kNoNode),
        values_(inst.commodities.size() * inst.hubs.size(), fill) {
    for (std::size_t k = 0; k < inst.hubs.size(); ++k) {
      if (inst.hubs[k] < position_.size()) position_[inst.hubs[k]] = k;
    }
  }

  double at(CommodityIndex r, NodeIndex hub) const { return values_[slot(r, hub)]; }
  double& at(CommodityIndex r, NodeIndex hub) { return values_[slot(r, hub)]; }
  bool empty() const { return values_.empty(); }

 private:
  std::size_t slot(CommodityIndex r, NodeIndex hub) const {
    if (hub >= position_.size() || position_[hub] == kNoNode) {
      throw InvalidArgument("node is not a hub");
    }
    return r * hub_count_ + position_[hub];
  }

  std::size_t hub_count_ = 0;
  std::vector<std::size_t> position_;
  std::vector<double> values_;
};

// Everything route generation needs about one instance: hub sets and the
// (possibly perturbed) hub arrival estimates.
struct RoutingContext {
  const Instance* inst = nullptr;
  HubSets hubs;
  HubTable arrival;

  const Instance& instance() const { return *inst; }

  bool in_first(CommodityIndex r, NodeIndex h) const {
    const auto& v = hubs.first[r];
    return std::find(v.begin(), v.end(), h) != v.end();
  }
  bool in_last(CommodityIndex r, NodeIndex h) const {
    const auto& v = hubs.last[r];
    return std::find(v.begin(), v.end(), h) != v.end();
  }
};

// Builds the routing context. `offsets`, when given, is added to every t1
// estimate before it is used for bucketing, timing or feasibility.
inline RoutingContext make_routing_context(const Instance& inst,
                                           const HubTable* offsets = nullptr) {
  RoutingContext ctx;
  ctx.inst = &inst;
  ctx.hubs = compute_hub_sets(inst);
  ctx.arrival = HubTable(inst, 0.0);
  for (CommodityIndex r = 0; r < inst.commodities.size(); ++r) {
    for (NodeIndex l : inst.hubs) {
      double t1 = estimate_hub_arrival(inst, r, l, ctx.hubs);
      if (offsets != nullptr) t1 += offsets->at(r, l);
      ctx.arrival.at(r, l) = t1;
    }
  }
  return ctx;
}

// ---------------------------------------------------------------------------
// Materialization

inline double route_cost(const Route& w, const CostParams& cp, const Instance& inst) {
  if (w.kind == RouteKind::Direct) {
    const auto& r = inst.commodities.at(w.commodities.front());
    return r.passengers * ((1.0 - cp.alpha) * cp.shuttle_cost_per_km *
                               inst.dist(r.origin, r.destination) +
                           cp.alpha * inst.time(r.origin, r.destination));
  }
  double weighted = 0.0;
  for (std::size_t j = 0; j < w.commodities.size(); ++j) {
    weighted += inst.commodities.at(w.commodities[j]).passengers * w.xi[j];
  }
  return (1.0 - cp.alpha) * cp.shuttle_cost_per_km * w.dist + cp.alpha * weighted;
}

namespace detail {

inline void finish_route(Route& w, const Instance& inst) {
  w.passengers = 0;
  for (CommodityIndex r : w.commodities) w.passengers += inst.commodities.at(r).passengers;
  w.dist = 0.0;
  for (const auto& [i, j] : w.arcs) w.dist += inst.dist(i, j);
  w.cost = route_cost(w, inst.cost, inst);
}

}  // namespace detail

// Shuttle starts at or(r1) at t0(r1), leaves stop j at max(arrival, t0(r_j)),
// and ends at hub h.
inline Route materialize_pickup(std::span<const CommodityIndex> seq, NodeIndex h,
                                const Instance& inst) {
  if (seq.empty()) throw InvalidArgument("pickup route needs at least one commodity");
  Route w;
  w.kind = RouteKind::Pickup;
  w.commodities.assign(seq.begin(), seq.end());
  w.hub = h;
  const auto& first = inst.commodities.at(seq[0]);
  double clock = first.depart;
  NodeIndex at = first.origin;
  for (std::size_t j = 1; j < seq.size(); ++j) {
    const auto& r = inst.commodities.at(seq[j]);
    w.arcs.emplace_back(at, r.origin);
    clock = std::max(clock + inst.time(at, r.origin), r.depart);
    at = r.origin;
  }
  w.arcs.emplace_back(at, h);
  const double arrival = clock + inst.time(at, h);
  for (CommodityIndex r : seq) w.xi.push_back(arrival - inst.commodities.at(r).depart);
  w.start_time = first.depart;
  w.duration = w.xi.front();
  detail::finish_route(w, inst);
  return w;
}

// Shuttle leaves hub h once every commodity has arrived (max t1) and drops
// commodities in sequence order without waiting. `t1[j]` is t1(seq[j], h).
inline Route materialize_dropoff(std::span<const CommodityIndex> seq, NodeIndex h,
                                 std::span<const double> t1, const Instance& inst) {
  if (seq.empty()) throw InvalidArgument("dropoff route needs at least one commodity");
  if (t1.size() != seq.size()) throw InvalidArgument("t1 values must match the sequence");
  Route w;
  w.kind = RouteKind::Dropoff;
  w.commodities.assign(seq.begin(), seq.end());
  w.hub = h;
  w.start_time = *std::max_element(t1.begin(), t1.end());
  double drive = 0.0;
  NodeIndex at = h;
  for (std::size_t j = 0; j < seq.size(); ++j) {
    const NodeIndex de = inst.commodities.at(seq[j]).destination;
    w.arcs.emplace_back(at, de);
    drive += inst.time(at, de);
    at = de;
    w.xi.push_back(w.start_time - t1[j] + drive);
  }
  w.duration = drive;
  detail::finish_route(w, inst);
  return w;
}

inline Route materialize_dropoff(std::span<const CommodityIndex> seq, NodeIndex h,
                                 const RoutingContext& ctx) {
  std::vector<double> t1;
  for (CommodityIndex r : seq) t1.push_back(ctx.arrival.at(r, h));
  return materialize_dropoff(seq, h, t1, ctx.instance());
}

inline Route materialize_direct(CommodityIndex r, const Instance& inst) {
  const auto& c = inst.commodities.at(r);
  Route w;
  w.kind = RouteKind::Direct;
  w.commodities = {r};
  w.arcs = {{c.origin, c.destination}};
  w.xi = {inst.time(c.origin, c.destination)};
  w.start_time = c.depart;
  w.duration = w.xi.front();
  detail::finish_route(w, inst);
  return w;
}

// Hub membership, the (1 + delta) duration bound, capacity, and one shared
// time bucket of t0 (pickup) or t1 (dropoff).
inline bool feasible(const Route& w, const RoutingContext& ctx) {
  if (w.kind == RouteKind::Direct) return true;
  const Instance& inst = ctx.instance();
  const double stretch = 1.0 + inst.routing.duration_threshold;
  if (w.passengers > inst.routing.shuttle_capacity) return false;
  std::optional<std::int64_t> bucket;
  for (std::size_t j = 0; j < w.commodities.size(); ++j) {
    const CommodityIndex r = w.commodities[j];
    const auto& c = inst.commodities[r];
    std::int64_t q = 0;
    if (w.kind == RouteKind::Pickup) {
      if (!ctx.in_first(r, w.hub)) return false;
      if (!leq_eps(w.xi[j], stretch * inst.time(c.origin, w.hub))) return false;
      q = bucket_of(c.depart, inst);
    } else {
      if (!ctx.in_last(r, w.hub)) return false;
      if (!leq_eps(w.xi[j], stretch * inst.time(w.hub, c.destination))) return false;
      q = bucket_index(ctx.arrival.at(r, w.hub), inst.horizon, inst.routing.bucket_len);
    }
    if (bucket && *bucket != q) return false;
    bucket = q;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Enumeration

// Route pool with per-commodity membership lists (Omega_r).
struct RouteSet {
  std::vector<Route> routes;
  std::vector<std::vector<std::size_t>> by_commodity;

  const std::vector<std::size_t>& of(CommodityIndex r) const { return by_commodity.at(r); }
};

// Cheaper wins; equal cost (relative 1e-12) falls back to the
// lexicographically smaller commodity sequence.
inline bool preferred_route(const Route& a, const Route& b) {
  const double tol = 1e-12 * std::max({1.0, std::fabs(a.cost), std::fabs(b.cost)});
  if (a.cost < b.cost - tol) return true;
  if (b.cost < a.cost - tol) return false;
  return a.commodities < b.commodities;
}

namespace detail {

using RouteKey = std::pair<NodeIndex, std::vector<CommodityIndex>>;
using BestRoutes = std::map<RouteKey, Route>;

inline void offer(BestRoutes& best, Route&& w) {
  RouteKey key{w.hub, w.served_set()};
  auto it = best.find(key);
  if (it == best.end()) {
    best.emplace(std::move(key), std::move(w));
  } else if (preferred_route(w, it->second)) {
    it->second = std::move(w);
  }
}

inline RouteSet assemble(BestRoutes&& best, std::size_t commodity_count) {
  RouteSet set;
  set.by_commodity.resize(commodity_count);
  std::vector<Route> routes;
  routes.reserve(best.size());
  for (auto& [key, w] : best) routes.push_back(std::move(w));
  // Deterministic order: by size, then served set, then hub.
  std::sort(routes.begin(), routes.end(), [](const Route& a, const Route& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    auto sa = a.served_set(), sb = b.served_set();
    if (sa != sb) return sa < sb;
    return a.hub < b.hub;
  });
  set.routes = std::move(routes);
  for (std::size_t k = 0; k < set.routes.size(); ++k) {
    for (CommodityIndex r : set.routes[k].commodities) set.by_commodity[r].push_back(k);
  }
  return set;
}

// Runs `work(first, last)` over [0, n) on up to `threads` workers, each with
// its own BestRoutes, and merges the results.
template <typename Work>
BestRoutes run_partitioned(std::size_t n, unsigned threads, Work work) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  std::vector<BestRoutes> partial(threads);
  if (threads == 1) {
    work(0, n, partial[0]);
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (n + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
      const std::size_t lo = std::min(n, t * chunk), hi = std::min(n, lo + chunk);
      pool.emplace_back([&, t, lo, hi] { work(lo, hi, partial[t]); });
    }
  }
  BestRoutes merged = std::move(partial[0]);
  for (unsigned t = 1; t < threads; ++t) {
    for (auto& [key, w] : partial[t]) offer(merged, std::move(w));
  }
  return merged;
}

inline void require_capacity(const Instance& inst) {
  for (const auto& r : inst.commodities) {
    if (r.passengers > inst.routing.shuttle_capacity) {
      throw InvalidArgument("commodity '" + r.id +
                            "' exceeds the shuttle capacity; split commodities first");
    }
  }
}

}  // namespace detail

// Depth-first enumeration of pickup routes: every commodity is tried as the
// first pickup at each of its first hubs; extensions are pruned as soon as an
// onboard commodity breaks its duration bound, capacity is exceeded, or the
// departure bucket differs. Only the cheapest permutation per (hub, set) is
// kept.
inline RouteSet enumerate_pickup_routes(const RoutingContext& ctx, unsigned threads = 1) {
  const Instance& inst = ctx.instance();
  detail::require_capacity(inst);
  const std::size_t n = inst.commodities.size();
  const int capacity = inst.routing.shuttle_capacity;
  const double stretch = 1.0 + inst.routing.duration_threshold;

  std::map<std::int64_t, std::vector<CommodityIndex>> by_bucket;
  std::vector<std::int64_t> bucket(n);
  for (CommodityIndex r = 0; r < n; ++r) {
    bucket[r] = bucket_of(inst.commodities[r].depart, inst);
    by_bucket[bucket[r]].push_back(r);
  }

  auto work = [&](std::size_t lo, std::size_t hi, detail::BestRoutes& best) {
    std::vector<CommodityIndex> seq;
    std::vector<char> used(n, 0);
    for (CommodityIndex r1 = lo; r1 < hi; ++r1) {
      const auto& first = inst.commodities[r1];
      for (NodeIndex h : ctx.hubs.first[r1]) {
        seq.assign(1, r1);
        detail::offer(best, materialize_pickup(seq, h, inst));
        if (capacity < 2) continue;
        used[r1] = 1;
        // State: departure from the last stop and the latest admissible hub
        // arrival over onboard commodities.
        auto extend = [&](auto&& self, NodeIndex at, double leave, double deadline,
                          int load) -> void {
          for (CommodityIndex c : by_bucket.at(bucket[r1])) {
            if (used[c]) continue;
            const auto& rc = inst.commodities[c];
            if (load + rc.passengers > capacity) continue;
            if (!ctx.in_first(c, h)) continue;
            const double dep = std::max(leave + inst.time(at, rc.origin), rc.depart);
            const double arrive = dep + inst.time(rc.origin, h);
            const double dl = std::min(deadline, rc.depart + stretch * inst.time(rc.origin, h));
            if (!leq_eps(arrive, dl)) continue;
            seq.push_back(c);
            used[c] = 1;
            detail::offer(best, materialize_pickup(seq, h, inst));
            self(self, rc.origin, dep, dl, load + rc.passengers);
            used[c] = 0;
            seq.pop_back();
          }
        };
        extend(extend, first.origin, first.depart,
               first.depart + stretch * inst.time(first.origin, h), first.passengers);
        used[r1] = 0;
      }
    }
  };
  return detail::assemble(detail::run_partitioned(n, threads, work), n);
}

// Mirror of the pickup enumeration: the hub is the start, the last-hub sets
// apply, the bound is against T(h, de), and bucketing uses t1(r, h).
inline RouteSet enumerate_dropoff_routes(const RoutingContext& ctx, unsigned threads = 1) {
  const Instance& inst = ctx.instance();
  detail::require_capacity(inst);
  const std::size_t n = inst.commodities.size();
  const int capacity = inst.routing.shuttle_capacity;
  const double stretch = 1.0 + inst.routing.duration_threshold;

  // (hub, bucket of t1) -> commodities having that hub as a last hub.
  std::map<std::pair<NodeIndex, std::int64_t>, std::vector<CommodityIndex>> groups;
  auto bucket_at = [&](CommodityIndex r, NodeIndex h) {
    return bucket_index(ctx.arrival.at(r, h), inst.horizon, inst.routing.bucket_len);
  };
  for (CommodityIndex r = 0; r < n; ++r) {
    for (NodeIndex h : ctx.hubs.last[r]) groups[{h, bucket_at(r, h)}].push_back(r);
  }

  auto work = [&](std::size_t lo, std::size_t hi, detail::BestRoutes& best) {
    std::vector<CommodityIndex> seq;
    std::vector<char> used(n, 0);
    for (CommodityIndex r1 = lo; r1 < hi; ++r1) {
      const auto& first = inst.commodities[r1];
      for (NodeIndex h : ctx.hubs.last[r1]) {
        seq.assign(1, r1);
        detail::offer(best, materialize_dropoff(seq, h, ctx));
        if (capacity < 2) continue;
        const auto& candidates = groups.at({h, bucket_at(r1, h)});
        used[r1] = 1;
        // State: hub departure (max t1), cumulative drive time, and the latest
        // admissible hub departure over onboard commodities.
        auto extend = [&](auto&& self, NodeIndex at, double start, double drive,
                          double deadline, int load) -> void {
          for (CommodityIndex c : candidates) {
            if (used[c]) continue;
            const auto& rc = inst.commodities[c];
            if (load + rc.passengers > capacity) continue;
            const double t1 = ctx.arrival.at(c, h);
            const double d = drive + inst.time(at, rc.destination);
            const double s = std::max(start, t1);
            const double dl =
                std::min(deadline, stretch * inst.time(h, rc.destination) + t1 - d);
            if (!leq_eps(s, dl)) continue;
            seq.push_back(c);
            used[c] = 1;
            detail::offer(best, materialize_dropoff(seq, h, ctx));
            self(self, rc.destination, s, d, dl, load + rc.passengers);
            used[c] = 0;
            seq.pop_back();
          }
        };
        const double t1 = ctx.arrival.at(r1, h);
        const double d = inst.time(h, first.destination);
        extend(extend, first.destination, t1, d,
               stretch * inst.time(h, first.destination) + t1 - d, first.passengers);
        used[r1] = 0;
      }
    }
  };
  return detail::assemble(detail::run_partitioned(n, threads, work), n);
}

// ---------------------------------------------------------------------------
// Route dump (JSON lines)

inline nlohmann::json route_to_json(const Route& w, const Instance& inst) {
  nlohmann::json ids = nlohmann::json::array();
  for (CommodityIndex r : w.commodities) ids.push_back(inst.commodities.at(r).id);
  nlohmann::json j{{"kind", to_string(w.kind)},
                   {"hub", w.hub == kNoNode ? nlohmann::json(nullptr)
                                            : nlohmann::json(inst.node_name(w.hub))},
                   {"commodities", std::move(ids)},
                   {"xi", w.xi},
                   {"passengers", w.passengers},
                   {"dist", w.dist},
                   {"cost", w.cost},
                   {"start_time", w.start_time},
                   {"duration", w.duration}};
  return j;
}

inline Route route_from_json(const nlohmann::json& j, const Instance& inst) {
  Route w;
  w.kind = route_kind_from_string(detail::require(j, "kind", "route").get<std::string>());
  const auto& hub = detail::require(j, "hub", "route");
  if (!hub.is_null()) {
    w.hub = inst.index_of(hub.get<std::string>());
    if (w.hub == kNoNode || !inst.is_hub(w.hub)) {
      throw InvalidArgument("route references unknown hub '" + hub.get<std::string>() + "'");
    }
  } else if (w.kind != RouteKind::Direct) {
    throw ParseError("non-direct route without hub");
  }
  for (const auto& id : detail::require(j, "commodities", "route")) {
    const auto name = id.get<std::string>();
    auto it = std::find_if(inst.commodities.begin(), inst.commodities.end(),
                           [&](const Commodity& c) { return c.id == name; });
    if (it == inst.commodities.end()) {
      throw InvalidArgument("route references unknown commodity '" + name + "'");
    }
    w.commodities.push_back(static_cast<CommodityIndex>(it - inst.commodities.begin()));
  }
  if (w.commodities.empty()) throw ParseError("route serves no commodity");
  w.xi = detail::require(j, "xi", "route").get<std::vector<double>>();
  if (w.xi.size() != w.commodities.size()) throw ParseError("route xi size mismatch");
  w.passengers = detail::integer_at(j, "passengers", "route");
  w.dist = detail::number_at(j, "dist", "route");
  w.cost = detail::number_at(j, "cost", "route");
  w.start_time = detail::number_at(j, "start_time", "route");
  w.duration = detail::number_at(j, "duration", "route");
  // Arcs follow from the stop sequence.
  if (w.kind == RouteKind::Pickup) {
    for (std::size_t k = 0; k + 1 < w.commodities.size(); ++k) {
      w.arcs.emplace_back(inst.commodities[w.commodities[k]].origin,
                          inst.commodities[w.commodities[k + 1]].origin);
    }
    w.arcs.emplace_back(inst.commodities[w.commodities.back()].origin, w.hub);
  } else if (w.kind == RouteKind::Dropoff) {
    NodeIndex at = w.hub;
    for (CommodityIndex r : w.commodities) {
      w.arcs.emplace_back(at, inst.commodities[r].destination);
      at = inst.commodities[r].destination;
    }
  } else {
    const auto& c = inst.commodities[w.commodities.front()];
    w.arcs = {{c.origin, c.destination}};
  }
  return w;
}

inline std::string routes_to_jsonl(const RouteSet& pickups, const RouteSet& dropoffs,
                                   const Instance& inst) {
  std::string out;
  for (const auto* set : {&pickups, &dropoffs}) {
    for (const auto& w : set->routes) out += route_to_json(w, inst).dump() + "\n";
  }
  return out;
}

// Splits a route dump back into pickup and dropoff sets.
inline std::pair<RouteSet, RouteSet> routes_from_jsonl(const std::string& text,
                                                       const Instance& inst) {
  detail::BestRoutes pick, drop;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Route w;
    try {
      w = route_from_json(nlohmann::json::parse(line), inst);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("route dump line " + std::to_string(lineno) + ": " + e.what());
    }
    if (w.kind == RouteKind::Pickup) {
      detail::offer(pick, std::move(w));
    } else if (w.kind == RouteKind::Dropoff) {
      detail::offer(drop, std::move(w));
    }
  }
  const std::size_t n = inst.commodities.size();
  return {detail::assemble(std::move(pick), n), detail::assemble(std::move(drop), n)};
}

}  // namespace odmts
