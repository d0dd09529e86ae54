#pragma once

#include <cmath>
#include <cstdio>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "odmts/design.hpp"
#include "odmts/fleet.hpp"
#include "odmts/instance.hpp"

namespace odmts {

struct Report {
  int capacity = 0;  // K the design was built with
  double total_cost = 0.0;
  int opened_lines = 0;
  int direct_routes = 0;  // riders on direct shuttles
  std::optional<int> fleet_size;
  std::optional<double> avg_inconvenience;
  std::optional<double> avg_shuttle_usage;
  std::optional<double> first_leg_usage;
  std::optional<double> last_leg_usage;
  CostBreakdown breakdown;
  bool connected = true;

  friend bool operator==(const Report&, const Report&) = default;
};

// End-to-end minutes for one rider of commodity r.
inline double rider_time(const DesignSolution& sol, CommodityIndex r, const Instance& inst) {
  const auto& c = inst.commodities.at(r);
  if (sol.is_direct(r)) return inst.time(c.origin, c.destination);
  std::optional<double> pick, drop;
  for (const auto& w : sol.selected_routes) {
    if (!w.serves(r)) continue;
    auto& slot = w.kind == RouteKind::Pickup ? pick : drop;
    slot = std::min(slot.value_or(kInfinity), w.xi_of(r));
  }
  if (!pick || !drop) throw InvalidArgument("commodity " + c.id + " is not covered");
  double t = *pick + *drop;
  if (r < sol.bus_legs.size()) {
    for (const auto& [h, l] : sol.bus_legs[r]) t += inst.time(h, l) + inst.cost.bus_wait;
  }
  return t;
}

inline std::optional<double> avg_inconvenience(const DesignSolution& sol, const Instance& inst) {
  double sum = 0.0;
  int riders = 0;
  for (CommodityIndex r = 0; r < inst.commodities.size(); ++r) {
    const int p = inst.commodities[r].passengers;
    sum += p * rider_time(sol, r, inst);
    riders += p;
  }
  if (riders == 0) return std::nullopt;
  return sum / riders;
}

struct ShuttleUsage {
  std::optional<double> overall;
  std::optional<double> first_leg;
  std::optional<double> last_leg;
};

// Riders per shuttle ride. Each direct rider is a ride of one.
inline ShuttleUsage avg_shuttle_usage(const DesignSolution& sol, const Instance& inst) {
  long long pick_riders = 0, pick_rides = 0, drop_riders = 0, drop_rides = 0, direct = 0;
  for (const auto& w : sol.selected_routes) {
    if (w.kind == RouteKind::Pickup) {
      pick_riders += w.passengers;
      ++pick_rides;
    } else if (w.kind == RouteKind::Dropoff) {
      drop_riders += w.passengers;
      ++drop_rides;
    }
  }
  for (CommodityIndex r : sol.direct) direct += inst.commodities.at(r).passengers;
  auto ratio = [](long long a, long long b) -> std::optional<double> {
    if (b == 0) return std::nullopt;
    return static_cast<double>(a) / static_cast<double>(b);
  };
  return {ratio(pick_riders + drop_riders + direct, pick_rides + drop_rides + direct),
          ratio(pick_riders, pick_rides), ratio(drop_riders, drop_rides)};
}

// One weakly connected component over the endpoints of opened lines.
inline bool lines_connected(const std::vector<Line>& lines) {
  std::map<NodeIndex, NodeIndex> parent;
  auto find = [&](NodeIndex v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  for (const auto& [h, l] : lines) {
    parent.try_emplace(h, h);
    parent.try_emplace(l, l);
  }
  for (const auto& [h, l] : lines) parent[find(h)] = find(l);
  std::set<NodeIndex> roots;
  for (const auto& [v, p] : parent) roots.insert(find(v));
  return roots.size() <= 1;
}

inline Report make_report(const DesignSolution& sol, const FleetResult* fleet,
                          const Instance& inst) {
  Report rep;
  rep.capacity = inst.routing.shuttle_capacity;
  rep.total_cost = sol.objective;
  rep.opened_lines = static_cast<int>(sol.opened_lines.size());
  for (CommodityIndex r : sol.direct) rep.direct_routes += inst.commodities.at(r).passengers;
  if (fleet != nullptr) rep.fleet_size = fleet->fleet_size;
  rep.avg_inconvenience = avg_inconvenience(sol, inst);
  const ShuttleUsage u = avg_shuttle_usage(sol, inst);
  rep.avg_shuttle_usage = u.overall;
  rep.first_leg_usage = u.first_leg;
  rep.last_leg_usage = u.last_leg;
  rep.breakdown = sol.breakdown;
  rep.connected = lines_connected(sol.opened_lines);
  return rep;
}

// ---------------------------------------------------------------------------
// Output

inline nlohmann::json report_to_json(const Report& r) {
  using nlohmann::json;
  auto opt = [](const auto& v) { return v ? json(*v) : json(nullptr); };
  json j = json::object();
  j["K"] = r.capacity;
  j["total_cost"] = r.total_cost;
  j["opened_bus_legs"] = r.opened_lines;
  j["direct_od_routes"] = r.direct_routes;
  j["fleet_size"] = opt(r.fleet_size);
  j["average_inconvenience"] = opt(r.avg_inconvenience);
  j["average_shuttle_usage"] = opt(r.avg_shuttle_usage);
  j["first_leg_usage"] = opt(r.first_leg_usage);
  j["last_leg_usage"] = opt(r.last_leg_usage);
  j["cost_breakdown"] = {{"bus_fixed", r.breakdown.bus_fixed},
                         {"shared_route", r.breakdown.route_cost},
                         {"direct", r.breakdown.direct_cost},
                         {"bus_inconvenience", r.breakdown.bus_inconvenience}};
  j["connected"] = r.connected;
  // Absent averages are dropped rather than written as null.
  for (const char* key : {"fleet_size", "average_inconvenience", "average_shuttle_usage",
                          "first_leg_usage", "last_leg_usage"}) {
    if (j[key].is_null()) j.erase(key);
  }
  return j;
}

inline Report report_from_json(const nlohmann::json& j) {
  Report r;
  try {
    r.capacity = j.at("K").get<int>();
    r.total_cost = j.at("total_cost").get<double>();
    r.opened_lines = j.at("opened_bus_legs").get<int>();
    r.direct_routes = j.at("direct_od_routes").get<int>();
    if (j.contains("fleet_size")) r.fleet_size = j["fleet_size"].get<int>();
    if (j.contains("average_inconvenience")) r.avg_inconvenience = j["average_inconvenience"].get<double>();
    if (j.contains("average_shuttle_usage")) r.avg_shuttle_usage = j["average_shuttle_usage"].get<double>();
    if (j.contains("first_leg_usage")) r.first_leg_usage = j["first_leg_usage"].get<double>();
    if (j.contains("last_leg_usage")) r.last_leg_usage = j["last_leg_usage"].get<double>();
    const auto& b = j.at("cost_breakdown");
    r.breakdown.bus_fixed = b.at("bus_fixed").get<double>();
    r.breakdown.route_cost = b.at("shared_route").get<double>();
    r.breakdown.direct_cost = b.at("direct").get<double>();
    r.breakdown.bus_inconvenience = b.at("bus_inconvenience").get<double>();
    r.connected = j.at("connected").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed report JSON: ") + e.what());
  }
  return r;
}

inline const char* kReportCsvHeader =
    "K,total_cost,fleet_size,direct_od_routes,opened_bus_legs,average_inconvenience,"
    "average_shuttle_usage,first_leg_usage,last_leg_usage,bus_fixed,shared_route,direct,"
    "bus_inconvenience,connected";

inline std::string report_csv_row(const Report& r) {
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return std::string(buf);
  };
  auto opt = [&](const std::optional<double>& v) { return v ? num(*v) : std::string(); };
  std::string row = std::to_string(r.capacity) + "," + num(r.total_cost) + "," +
                    (r.fleet_size ? std::to_string(*r.fleet_size) : std::string()) + "," +
                    std::to_string(r.direct_routes) + "," + std::to_string(r.opened_lines) + "," +
                    opt(r.avg_inconvenience) + "," + opt(r.avg_shuttle_usage) + "," +
                    opt(r.first_leg_usage) + "," + opt(r.last_leg_usage) + "," +
                    num(r.breakdown.bus_fixed) + "," + num(r.breakdown.route_cost) + "," +
                    num(r.breakdown.direct_cost) + "," + num(r.breakdown.bus_inconvenience) + "," +
                    (r.connected ? "true" : "false");
  return row;
}

inline std::string reports_to_csv(const std::vector<Report>& reports) {
  std::string out = std::string(kReportCsvHeader) + "\n";
  for (const auto& r : reports) out += report_csv_row(r) + "\n";
  return out;
}

enum class ReportFormat { Json, Csv };

inline void emit_report(const std::vector<Report>& reports, const std::string& path,
                        ReportFormat format) {
  std::string text;
  if (format == ReportFormat::Csv) {
    text = reports_to_csv(reports);
  } else if (reports.size() == 1) {
    text = report_to_json(reports.front()).dump(2) + "\n";
  } else {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : reports) arr.push_back(report_to_json(r));
    text = arr.dump(2) + "\n";
  }
  write_text_file(path, text);
}

inline void emit_report(const Report& report, const std::string& path, ReportFormat format) {
  emit_report(std::vector<Report>{report}, path, format);
}

}  // namespace odmts
