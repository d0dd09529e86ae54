#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "json.hpp"
#include "odmts/common.hpp"

namespace odmts {

// Dense square matrix stored row-major.
class Matrix {
 public:
  Matrix() = default;
  explicit Matrix(std::size_t n, double fill = 0.0) : n_(n), data_(n * n, fill) {}

  std::size_t size() const { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

struct Commodity {
  std::string id;
  NodeIndex origin = kNoNode;
  NodeIndex destination = kNoNode;
  int passengers = 1;
  double depart = 0.0;  // t0, minutes

  friend bool operator==(const Commodity&, const Commodity&) = default;
};

// A raw ride request before capacity splitting. Same shape as a commodity.
using Request = Commodity;

struct CostParams {
  double alpha = 1e-3;
  double shuttle_cost_per_km = 1.0;  // c
  double bus_cost_per_km = 3.75;     // b
  double bus_trips_per_line = 16.0;  // n
  double bus_wait = 7.5;             // S, minutes

  friend bool operator==(const CostParams&, const CostParams&) = default;
};

struct RoutingParams {
  int shuttle_capacity = 3;         // K
  double duration_threshold = 0.5;  // delta
  double bucket_len = 3.0;          // W, minutes
  int first_hub_count = 3;
  int last_hub_count = 3;

  friend bool operator==(const RoutingParams&, const RoutingParams&) = default;
};

struct Horizon {
  double t_min = 0.0;
  double t_max = 240.0;

  friend bool operator==(const Horizon&, const Horizon&) = default;
};

struct Instance {
  std::vector<std::string> nodes;
  std::vector<NodeIndex> hubs;
  Matrix time;  // minutes
  Matrix dist;  // kilometers
  std::vector<Commodity> commodities;
  CostParams cost;
  RoutingParams routing;
  Horizon horizon;

  // References to unknown node ids seen while loading; reported by validate.
  std::vector<std::string> dangling_refs;

  std::size_t node_count() const { return nodes.size(); }

  bool is_hub(NodeIndex v) const {
    return std::find(hubs.begin(), hubs.end(), v) != hubs.end();
  }

  const std::string& node_name(NodeIndex v) const {
    static const std::string unknown = "<unknown>";
    return v < nodes.size() ? nodes[v] : unknown;
  }

  NodeIndex index_of(const std::string& id) const {
    auto it = std::find(nodes.begin(), nodes.end(), id);
    return it == nodes.end() ? kNoNode : static_cast<NodeIndex>(it - nodes.begin());
  }

  int total_passengers() const {
    int total = 0;
    for (const auto& r : commodities) total += r.passengers;
    return total;
  }

  friend bool operator==(const Instance& a, const Instance& b) {
    return a.nodes == b.nodes && a.hubs == b.hubs && a.time == b.time && a.dist == b.dist &&
           a.commodities == b.commodities && a.cost == b.cost && a.routing == b.routing &&
           a.horizon == b.horizon;
  }
};

// ---------------------------------------------------------------------------
// JSON I/O

namespace detail {

using nlohmann::json;

inline const json& require(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) throw ParseError("expected object at '" + path + "'");
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw ParseError("missing field '" + (path.empty() ? key : path + "." + key) + "'");
  }
  return *it;
}

inline double number_at(const json& obj, const std::string& key, const std::string& path) {
  const json& v = require(obj, key, path);
  if (!v.is_number()) {
    throw ParseError("field '" + (path.empty() ? key : path + "." + key) + "' must be a number");
  }
  return v.get<double>();
}

inline int integer_at(const json& obj, const std::string& key, const std::string& path) {
  const json& v = require(obj, key, path);
  if (!v.is_number_integer()) {
    throw ParseError("field '" + (path.empty() ? key : path + "." + key) +
                     "' must be an integer");
  }
  return v.get<int>();
}

inline std::string id_string(const json& v, const std::string& path) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  throw ParseError("field '" + path + "' must be a string or integer id");
}

inline Matrix matrix_at(const json& obj, const std::string& key, std::size_t n) {
  const json& rows = require(obj, key, "");
  if (!rows.is_array() || rows.size() != n) {
    throw ParseError("field '" + key + "' must be an array of " + std::to_string(n) + " rows");
  }
  Matrix m(n);
  for (std::size_t i = 0; i < n; ++i) {
    const json& row = rows[i];
    if (!row.is_array() || row.size() != n) {
      throw ParseError("row " + std::to_string(i) + " of '" + key + "' must have " +
                       std::to_string(n) + " entries");
    }
    for (std::size_t j = 0; j < n; ++j) {
      if (!row[j].is_number()) {
        throw ParseError("entry (" + std::to_string(i) + "," + std::to_string(j) + ") of '" +
                         key + "' is not a number");
      }
      m(i, j) = row[j].get<double>();
    }
  }
  return m;
}

inline json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.size(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < m.size(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::size_t line_of_offset(const std::string& text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + offset, '\n'));
}

}  // namespace detail

inline Instance instance_from_json(const nlohmann::json& doc) {
  using detail::require;
  Instance inst;

  const auto& nodes = require(doc, "nodes", "");
  if (!nodes.is_array()) throw ParseError("field 'nodes' must be an array");
  std::unordered_map<std::string, NodeIndex> index;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    inst.nodes.push_back(detail::id_string(nodes[i], "nodes[" + std::to_string(i) + "]"));
    index.emplace(inst.nodes.back(), i);
  }
  auto resolve = [&](const std::string& id, const std::string& where) {
    auto it = index.find(id);
    if (it != index.end()) return it->second;
    inst.dangling_refs.push_back(where + " references unknown node '" + id + "'");
    return kNoNode;
  };

  const auto& hubs = require(doc, "hubs", "");
  if (!hubs.is_array()) throw ParseError("field 'hubs' must be an array");
  for (std::size_t i = 0; i < hubs.size(); ++i) {
    std::string where = "hubs[" + std::to_string(i) + "]";
    inst.hubs.push_back(resolve(detail::id_string(hubs[i], where), where));
  }

  inst.time = detail::matrix_at(doc, "time", inst.nodes.size());
  inst.dist = detail::matrix_at(doc, "dist", inst.nodes.size());

  const auto& comms = require(doc, "commodities", "");
  if (!comms.is_array()) throw ParseError("field 'commodities' must be an array");
  for (std::size_t i = 0; i < comms.size(); ++i) {
    std::string path = "commodities[" + std::to_string(i) + "]";
    const auto& c = comms[i];
    Commodity r;
    r.id = detail::id_string(require(c, "id", path), path + ".id");
    r.origin = resolve(detail::id_string(require(c, "origin", path), path + ".origin"),
                       path + ".origin");
    r.destination =
        resolve(detail::id_string(require(c, "destination", path), path + ".destination"),
                path + ".destination");
    r.passengers = detail::integer_at(c, "passengers", path);
    r.depart = detail::number_at(c, "depart", path);
    inst.commodities.push_back(std::move(r));
  }

  const auto& cost = require(doc, "cost", "");
  inst.cost.alpha = detail::number_at(cost, "alpha", "cost");
  inst.cost.shuttle_cost_per_km = detail::number_at(cost, "shuttle_cost_per_km", "cost");
  inst.cost.bus_cost_per_km = detail::number_at(cost, "bus_cost_per_km", "cost");
  inst.cost.bus_trips_per_line = detail::number_at(cost, "bus_trips_per_line", "cost");
  inst.cost.bus_wait = detail::number_at(cost, "bus_wait", "cost");

  const auto& routing = require(doc, "routing", "");
  inst.routing.shuttle_capacity = detail::integer_at(routing, "shuttle_capacity", "routing");
  inst.routing.duration_threshold = detail::number_at(routing, "duration_threshold", "routing");
  inst.routing.bucket_len = detail::number_at(routing, "bucket_len", "routing");
  inst.routing.first_hub_count = detail::integer_at(routing, "first_hub_count", "routing");
  inst.routing.last_hub_count = detail::integer_at(routing, "last_hub_count", "routing");

  const auto& horizon = require(doc, "horizon", "");
  inst.horizon.t_min = detail::number_at(horizon, "t_min", "horizon");
  inst.horizon.t_max = detail::number_at(horizon, "t_max", "horizon");
  return inst;
}

inline nlohmann::json instance_to_json(const Instance& inst) {
  nlohmann::json doc;
  doc["nodes"] = inst.nodes;
  nlohmann::json hubs = nlohmann::json::array();
  for (NodeIndex h : inst.hubs) hubs.push_back(inst.node_name(h));
  doc["hubs"] = std::move(hubs);
  doc["time"] = detail::matrix_json(inst.time);
  doc["dist"] = detail::matrix_json(inst.dist);
  nlohmann::json comms = nlohmann::json::array();
  for (const auto& r : inst.commodities) {
    comms.push_back({{"id", r.id},
                     {"origin", inst.node_name(r.origin)},
                     {"destination", inst.node_name(r.destination)},
                     {"passengers", r.passengers},
                     {"depart", r.depart}});
  }
  doc["commodities"] = std::move(comms);
  doc["cost"] = {{"alpha", inst.cost.alpha},
                 {"shuttle_cost_per_km", inst.cost.shuttle_cost_per_km},
                 {"bus_cost_per_km", inst.cost.bus_cost_per_km},
                 {"bus_trips_per_line", inst.cost.bus_trips_per_line},
                 {"bus_wait", inst.cost.bus_wait}};
  doc["routing"] = {{"shuttle_capacity", inst.routing.shuttle_capacity},
                    {"duration_threshold", inst.routing.duration_threshold},
                    {"bucket_len", inst.routing.bucket_len},
                    {"first_hub_count", inst.routing.first_hub_count},
                    {"last_hub_count", inst.routing.last_hub_count}};
  doc["horizon"] = {{"t_min", inst.horizon.t_min}, {"t_max", inst.horizon.t_max}};
  return doc;
}

inline Instance parse_instance(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("instance JSON parse error at line " +
                     std::to_string(detail::line_of_offset(text, e.byte)) + ": " + e.what());
  }
  return instance_from_json(doc);
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << text;
  if (!out) throw Error("write failed for '" + path + "'");
}

inline Instance load_instance(const std::string& path) {
  try {
    return parse_instance(read_text_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

inline void save_instance(const Instance& inst, const std::string& path) {
  write_text_file(path, instance_to_json(inst).dump(1) + "\n");
}

// ---------------------------------------------------------------------------
// Validation

struct Violation {
  std::string kind;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  bool has(const std::string& kind) const {
    return std::any_of(violations.begin(), violations.end(),
                       [&](const Violation& v) { return v.kind == kind; });
  }
};

namespace detail {

inline void check_matrix(const Instance& inst, const Matrix& m, const std::string& label,
                         ValidationReport& report, std::size_t witness_cap) {
  const std::size_t n = m.size();
  auto name = [&](std::size_t v) { return inst.node_name(v); };
  for (std::size_t i = 0; i < n; ++i) {
    if (m(i, i) != 0.0) {
      report.violations.push_back({"diagonal", label + "(" + name(i) + "," + name(i) +
                                                   ") = " + std::to_string(m(i, i)) +
                                                   " is nonzero"});
    }
    for (std::size_t j = 0; j < n; ++j) {
      if (m(i, j) < 0.0) {
        report.violations.push_back({"negative_entry", label + "(" + name(i) + "," + name(j) +
                                                           ") = " + std::to_string(m(i, j)) +
                                                           " is negative"});
      }
    }
  }
  std::size_t found = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      if (k == i) continue;
      const double ik = m(i, k);
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i || j == k) continue;
        if (m(i, j) > ik + m(k, j) + kTimeEps) {
          if (found < witness_cap) {
            std::ostringstream msg;
            msg << label << " triangle inequality violated by (" << name(i) << "," << name(k)
                << "," << name(j) << "): " << m(i, j) << " > " << ik << " + " << m(k, j);
            report.violations.push_back({"triangle_" + label, msg.str()});
          }
          ++found;
        }
      }
    }
  }
  if (found > witness_cap) {
    report.violations.push_back({"triangle_" + label, std::to_string(found - witness_cap) +
                                                          " further " + label +
                                                          " triangle violations omitted"});
  }
}

}  // namespace detail

// Checks every semantic invariant of an instance. Triangle witnesses are capped
// per matrix; the remainder is summarized in one extra entry.
inline ValidationReport validate(const Instance& inst, std::size_t witness_cap = 50) {
  ValidationReport report;
  auto add = [&](std::string kind, std::string msg) {
    report.violations.push_back({std::move(kind), std::move(msg)});
  };

  for (const auto& ref : inst.dangling_refs) add("hub_membership", ref);
  if (inst.hubs.empty()) add("hub_membership", "instance has no hubs");
  for (std::size_t a = 0; a < inst.hubs.size(); ++a) {
    for (std::size_t b = a + 1; b < inst.hubs.size(); ++b) {
      if (inst.hubs[a] != kNoNode && inst.hubs[a] == inst.hubs[b]) {
        add("hub_membership", "hub '" + inst.node_name(inst.hubs[a]) + "' listed twice");
      }
    }
  }

  detail::check_matrix(inst, inst.time, "time", report, witness_cap);
  detail::check_matrix(inst, inst.dist, "dist", report, witness_cap);

  if (inst.horizon.t_min > inst.horizon.t_max) {
    add("horizon", "t_min exceeds t_max");
  }
  for (const auto& r : inst.commodities) {
    if (r.depart < inst.horizon.t_min || r.depart > inst.horizon.t_max) {
      std::ostringstream msg;
      msg << "commodity '" << r.id << "' departs at " << r.depart << " outside horizon ["
          << inst.horizon.t_min << ", " << inst.horizon.t_max << "]";
      add("horizon", msg.str());
    }
    if (r.passengers < 1) add("commodity", "commodity '" + r.id + "' has no passengers");
    if (r.origin != kNoNode && r.origin == r.destination) {
      add("commodity", "commodity '" + r.id + "' has origin equal to destination");
    }
  }

  const auto& c = inst.cost;
  if (!(c.alpha >= 0.0 && c.alpha <= 1.0)) add("parameter", "cost.alpha must lie in [0, 1]");
  if (c.shuttle_cost_per_km < 0) add("parameter", "cost.shuttle_cost_per_km is negative");
  if (c.bus_cost_per_km < 0) add("parameter", "cost.bus_cost_per_km is negative");
  if (c.bus_trips_per_line < 0) add("parameter", "cost.bus_trips_per_line is negative");
  if (c.bus_wait < 0) add("parameter", "cost.bus_wait is negative");

  const auto& p = inst.routing;
  const int hub_count = static_cast<int>(inst.hubs.size());
  if (p.shuttle_capacity < 1) add("parameter", "routing.shuttle_capacity must be >= 1");
  if (p.duration_threshold < 0) add("parameter", "routing.duration_threshold is negative");
  if (!(p.bucket_len > 0)) add("parameter", "routing.bucket_len must be positive");
  if (p.first_hub_count < 1 || p.first_hub_count > hub_count) {
    add("parameter", "routing.first_hub_count must lie in [1, |hubs|]");
  }
  if (p.last_hub_count < 1 || p.last_hub_count > hub_count) {
    add("parameter", "routing.last_hub_count must lie in [1, |hubs|]");
  }
  return report;
}

// ---------------------------------------------------------------------------
// Time buckets

inline std::int64_t bucket_count(const Horizon& h, double bucket_len) {
  auto n = static_cast<std::int64_t>(std::ceil((h.t_max - h.t_min) / bucket_len - 1e-12));
  return std::max<std::int64_t>(n, 1);
}

// Bucket of t on the W-grid anchored at t_min, without clamping to the horizon.
// Used for estimated hub arrivals, which may fall after t_max.
inline std::int64_t bucket_index(double t, const Horizon& h, double bucket_len) {
  return static_cast<std::int64_t>(std::floor((t - h.t_min + kTimeEps) / bucket_len));
}

inline std::int64_t bucket_of(double t, const Instance& inst) {
  const auto& h = inst.horizon;
  if (t < h.t_min - kTimeEps || t > h.t_max + kTimeEps) {
    std::ostringstream msg;
    msg << "time " << t << " lies outside horizon [" << h.t_min << ", " << h.t_max << "]";
    throw InvalidArgument(msg.str());
  }
  const std::int64_t last = bucket_count(h, inst.routing.bucket_len) - 1;
  return std::clamp<std::int64_t>(bucket_index(t, h, inst.routing.bucket_len), 0, last);
}

// ---------------------------------------------------------------------------
// Commodity preprocessing

// Splits each request into ceil(p/K) commodities of size K, remainder last.
// Split parts get ids "<id>#1", "<id>#2", ...
inline std::vector<Commodity> split_commodities(const std::vector<Request>& raw, int capacity) {
  if (capacity < 1) throw InvalidArgument("shuttle capacity must be >= 1");
  std::vector<Commodity> out;
  for (const auto& req : raw) {
    if (req.passengers <= capacity) {
      out.push_back(req);
      continue;
    }
    int left = req.passengers;
    int part = 1;
    while (left > 0) {
      Commodity c = req;
      c.passengers = std::min(left, capacity);
      c.id = req.id + "#" + std::to_string(part++);
      left -= c.passengers;
      out.push_back(std::move(c));
    }
  }
  return out;
}

}  // namespace odmts
