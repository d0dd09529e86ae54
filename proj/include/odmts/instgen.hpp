#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "odmts/instance.hpp"
#include "odmts/routegen.hpp"

namespace odmts {

struct GenParams {
  double side_km = 20.0;      // nodes are placed in [0, side]^2
  double speed_factor = 1.0;  // T = speed_factor * D
  int max_passengers = 1;     // per commodity, uniform in [1, max]
  CostParams cost;
  RoutingParams routing;
};

namespace detail {

// Portable uniform draws: mt19937_64 is fully specified, the std
// distributions are not.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::size_t index(std::size_t n) {
    return std::min(n - 1, static_cast<std::size_t>(uniform() * static_cast<double>(n)));
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace detail

inline Instance generate(std::uint64_t seed, std::size_t n_nodes, std::size_t n_hubs,
                         std::size_t n_commodities, Horizon horizon,
                         const GenParams& params = {}) {
  if (n_nodes < 2) throw InvalidArgument("need at least two nodes");
  if (n_hubs < 1 || n_hubs > n_nodes) throw InvalidArgument("hub count must be in [1, nodes]");
  if (!(horizon.t_max > horizon.t_min)) throw InvalidArgument("empty horizon");
  if (params.side_km <= 0.0 || params.speed_factor <= 0.0) {
    throw InvalidArgument("side and speed factor must be positive");
  }
  if (params.max_passengers < 1 || params.max_passengers > params.routing.shuttle_capacity) {
    throw InvalidArgument("max passengers must be in [1, shuttle capacity]");
  }
  detail::Rng rng(seed);
  Instance inst;
  inst.cost = params.cost;
  inst.routing = params.routing;
  const int hub_cap = static_cast<int>(n_hubs);
  inst.routing.first_hub_count = std::min(inst.routing.first_hub_count, hub_cap);
  inst.routing.last_hub_count = std::min(inst.routing.last_hub_count, hub_cap);
  inst.horizon = horizon;

  std::vector<double> px(n_nodes), py(n_nodes);
  for (std::size_t v = 0; v < n_nodes; ++v) {
    px[v] = rng.uniform(0.0, params.side_km);
    py[v] = rng.uniform(0.0, params.side_km);
    inst.nodes.push_back("n" + std::to_string(v));
  }
  inst.dist = Matrix(n_nodes);
  inst.time = Matrix(n_nodes);
  for (std::size_t i = 0; i < n_nodes; ++i) {
    for (std::size_t j = 0; j < n_nodes; ++j) {
      const double d = i == j ? 0.0 : std::hypot(px[i] - px[j], py[i] - py[j]);
      inst.dist(i, j) = d;
      inst.time(i, j) = params.speed_factor * d;
    }
  }

  // Farthest-point spread starting from the node closest to the centre.
  std::vector<double> gap(n_nodes, kInfinity);
  NodeIndex next = 0;
  double best = kInfinity;
  for (std::size_t v = 0; v < n_nodes; ++v) {
    const double d = std::hypot(px[v] - params.side_km / 2, py[v] - params.side_km / 2);
    if (d < best) {
      best = d;
      next = v;
    }
  }
  while (inst.hubs.size() < n_hubs) {
    inst.hubs.push_back(next);
    gap[next] = -1.0;
    double far = -1.0;
    for (std::size_t v = 0; v < n_nodes; ++v) {
      if (gap[v] < 0.0) continue;
      gap[v] = std::min(gap[v], inst.dist(next, v));
      if (gap[v] > far) {
        far = gap[v];
        next = v;
      }
    }
  }

  for (std::size_t k = 0; k < n_commodities; ++k) {
    Commodity c;
    c.id = "r" + std::to_string(k);
    c.origin = rng.index(n_nodes);
    do {
      c.destination = rng.index(n_nodes);
    } while (c.destination == c.origin);
    c.passengers = 1 + static_cast<int>(rng.index(static_cast<std::size_t>(params.max_passengers)));
    c.depart = rng.uniform(horizon.t_min, horizon.t_max);
    inst.commodities.push_back(std::move(c));
  }
  return inst;
}

// Laplace(0, scale) draw by inverse CDF.
inline double laplace_sample(double u_open, double scale) {
  const double u = u_open - 0.5;  // in (-0.5, 0.5)
  return -scale * (u < 0 ? -1.0 : 1.0) * std::log(1.0 - 2.0 * std::fabs(u));
}

// Independent Laplace(0, scale) offsets per (commodity, hub).
inline HubTable perturb_arrival_estimates(const Instance& inst, double scale, std::uint64_t seed) {
  if (!(scale > 0.0)) throw InvalidArgument("perturbation scale must be positive");
  detail::Rng rng(seed);
  HubTable offsets(inst, 0.0);
  for (CommodityIndex r = 0; r < inst.commodities.size(); ++r) {
    for (NodeIndex h : inst.hubs) {
      double u;
      do {
        u = rng.uniform();
      } while (u == 0.0);
      offsets.at(r, h) = laplace_sample(u, scale);
    }
  }
  return offsets;
}

}  // namespace odmts
