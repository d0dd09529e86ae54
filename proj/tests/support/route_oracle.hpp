#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <tuple>
#include <vector>

#include "odmts/instance.hpp"

// Brute-force route generation: every ordered sequence of up to K distinct
// commodities at every hub, timed from scratch and filtered by the five
// conditions; the cheapest sequence per (hub, set) survives.
namespace oracle {

struct BruteRoute {
  bool pickup;
  std::size_t hub;
  std::vector<std::size_t> seq;
  double cost;
};

using Key = std::tuple<bool, std::size_t, std::vector<std::size_t>>;  // kind, hub, sorted set

inline std::vector<std::size_t> nearest_hubs(const odmts::Instance& inst, std::size_t node,
                                             bool from_node, int count) {
  std::vector<std::size_t> hubs(inst.hubs.begin(), inst.hubs.end());
  auto t = [&](std::size_t h) { return from_node ? inst.time(node, h) : inst.time(h, node); };
  std::sort(hubs.begin(), hubs.end(), [&](std::size_t a, std::size_t b) {
    return t(a) != t(b) ? t(a) < t(b) : a < b;
  });
  hubs.resize(std::min<std::size_t>(hubs.size(), static_cast<std::size_t>(count)));
  return hubs;
}

inline long long grid_bucket(double t, const odmts::Instance& inst, bool clamp) {
  const double w = inst.routing.bucket_len;
  long long q = static_cast<long long>(std::floor((t - inst.horizon.t_min + 1e-9) / w));
  if (clamp) {
    const long long n = std::max<long long>(
        1, static_cast<long long>(std::ceil((inst.horizon.t_max - inst.horizon.t_min) / w - 1e-12)));
    q = std::clamp<long long>(q, 0, n - 1);
  }
  return q;
}

inline double arrival_estimate(const odmts::Instance& inst, std::size_t r, std::size_t l) {
  const auto& c = inst.commodities[r];
  const auto first = nearest_hubs(inst, c.origin, true, inst.routing.first_hub_count);
  double s = 0.0;
  for (std::size_t h : first) s += inst.time(c.origin, h) + inst.cost.bus_wait + inst.time(h, l);
  return c.depart + s / static_cast<double>(first.size());
}

inline bool better(const BruteRoute& a, const BruteRoute& b) {
  const double tol = 1e-12 * std::max({1.0, std::fabs(a.cost), std::fabs(b.cost)});
  if (a.cost < b.cost - tol) return true;
  if (b.cost < a.cost - tol) return false;
  return a.seq < b.seq;
}

inline std::map<Key, BruteRoute> brute_force_routes(const odmts::Instance& inst) {
  const std::size_t n = inst.commodities.size();
  const int cap = inst.routing.shuttle_capacity;
  const double stretch = 1.0 + inst.routing.duration_threshold;
  const double a = inst.cost.alpha, c = inst.cost.shuttle_cost_per_km;
  std::map<Key, BruteRoute> best;

  auto consider = [&](const BruteRoute& w) {
    std::vector<std::size_t> set = w.seq;
    std::sort(set.begin(), set.end());
    Key key{w.pickup, w.hub, set};
    auto it = best.find(key);
    if (it == best.end() || better(w, it->second)) best[key] = w;
  };

  auto evaluate = [&](bool pickup, std::size_t h, const std::vector<std::size_t>& seq) {
    int load = 0;
    for (auto r : seq) load += inst.commodities[r].passengers;
    if (load > cap) return;
    std::vector<double> xi(seq.size());
    double dist = 0.0;
    if (pickup) {
      double clock = inst.commodities[seq[0]].depart;
      for (std::size_t j = 1; j < seq.size(); ++j) {
        const auto& prev = inst.commodities[seq[j - 1]];
        const auto& cur = inst.commodities[seq[j]];
        clock = std::max(clock + inst.time(prev.origin, cur.origin), cur.depart);
        dist += inst.dist(prev.origin, cur.origin);
      }
      const auto& last = inst.commodities[seq.back()];
      const double arrive = clock + inst.time(last.origin, h);
      dist += inst.dist(last.origin, h);
      for (std::size_t j = 0; j < seq.size(); ++j) xi[j] = arrive - inst.commodities[seq[j]].depart;
    } else {
      double start = -1e300;
      for (auto r : seq) start = std::max(start, arrival_estimate(inst, r, h));
      double drive = 0.0;
      std::size_t at = h;
      for (std::size_t j = 0; j < seq.size(); ++j) {
        const auto& cur = inst.commodities[seq[j]];
        drive += inst.time(at, cur.destination);
        dist += inst.dist(at, cur.destination);
        at = cur.destination;
        xi[j] = (start - arrival_estimate(inst, seq[j], h)) + drive;
      }
    }
    long long bucket = 0;
    for (std::size_t j = 0; j < seq.size(); ++j) {
      const auto& cur = inst.commodities[seq[j]];
      const auto hubs = pickup ? nearest_hubs(inst, cur.origin, true, inst.routing.first_hub_count)
                               : nearest_hubs(inst, cur.destination, false, inst.routing.last_hub_count);
      if (std::find(hubs.begin(), hubs.end(), h) == hubs.end()) return;
      const double direct = pickup ? inst.time(cur.origin, h) : inst.time(h, cur.destination);
      if (xi[j] > stretch * direct + 1e-9) return;
      const long long q = pickup ? grid_bucket(cur.depart, inst, true)
                                 : grid_bucket(arrival_estimate(inst, seq[j], h), inst, false);
      if (j > 0 && q != bucket) return;
      bucket = q;
    }
    double weighted = 0.0;
    for (std::size_t j = 0; j < seq.size(); ++j) weighted += inst.commodities[seq[j]].passengers * xi[j];
    consider({pickup, h, seq, (1 - a) * c * dist + a * weighted});
  };

  std::vector<std::size_t> seq;
  std::vector<char> used(n, 0);
  auto rec = [&](auto&& self, bool pickup, std::size_t h) -> void {
    if (!seq.empty()) evaluate(pickup, h, seq);
    if (seq.size() == static_cast<std::size_t>(cap)) return;
    for (std::size_t r = 0; r < n; ++r) {
      if (used[r]) continue;
      used[r] = 1;
      seq.push_back(r);
      self(self, pickup, h);
      seq.pop_back();
      used[r] = 0;
    }
  };
  for (bool pickup : {true, false}) {
    for (std::size_t h : inst.hubs) rec(rec, pickup, h);
  }
  return best;
}

}  // namespace oracle
