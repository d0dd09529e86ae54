// Sweeps shuttle capacity on a generated instance and prints a CSV summary.
//   capacity_sweep [seed] [commodities]
#include <cstdlib>
#include <iostream>
#include <string>

#include "odmts/odmts.hpp"

int main(int argc, char** argv) {
  using namespace odmts;
  const std::uint64_t seed = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 1;
  const std::size_t riders = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 100;

  GenParams gp;
  gp.cost.bus_trips_per_line = 1.0;
  const Instance base = generate(seed, 60, 6, riders, {0.0, 60.0}, gp);

  std::vector<Report> rows;
  for (int k = 1; k <= 3; ++k) {
    Instance inst = base;
    inst.routing.shuttle_capacity = k;
    const RoutingContext ctx = make_routing_context(inst);
    const DesignSolution sol = solve_design(inst, enumerate_pickup_routes(ctx), enumerate_dropoff_routes(ctx));
    const std::vector<Task> tasks = routes_to_tasks(sol, inst);
    const FleetResult fleet = solve_fleet(build_sparse_graph(tasks, inst));
    rows.push_back(make_report(sol, &fleet, inst));
  }
  std::cout << reports_to_csv(rows);
}
