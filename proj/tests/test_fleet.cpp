#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "odmts/fleet.hpp"
#include "support/builders.hpp"
#include "support/fleet_oracle.hpp"

using namespace odmts;

namespace {

Instance one_place() { return build::instance({{0.0}}, {0}); }

Task at_zero(std::string id, double start, double duration) {
  return {std::move(id), 0, 0, start, duration};
}

std::vector<Task> six_tasks() {
  return {at_zero("A", 0, 5),  at_zero("B", 1, 5),  at_zero("C", 2, 5),
          at_zero("D", 10, 5), at_zero("E", 11, 5), at_zero("F", 12, 5)};
}

std::size_t task_arcs(const FleetGraph& g) {
  return static_cast<std::size_t>(std::count_if(g.arcs.begin(), g.arcs.end(), [&](const auto& a) {
    return a.first < g.tasks.size() && a.second < g.tasks.size();
  }));
}

bool has_arc(const FleetGraph& g, const std::string& from, const std::string& to) {
  for (const auto& [u, v] : g.arcs) {
    if (u < g.tasks.size() && v < g.tasks.size() && g.tasks[u].id == from && g.tasks[v].id == to) {
      return true;
    }
  }
  return false;
}

}  // namespace

TEST(Compatible, TravelAndOrder) {
  const Instance inst = build::instance({{0, 4}, {4, 0}}, {0});
  const Task a{"a", 0, 1, 0.0, 5.0};
  EXPECT_TRUE(compatible(a, {"b", 0, 0, 9.0, 1.0}, inst));
  EXPECT_FALSE(compatible(a, {"b", 0, 0, 8.999, 1.0}, inst));
  EXPECT_TRUE(compatible(a, {"b", 1, 0, 5.0, 1.0}, inst));
  // Zero-length tasks at the same instant chain only in (start, id) order.
  const Task p{"p", 0, 0, 3.0, 0.0}, q{"q", 0, 0, 3.0, 0.0};
  EXPECT_TRUE(compatible(p, q, one_place()));
  EXPECT_FALSE(compatible(q, p, one_place()));
}

TEST(FleetGraphs, SixTaskExample) {
  const Instance inst = one_place();
  const FleetGraph dense = build_dense_graph(six_tasks(), inst);
  const FleetGraph sparse = build_sparse_graph(six_tasks(), inst);
  EXPECT_EQ(task_arcs(dense), 9u);
  EXPECT_EQ(dense.arcs.size(), 9u + 12u);
  EXPECT_EQ(task_arcs(sparse), 9u);
  EXPECT_EQ(sparse.arcs.size(), 9u + 6u);
  for (const FleetGraph* g : {&dense, &sparse}) {
    const FleetResult res = solve_fleet(*g);
    EXPECT_EQ(res.fleet_size, 3);
    EXPECT_EQ(res.schedules.size(), 3u);
    EXPECT_LE(res.lp_integrality_violation, 1e-6);
    EXPECT_TRUE(schedule_violations(res, g->tasks, inst).empty());
  }
  EXPECT_EQ(oracle::min_fleet(six_tasks(), inst), 3);
  EXPECT_EQ(min_fleet_oracle(six_tasks(), inst), 3);
}

TEST(FleetGraphs, SparseDropsImpliedArcs) {
  const Instance inst = one_place();
  auto tasks = six_tasks();
  tasks.push_back(at_zero("G", 20, 2));
  const FleetGraph sparse = build_sparse_graph(tasks, inst);
  EXPECT_FALSE(has_arc(sparse, "A", "G"));
  EXPECT_TRUE(has_arc(sparse, "D", "G"));
  EXPECT_TRUE(has_arc(build_dense_graph(tasks, inst), "A", "G"));
  EXPECT_EQ(solve_fleet(sparse).fleet_size, 3);
}

TEST(FleetGraphs, RequireSortedTasks) {
  auto tasks = six_tasks();
  std::swap(tasks[0], tasks[3]);
  EXPECT_THROW(build_dense_graph(tasks, one_place()), InvalidArgument);
  EXPECT_THROW(build_sparse_graph(tasks, one_place()), InvalidArgument);
}

TEST(SolveFleet, EdgeCases) {
  const Instance inst = one_place();
  for (Formulation f : {Formulation::Dense, Formulation::Sparse}) {
    EXPECT_EQ(solve_fleet(build_fleet_graph({}, inst, f)).fleet_size, 0);
    EXPECT_EQ(solve_fleet(build_fleet_graph({at_zero("x", 0, 1)}, inst, f)).fleet_size, 1);

    std::vector<Task> overlap;
    for (int k = 0; k < 5; ++k) overlap.push_back(at_zero("o" + std::to_string(k), k, 10));
    EXPECT_EQ(solve_fleet(build_fleet_graph(overlap, inst, f)).fleet_size, 5);

    std::vector<Task> chain;
    for (int k = 0; k < 5; ++k) chain.push_back(at_zero("c" + std::to_string(k), 10.0 * k, 10));
    const FleetResult res = solve_fleet(build_fleet_graph(chain, inst, f));
    EXPECT_EQ(res.fleet_size, 1);
    EXPECT_EQ(res.schedules, (std::vector<std::vector<std::size_t>>{{0, 1, 2, 3, 4}}));
  }
}

TEST(SolveFleet, FormulationGuards) {
  const FleetGraph g = build_dense_graph(six_tasks(), one_place());
  EXPECT_THROW(solve_fleet_sparse(g), InvalidArgument);
  EXPECT_EQ(solve_fleet_dense(g).fleet_size, 3);
  EXPECT_EQ(formulation_from_string("sparse"), Formulation::Sparse);
  EXPECT_THROW(formulation_from_string("tree"), InvalidArgument);
}

TEST(RecoverSchedules, RejectsBrokenFlow) {
  const FleetGraph g = build_dense_graph(six_tasks(), one_place());
  EXPECT_THROW(recover_schedules(g, std::vector<double>(g.arcs.size(), 0.5)), InvalidArgument);
  EXPECT_THROW(recover_schedules(g, std::vector<double>(g.arcs.size(), 0.0)), InvalidArgument);
  EXPECT_THROW(recover_schedules(g, {}), InvalidArgument);
}

TEST(RoutesToTasks, OneTaskPerRouteAndRider) {
  Instance inst = build::instance({{0, 4, 9}, {4, 0, 5}, {9, 5, 0}}, {1});
  inst.commodities = {build::commodity("r", 0, 2, 3.0, 2), build::commodity("s", 0, 2, 1.0)};
  DesignSolution sol;
  sol.direct = {0};
  const std::vector<CommodityIndex> seq{1};
  sol.selected_routes = {materialize_pickup(seq, 1, inst)};
  const std::vector<double> t1{12.5};
  sol.selected_routes.push_back(materialize_dropoff(seq, 1, t1, inst));
  const auto tasks = routes_to_tasks(sol, inst);
  ASSERT_EQ(tasks.size(), 4u);
  EXPECT_EQ(tasks[0], (Task{"pickup-0", 0, 1, 1.0, 4.0}));
  EXPECT_EQ(tasks[1], (Task{"direct-r-0", 0, 2, 3.0, 9.0}));
  EXPECT_EQ(tasks[2], (Task{"direct-r-1", 0, 2, 3.0, 9.0}));
  EXPECT_EQ(tasks[3], (Task{"dropoff-0", 1, 2, 12.5, 5.0}));
}

TEST(FleetProperty, FormulationsAgreeWithMatching) {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    const auto ts = oracle::random_tasks(seed, 5 + seed % 30);
    const int expect = oracle::min_fleet(ts.tasks, ts.inst);
    EXPECT_EQ(min_fleet_oracle(ts.tasks, ts.inst), expect);
    for (Formulation f : {Formulation::Dense, Formulation::Sparse}) {
      const FleetGraph g = build_fleet_graph(ts.tasks, ts.inst, f, 2);
      const FleetResult res = solve_fleet(g);
      EXPECT_EQ(res.fleet_size, expect) << "seed " << seed << " " << to_string(f);
      EXPECT_TRUE(schedule_violations(res, ts.tasks, ts.inst).empty());
    }
  }
}

TEST(FleetProperty, SparseKeepsReachability) {
  for (std::uint64_t seed = 50; seed < 60; ++seed) {
    const auto ts = oracle::random_tasks(seed, 25);
    const FleetGraph dense = build_dense_graph(ts.tasks, ts.inst);
    const FleetGraph sparse = build_sparse_graph(ts.tasks, ts.inst, 3);
    EXPECT_LE(sparse.arcs.size(), dense.arcs.size());
    const std::size_t n = ts.tasks.size();
    std::vector<std::vector<char>> reach(n, std::vector<char>(n, 0));
    for (const auto& [u, v] : sparse.arcs) {
      if (u < n && v < n) reach[u][v] = 1;
    }
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          if (reach[i][k] && reach[k][j]) reach[i][j] = 1;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        EXPECT_EQ(static_cast<bool>(reach[i][j]), compatible(ts.tasks[i], ts.tasks[j], ts.inst));
      }
    }
  }
}

TEST(FleetProperty, ThreadsDoNotChangeGraphs) {
  const auto ts = oracle::random_tasks(77, 120);
  EXPECT_EQ(build_sparse_graph(ts.tasks, ts.inst, 1).arcs, build_sparse_graph(ts.tasks, ts.inst, 4).arcs);
  EXPECT_EQ(build_dense_graph(ts.tasks, ts.inst, 1).arcs, build_dense_graph(ts.tasks, ts.inst, 4).arcs);
}

TEST(FleetJson, ListsSchedulesByTaskId) {
  const Instance inst = one_place();
  const FleetGraph g = build_sparse_graph(six_tasks(), inst);
  const auto j = fleet_to_json(solve_fleet(g), g, inst);
  EXPECT_EQ(j.at("fleet_size"), 3);
  EXPECT_EQ(j.at("formulation"), "sparse");
  EXPECT_EQ(j.at("schedules").size(), 3u);
  EXPECT_EQ(j.at("schedules")[0][0], "A");
  EXPECT_EQ(j.at("arc_count"), 15);
}
