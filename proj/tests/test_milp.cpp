#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>

#include "odmts/instance.hpp"
#include "odmts/milp.hpp"
#include "support/lp_oracle.hpp"

using namespace odmts::milp;

namespace {

MilpModel single_var(double rhs, bool integer) {
  MilpModel m;
  auto x = m.add_variable("x", 0.0, integer ? 10.0 : odmts::kInfinity, integer, 1.0);
  m.add_constraint("lo", {{x, 1.0}}, RowSense::GreaterEqual, rhs);
  return m;
}

MilpModel random_model(std::mt19937& rng, std::size_t n, std::size_t rows, bool integer,
                       bool nonneg_costs = false) {
  std::uniform_int_distribution<int> coef(-4, 6), bound(1, 4), pick(0, 2);
  MilpModel m;
  for (std::size_t j = 0; j < n; ++j) {
    const int c = coef(rng);
    m.add_variable("v" + std::to_string(j), 0.0, bound(rng), integer, nonneg_costs ? std::abs(c) : c);
  }
  for (std::size_t i = 0; i < rows; ++i) {
    std::vector<Term> terms;
    for (std::size_t j = 0; j < n; ++j) terms.push_back({j, double(coef(rng))});
    const int s = pick(rng);
    const auto sense = s == 0 ? RowSense::LessEqual : s == 1 ? RowSense::GreaterEqual : RowSense::Equal;
    m.add_constraint("r" + std::to_string(i), terms, sense, coef(rng) + (s == 2 ? 0 : 2));
  }
  return m;
}

}  // namespace

TEST(Lp, LowerBoundRowGivesFractionalOptimum) {
  auto sol = solve_lp(single_var(2.5, false));
  ASSERT_EQ(sol.status, SolveStatus::Optimal);
  EXPECT_NEAR(sol.value(0), 2.5, 1e-9);
  EXPECT_NEAR(sol.objective, 2.5, 1e-9);
}

TEST(Lp, ContradictoryBoundsAreInfeasible) {
  MilpModel m;
  auto x = m.add_variable("x", -odmts::kInfinity, odmts::kInfinity, false, 1.0);
  m.add_constraint("a", {{x, 1.0}}, RowSense::LessEqual, 0.0);
  m.add_constraint("b", {{x, 1.0}}, RowSense::GreaterEqual, 1.0);
  EXPECT_EQ(solve_lp(m).status, SolveStatus::Infeasible);
  EXPECT_EQ(solve_milp(m).status, SolveStatus::Infeasible);
}

TEST(Lp, DetectsUnbounded) {
  MilpModel m;
  auto x = m.add_variable("x", 0.0, odmts::kInfinity, false, -1.0);
  auto y = m.add_variable("y", 0.0, odmts::kInfinity, false, 0.0);
  m.add_constraint("a", {{x, 1.0}, {y, -1.0}}, RowSense::LessEqual, 1.0);
  EXPECT_EQ(solve_lp(m).status, SolveStatus::Unbounded);
}

TEST(Milp, RoundsUpSingleInteger) {
  auto sol = solve_milp(single_var(2.5, true));
  ASSERT_EQ(sol.status, SolveStatus::Optimal);
  EXPECT_DOUBLE_EQ(sol.value(0), 3.0);
  EXPECT_DOUBLE_EQ(sol.objective, 3.0);
  EXPECT_DOUBLE_EQ(sol.best_bound, sol.objective);
}

TEST(Milp, TwoBinaryKnapsack) {
  MilpModel m;
  auto x = m.add_binary("x", -1.0);
  auto y = m.add_binary("y", -1.0);
  m.add_constraint("cap", {{x, 1.0}, {y, 1.0}}, RowSense::LessEqual, 1.5);
  EXPECT_NEAR(solve_lp(m).objective, -1.5, 1e-9);
  auto sol = solve_milp(m);
  ASSERT_EQ(sol.status, SolveStatus::Optimal);
  EXPECT_DOUBLE_EQ(sol.objective, -1.0);
}

TEST(Milp, UnboundedIntegerIsRejected) {
  MilpModel m;
  m.add_variable("x", 0.0, odmts::kInfinity, true, 1.0);
  EXPECT_THROW(solve_milp(m), ModelError);
}

TEST(Milp, NodeLimitReportsIncumbentAndBound) {
  std::mt19937 rng(11);
  MilpModel m;
  std::vector<Term> row;
  for (int j = 0; j < 30; ++j) {
    auto v = m.add_binary("b" + std::to_string(j), -(10.0 + j % 7));
    row.push_back({static_cast<std::size_t>(v), 3.0 + (j * 5) % 11});
  }
  m.add_constraint("cap", row, RowSense::LessEqual, 47.5);
  MilpOptions opts;
  opts.node_limit = 3;
  try {
    solve_milp(m, opts);
    FAIL() << "expected a limit error";
  } catch (const SolveLimitError& e) {
    EXPECT_LE(e.bound(), e.incumbent() ? e.incumbent()->objective : 0.0);
  }
}

TEST(Model, RejectsDuplicateNames) {
  MilpModel m;
  m.add_variable("x", 0, 1, false);
  EXPECT_THROW(m.add_variable("x", 0, 1, false), ModelError);
}

TEST(Model, MergesRepeatedTerms) {
  MilpModel m;
  auto x = m.add_variable("x", 0, 1, false);
  m.add_constraint("r", {{x, 1.0}, {x, 2.0}}, RowSense::LessEqual, 1.0);
  ASSERT_EQ(m.constraints()[0].terms.size(), 1u);
  EXPECT_DOUBLE_EQ(m.constraints()[0].terms[0].coef, 3.0);
}

// Random small LPs against vertex enumeration.
TEST(LpProperty, MatchesVertexEnumeration) {
  std::mt19937 rng(2024);
  int compared = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + trial % 3, rows = 1 + trial % 4;
    MilpModel m = random_model(rng, n, rows, false);
    auto oracle = oracle::lp_by_vertices(m);
    auto sol = solve_lp(m);
    ASSERT_EQ(sol.status == SolveStatus::Optimal, oracle.has_value()) << "trial " << trial;
    if (!oracle) continue;
    ++compared;
    EXPECT_NEAR(sol.objective, *oracle, 1e-7) << "trial " << trial;
    EXPECT_LE(m.max_violation(sol.values), 1e-7);
  }
  EXPECT_GT(compared, 50);
}

// Random small integer programs against enumeration of all lattice points.
TEST(MilpProperty, MatchesLatticeEnumeration) {
  std::mt19937 rng(77);
  int compared = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + trial % 3, rows = 1 + trial % 3;
    MilpModel m = random_model(rng, n, rows, true);
    auto oracle = oracle::milp_by_enumeration(m);
    auto sol = solve_milp(m);
    ASSERT_EQ(sol.status == SolveStatus::Optimal, oracle.has_value()) << "trial " << trial;
    auto relax = solve_lp(m);
    if (!oracle) continue;
    ++compared;
    EXPECT_NEAR(sol.objective, *oracle, 1e-7) << "trial " << trial;
    EXPECT_GE(sol.objective, relax.objective - 1e-6);
    EXPECT_EQ(m.max_integrality_violation(sol.values), 0.0);
  }
  EXPECT_GT(compared, 30);
}

// Nonnegative costs make the slack basis dual feasible, so these runs go
// through the dual simplex first.
TEST(MilpProperty, NonnegativeCostsMatchEnumeration) {
  std::mt19937 rng(31);
  int compared = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const bool integer = trial % 2 == 1;
    MilpModel m = random_model(rng, 2 + trial % 4, 1 + trial % 4, integer, true);
    auto oracle = integer ? oracle::milp_by_enumeration(m) : oracle::lp_by_vertices(m);
    auto sol = integer ? solve_milp(m) : solve_lp(m);
    ASSERT_EQ(sol.status == SolveStatus::Optimal, oracle.has_value()) << "trial " << trial;
    if (!oracle) continue;
    ++compared;
    EXPECT_NEAR(sol.objective, *oracle, 1e-7) << "trial " << trial;
    EXPECT_LE(m.max_violation(sol.values), 1e-7);
  }
  EXPECT_GT(compared, 80);
}

TEST(MilpProperty, Deterministic) {
  std::mt19937 rng(5);
  MilpModel m = random_model(rng, 8, 5, true);
  auto a = solve_milp(m), b = solve_milp(m);
  EXPECT_EQ(a.status, b.status);
  EXPECT_EQ(a.values, b.values);
  EXPECT_EQ(a.nodes, b.nodes);
}

TEST(Export, LpTextHasBoundsAndSenses) {
  MilpModel m = single_var(2.5, false);
  auto names = export_names(m, ExportFormat::LpText);
  const std::string text = to_lp_text(m, names);
  EXPECT_NE(text.find("lo: + 1 x >= 2.5"), std::string::npos) << text;
  EXPECT_NE(text.find("0 <= x <= +inf"), std::string::npos) << text;
  EXPECT_NE(text.find("End"), std::string::npos);
}

TEST(Export, SanitizesNamesWithMapping) {
  MilpModel m;
  auto a = m.add_variable("my var", 0, 1, true, 1.0);
  auto b = m.add_variable("my_var", 0, 1, true, 1.0);
  m.add_constraint("row (1)", {{a, 1.0}, {b, 1.0}}, RowSense::GreaterEqual, 1.0);
  auto n1 = export_names(m, ExportFormat::LpText);
  auto n2 = export_names(m, ExportFormat::LpText);
  EXPECT_EQ(n1.columns, n2.columns);
  EXPECT_NE(n1.columns[0], n1.columns[1]);
  for (const auto& c : n1.columns) EXPECT_EQ(c.find(' '), std::string::npos);
  const std::string text = to_lp_text(m, n1);
  EXPECT_NE(text.find("\\ map " + n1.columns[0] + " my var"), std::string::npos) << text;
}

TEST(Export, MpsRoundTripPreservesOptimum) {
  std::mt19937 rng(9);
  for (int trial = 0; trial < 40; ++trial) {
    MilpModel m = random_model(rng, 4, 3, trial % 2 == 0);
    auto names = export_names(m, ExportFormat::Mps);
    MilpModel back = read_mps(to_mps(m, names));
    ASSERT_EQ(back.num_variables(), m.num_variables());
    ASSERT_EQ(back.num_constraints(), m.num_constraints());
    auto s1 = solve_milp(m), s2 = solve_milp(back);
    ASSERT_EQ(s1.status, s2.status);
    if (s1.status == SolveStatus::Optimal) EXPECT_NEAR(s1.objective, s2.objective, 1e-9);
  }
}

TEST(Export, MpsRenamesLongNames) {
  MilpModel m;
  m.add_variable("a_rather_long_name", 0, 1, false, 1.0);
  auto names = export_names(m, ExportFormat::Mps);
  EXPECT_EQ(names.columns[0], "C0000000");
  const std::string text = to_mps(m, names);
  EXPECT_NE(text.find("* map C0000000 a_rather_long_name"), std::string::npos);
}

TEST(Export, WritesFileByExtension) {
  auto dir = std::filesystem::temp_directory_path() / "odmts_export_test";
  std::filesystem::create_directories(dir);
  MilpModel m = single_var(1.0, true);
  export_model(m, (dir / "m.mps").string());
  export_model(m, (dir / "m.lp").string());
  EXPECT_NE(odmts::read_text_file((dir / "m.mps").string()).find("ENDATA"), std::string::npos);
  EXPECT_NE(odmts::read_text_file((dir / "m.lp").string()).find("General"), std::string::npos);
  std::filesystem::remove_all(dir);
}
