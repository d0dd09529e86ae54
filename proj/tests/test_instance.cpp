#include <gtest/gtest.h>

#include <random>

#include "odmts/instance.hpp"
#include "support/builders.hpp"

using namespace odmts;

namespace {

const char* kMinimal = R"({
  "nodes": ["a", "b"],
  "hubs": ["a"],
  "time": [[0, 5], [5, 0]],
  "dist": [[0, 4], [4, 0]],
  "commodities": [{"id": "r1", "origin": "a", "destination": "b", "passengers": 1, "depart": 0}],
  "cost": {"alpha": 0.001, "shuttle_cost_per_km": 1, "bus_cost_per_km": 3.75,
           "bus_trips_per_line": 16, "bus_wait": 7.5},
  "routing": {"shuttle_capacity": 3, "duration_threshold": 0.5, "bucket_len": 3,
              "first_hub_count": 1, "last_hub_count": 1},
  "horizon": {"t_min": 0, "t_max": 240}
})";

bool has_message(const ValidationReport& r, const std::string& kind, const std::string& needle) {
  for (const auto& v : r.violations) {
    if (v.kind == kind && v.message.find(needle) != std::string::npos) return true;
  }
  return false;
}

}  // namespace

TEST(Load, MinimalDocument) {
  const Instance inst = parse_instance(kMinimal);
  EXPECT_EQ(inst.node_count(), 2u);
  EXPECT_EQ(inst.hubs.size(), 1u);
  ASSERT_EQ(inst.commodities.size(), 1u);
  EXPECT_EQ(inst.commodities[0].destination, 1u);
  EXPECT_DOUBLE_EQ(inst.dist(0, 1), 4.0);
  EXPECT_TRUE(validate(inst).ok());
}

TEST(Load, NegativeDistanceLoadsButFailsValidation) {
  std::string text = kMinimal;
  text.replace(text.find("[[0, 4]"), 7, "[[0, -4]");
  const Instance inst = parse_instance(text);
  const auto report = validate(inst);
  EXPECT_TRUE(report.has("negative_entry"));
}

TEST(Load, MissingAlphaNamesTheField) {
  std::string text = kMinimal;
  text.replace(text.find("\"alpha\": 0.001, "), 16, "");
  try {
    parse_instance(text);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("cost.alpha"), std::string::npos) << e.what();
  }
}

TEST(Load, SyntaxErrorReportsLine) {
  std::string text = kMinimal;
  text.replace(text.find("\"hubs\""), 6, "\"hubs\" ::");
  try {
    parse_instance(text);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(Load, WrongMatrixShapeIsParseError) {
  std::string text = kMinimal;
  text.replace(text.find("[[0, 5], [5, 0]]"), 16, "[[0, 5]]");
  EXPECT_THROW(parse_instance(text), ParseError);
}

TEST(Load, JsonRoundTrip) {
  const Instance inst = parse_instance(kMinimal);
  EXPECT_EQ(instance_from_json(instance_to_json(inst)), inst);
}

TEST(Validate, TriangleWitness) {
  // A=0, B=1, C=2 with T_AB=10 > T_AC + T_CB = 2 + 3.
  auto inst = build::instance({{0, 10, 2}, {10, 0, 3}, {2, 3, 0}}, {0});
  const auto report = validate(inst);
  EXPECT_TRUE(has_message(report, "triangle_time", "(n0,n2,n1)"));
}

TEST(Validate, WitnessListIsCapped) {
  const std::size_t n = 12;
  std::vector<std::vector<double>> t(n, std::vector<double>(n, 100.0));
  for (std::size_t i = 0; i < n; ++i) t[i][i] = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) t[i][i + 1] = t[i + 1][i] = 1.0;
  auto inst = build::instance(t, {0});
  const auto report = validate(inst, 5);
  std::size_t time_entries = 0;
  for (const auto& v : report.violations) time_entries += v.kind == "triangle_time";
  EXPECT_EQ(time_entries, 6u);
  EXPECT_TRUE(has_message(report, "triangle_time", "omitted"));
}

TEST(Validate, HorizonViolationNamesCommodity) {
  Instance inst = parse_instance(kMinimal);
  inst.commodities[0].depart = inst.horizon.t_max + 1;
  EXPECT_TRUE(has_message(validate(inst), "horizon", "r1"));
}

TEST(Validate, DiagonalAndHubMembership) {
  Instance inst = parse_instance(kMinimal);
  inst.time(1, 1) = 2.0;
  inst.hubs.push_back(0);
  const auto report = validate(inst);
  EXPECT_TRUE(report.has("diagonal"));
  EXPECT_TRUE(report.has("hub_membership"));
}

TEST(Validate, UnknownHubIdIsReported) {
  std::string text = kMinimal;
  text.replace(text.find("\"hubs\": [\"a\"]"), 13, "\"hubs\": [\"zz\"]");
  const Instance inst = parse_instance(text);
  EXPECT_TRUE(has_message(validate(inst), "hub_membership", "zz"));
}

TEST(Validate, ParameterRanges) {
  Instance inst = parse_instance(kMinimal);
  inst.cost.alpha = 1.5;
  inst.routing.bucket_len = 0.0;
  inst.routing.first_hub_count = 2;
  const auto report = validate(inst);
  EXPECT_TRUE(has_message(report, "parameter", "alpha"));
  EXPECT_TRUE(has_message(report, "parameter", "bucket_len"));
  EXPECT_TRUE(has_message(report, "parameter", "first_hub_count"));
}

TEST(Bucket, Examples) {
  Instance inst = parse_instance(kMinimal);
  EXPECT_EQ(bucket_of(0.0, inst), 0);
  EXPECT_EQ(bucket_of(2.999, inst), 0);
  EXPECT_EQ(bucket_of(3.0, inst), 1);
  EXPECT_EQ(bucket_count(inst.horizon, 3.0), 80);
  EXPECT_EQ(bucket_of(240.0, inst), 79);
  EXPECT_THROW(bucket_of(240.5, inst), InvalidArgument);
  EXPECT_THROW(bucket_of(-1.0, inst), InvalidArgument);
}

TEST(Bucket, UnevenHorizonKeepsLastPartialBucket) {
  Instance inst = parse_instance(kMinimal);
  inst.horizon = {0.0, 10.0};
  EXPECT_EQ(bucket_count(inst.horizon, 3.0), 4);
  EXPECT_EQ(bucket_of(9.5, inst), 3);
  EXPECT_EQ(bucket_of(10.0, inst), 3);
}

TEST(BucketProperty, MonotoneAndConstantOnWindows) {
  Instance inst = parse_instance(kMinimal);
  inst.horizon = {5.0, 125.0};
  inst.routing.bucket_len = 2.5;
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(5.0, 125.0);
  std::vector<double> ts(2000);
  for (auto& t : ts) t = u(rng);
  std::sort(ts.begin(), ts.end());
  for (std::size_t i = 1; i < ts.size(); ++i) EXPECT_LE(bucket_of(ts[i - 1], inst), bucket_of(ts[i], inst));
  for (double t : ts) {
    const auto q = bucket_of(t, inst);
    const double lo = 5.0 + static_cast<double>(q) * 2.5;
    EXPECT_EQ(bucket_of(lo, inst), q);
    EXPECT_LE(lo, t + 1e-9);
    EXPECT_LT(t, lo + 2.5 + 1e-9);
  }
}

TEST(Split, Examples) {
  auto sizes = [](const std::vector<Commodity>& cs) {
    std::vector<int> out;
    for (const auto& c : cs) out.push_back(c.passengers);
    return out;
  };
  const Request req{"q", 0, 1, 7, 12.5};
  const auto parts = split_commodities({req}, 3);
  EXPECT_EQ(sizes(parts), (std::vector<int>{3, 3, 1}));
  EXPECT_EQ(parts[2].id, "q#3");
  EXPECT_DOUBLE_EQ(parts[1].depart, 12.5);
  EXPECT_EQ(sizes(split_commodities({{"q", 0, 1, 2, 0}}, 3)), (std::vector<int>{2}));
  EXPECT_EQ(sizes(split_commodities({{"q", 0, 1, 3, 0}}, 1)), (std::vector<int>{1, 1, 1}));
  EXPECT_THROW(split_commodities({req}, 0), InvalidArgument);
}

TEST(SplitProperty, ConservesPassengersAndRespectsCapacity) {
  std::mt19937 rng(8);
  std::uniform_int_distribution<int> p(1, 20), k(1, 6);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<Request> raw;
    int total = 0;
    for (int i = 0; i < 5; ++i) {
      raw.push_back({"r" + std::to_string(i), 0, 1, p(rng), 0.0});
      total += raw.back().passengers;
    }
    const int cap = k(rng);
    const auto out = split_commodities(raw, cap);
    int sum = 0;
    std::size_t expected = 0;
    for (const auto& r : raw) expected += static_cast<std::size_t>((r.passengers + cap - 1) / cap);
    for (const auto& c : out) {
      EXPECT_LE(c.passengers, cap);
      EXPECT_GE(c.passengers, 1);
      sum += c.passengers;
    }
    EXPECT_EQ(sum, total);
    EXPECT_EQ(out.size(), expected);
  }
}

TEST(Io, SaveAndLoadFile) {
  const Instance inst = parse_instance(kMinimal);
  const std::string path = ::testing::TempDir() + "odmts_instance_io.json";
  save_instance(inst, path);
  EXPECT_EQ(load_instance(path), inst);
  EXPECT_THROW(load_instance(path + ".missing"), Error);
}
