#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

#include "odmts/design.hpp"
#include "odmts/fleet.hpp"
#include "odmts/instance.hpp"
#include "odmts/instgen.hpp"
#include "odmts/metrics.hpp"
#include "odmts/routegen.hpp"

namespace odmts {

struct PipelineConfig {
  std::string instance_path;
  std::string out_dir = ".";
  std::optional<int> capacity;
  std::optional<double> delta;
  std::optional<double> bucket;
  std::optional<int> first_hubs;
  std::optional<int> last_hubs;
  Formulation formulation = Formulation::Sparse;
  bool check_oracle = false;
  std::string export_model;  // empty: no export
  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::optional<double> perturb_scale;
};

// Failure inside one pipeline stage; `stage` names it.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what)
      : Error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

// Applies routing overrides and splits commodities larger than K.
inline void apply_overrides(Instance& inst, const PipelineConfig& cfg) {
  auto& rp = inst.routing;
  if (cfg.capacity) rp.shuttle_capacity = *cfg.capacity;
  if (cfg.delta) rp.duration_threshold = *cfg.delta;
  if (cfg.bucket) rp.bucket_len = *cfg.bucket;
  if (cfg.first_hubs) rp.first_hub_count = *cfg.first_hubs;
  if (cfg.last_hubs) rp.last_hub_count = *cfg.last_hubs;
  if (rp.shuttle_capacity >= 1) inst.commodities = split_commodities(inst.commodities, rp.shuttle_capacity);
}

inline std::string describe(const ValidationReport& report) {
  std::string out;
  for (const auto& v : report.violations) out += "\n  [" + v.kind + "] " + v.message;
  return out;
}

inline RoutingContext pipeline_context(const Instance& inst, const PipelineConfig& cfg) {
  if (!cfg.perturb_scale) return make_routing_context(inst);
  const HubTable offsets = perturb_arrival_estimates(inst, *cfg.perturb_scale, cfg.seed);
  return make_routing_context(inst, &offsets);
}

// Cross-checks a fleet optimum against the other formulation and the
// matching bound.
inline void check_fleet_oracle(const std::vector<Task>& tasks, const Instance& inst,
                               const FleetResult& res, unsigned threads) {
  const Formulation other =
      res.kind == Formulation::Dense ? Formulation::Sparse : Formulation::Dense;
  const FleetResult alt = solve_fleet(build_fleet_graph(tasks, inst, other, threads));
  const int oracle = min_fleet_oracle(tasks, inst);
  if (alt.fleet_size != res.fleet_size || oracle != res.fleet_size) {
    throw Error("fleet optima disagree: " + std::string(to_string(res.kind)) + "=" +
                std::to_string(res.fleet_size) + " " + to_string(other) + "=" +
                std::to_string(alt.fleet_size) + " matching=" + std::to_string(oracle));
  }
}

struct PipelineResult {
  Instance instance;
  RouteSet pickups;
  RouteSet dropoffs;
  DesignSolution design;
  std::vector<Task> tasks;
  FleetResult fleet;
  Report report;
};

inline PipelineResult run_pipeline(const PipelineConfig& cfg, std::ostream* log = nullptr) {
  namespace fs = std::filesystem;
  const auto started = std::chrono::steady_clock::now();
  auto note = [&](const std::string& msg) {
    if (log == nullptr) return;
    const double s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    char stamp[32];
    std::snprintf(stamp, sizeof stamp, "[%7.2fs] ", s);
    *log << stamp << msg << "\n";
  };
  auto stage = [&](const char* name, auto&& body) {
    try {
      return body();
    } catch (const StageError&) {
      throw;
    } catch (const std::exception& e) {
      throw StageError(name, e.what());
    }
  };

  PipelineResult out;
  out.instance = stage("load", [&] {
    Instance inst = load_instance(cfg.instance_path);
    apply_overrides(inst, cfg);
    return inst;
  });
  const Instance& inst = out.instance;
  stage("validate", [&] {
    const ValidationReport report = validate(inst);
    if (!report.ok()) throw Error("instance is invalid:" + describe(report));
    return 0;
  });
  note("instance: " + std::to_string(inst.node_count()) + " nodes, " +
       std::to_string(inst.hubs.size()) + " hubs, " + std::to_string(inst.commodities.size()) +
       " commodities");
  stage("output", [&] {
    fs::create_directories(cfg.out_dir);
    return 0;
  });
  const fs::path dir(cfg.out_dir);

  stage("enumerate-routes", [&] {
    const RoutingContext ctx = pipeline_context(inst, cfg);
    out.pickups = enumerate_pickup_routes(ctx, cfg.threads);
    out.dropoffs = enumerate_dropoff_routes(ctx, cfg.threads);
    write_text_file((dir / "routes.jsonl").string(), routes_to_jsonl(out.pickups, out.dropoffs, inst));
    return 0;
  });
  note("routes: " + std::to_string(out.pickups.routes.size()) + " pickup, " +
       std::to_string(out.dropoffs.routes.size()) + " dropoff");

  stage("design", [&] {
    const DesignModel dm = build_design_model(inst, out.pickups, out.dropoffs);
    if (!cfg.export_model.empty()) milp::export_model(dm.model, cfg.export_model);
    out.design = solve_design_model(dm, inst);
    write_text_file((dir / "design.json").string(), design_to_json(out.design, inst).dump(2) + "\n");
    return 0;
  });
  note("design: objective " + std::to_string(out.design.objective) + ", " +
       std::to_string(out.design.opened_lines.size()) + " lines opened");

  stage("fleet-size", [&] {
    out.tasks = routes_to_tasks(out.design, inst);
    const FleetGraph g = build_fleet_graph(out.tasks, inst, cfg.formulation, cfg.threads);
    out.fleet = solve_fleet(g);
    if (cfg.check_oracle) check_fleet_oracle(out.tasks, inst, out.fleet, cfg.threads);
    write_text_file((dir / "fleet.json").string(), fleet_to_json(out.fleet, g, inst).dump(2) + "\n");
    return 0;
  });
  note("fleet: " + std::to_string(out.fleet.fleet_size) + " shuttles for " +
       std::to_string(out.tasks.size()) + " tasks");

  stage("report", [&] {
    out.report = make_report(out.design, &out.fleet, inst);
    emit_report(out.report, (dir / "report.json").string(), ReportFormat::Json);
    emit_report(out.report, (dir / "report.csv").string(), ReportFormat::Csv);
    return 0;
  });
  note("done");
  return out;
}

}  // namespace odmts
