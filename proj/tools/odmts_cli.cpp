#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "odmts/odmts.hpp"

namespace {

using namespace odmts;

void add_routing_flags(CLI::App* app, PipelineConfig& cfg) {
  app->add_option("--capacity", cfg.capacity, "shuttle capacity K")->check(CLI::PositiveNumber);
  app->add_option("--delta", cfg.delta, "duration threshold")->check(CLI::NonNegativeNumber);
  app->add_option("--bucket", cfg.bucket, "time bucket length W (minutes)")->check(CLI::PositiveNumber);
  app->add_option("--first-hubs", cfg.first_hubs, "first-hub set size")->check(CLI::PositiveNumber);
  app->add_option("--last-hubs", cfg.last_hubs, "last-hub set size")->check(CLI::PositiveNumber);
}

void add_solver_flags(CLI::App* app, PipelineConfig& cfg) {
  app->add_option("--threads", cfg.threads, "worker threads")->check(CLI::PositiveNumber);
}

Instance load_checked(const PipelineConfig& cfg) {
  Instance inst = load_instance(cfg.instance_path);
  apply_overrides(inst, cfg);
  const ValidationReport report = validate(inst);
  if (!report.ok()) throw StageError("validate", "instance is invalid:" + describe(report));
  return inst;
}

void write_or_print(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    write_text_file(path, text);
  }
}

// Splices "key = value" lines from a --config file in right after the
// subcommand name, so flags given on the command line win.
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty() || args.empty()) return args;
  std::ifstream in(path);
  if (!in) throw CLI::FileError::Missing(path);
  std::vector<std::string> injected;
  for (const auto& item : CLI::ConfigINI().from_config(in)) {
    if (item.name.empty() || item.name == "++" || item.name == "--") continue;
    const std::string value = item.inputs.empty() ? "true" : item.inputs.front();
    injected.push_back("--" + item.name + "=" + value);
  }
  args.insert(args.begin() + 1, injected.begin(), injected.end());
  return args;
}

ReportFormat format_for(const std::string& path) {
  return std::filesystem::path(path).extension() == ".csv" ? ReportFormat::Csv : ReportFormat::Json;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"On-demand multimodal transit design and fleet sizing"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  std::string config_path;

  PipelineConfig cfg;
  std::string out_path;
  std::string routes_path, design_path, fleet_path;
  std::vector<std::string> design_paths;

  // gen
  struct {
    std::uint64_t seed = 1;
    std::size_t nodes = 60, hubs = 6, commodities = 100;
    double t_min = 0.0, t_max = 60.0;
    GenParams params;
  } gen;
  auto* gen_cmd = app.add_subcommand("gen", "generate a random instance");
  gen_cmd->add_option("--seed", gen.seed, "random seed");
  gen_cmd->add_option("--nodes", gen.nodes, "node count")->check(CLI::Range(2, 100000));
  gen_cmd->add_option("--hubs", gen.hubs, "hub count")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--commodities", gen.commodities, "commodity count");
  gen_cmd->add_option("--t-min", gen.t_min, "horizon start (minutes)");
  gen_cmd->add_option("--t-max", gen.t_max, "horizon end (minutes)");
  gen_cmd->add_option("--side", gen.params.side_km, "side of the square region (km)");
  gen_cmd->add_option("--speed-factor", gen.params.speed_factor, "minutes per km");
  gen_cmd->add_option("--max-passengers", gen.params.max_passengers, "riders per commodity upper bound");
  gen_cmd->add_option("--capacity", gen.params.routing.shuttle_capacity, "shuttle capacity K");
  gen_cmd->add_option("--bus-trips", gen.params.cost.bus_trips_per_line, "bus trips per line");
  gen_cmd->add_option("--bus-cost", gen.params.cost.bus_cost_per_km, "bus cost per km");
  gen_cmd->add_option("--alpha", gen.params.cost.alpha, "inconvenience weight");
  gen_cmd->add_option("--out", out_path, "output file (default stdout)");
  gen_cmd->add_option("--config", config_path, "key = value file; flags override it");

  auto* validate_cmd = app.add_subcommand("validate", "check an instance");
  validate_cmd->add_option("--instance", cfg.instance_path, "instance JSON")->required();
  add_routing_flags(validate_cmd, cfg);

  auto* routes_cmd = app.add_subcommand("enumerate-routes", "enumerate pickup and dropoff routes");
  routes_cmd->add_option("--instance", cfg.instance_path, "instance JSON")->required();
  routes_cmd->add_option("--out", out_path, "route dump (JSON lines, default stdout)");
  routes_cmd->add_option("--perturb-scale", cfg.perturb_scale, "Laplace noise scale on t1")
      ->check(CLI::PositiveNumber);
  routes_cmd->add_option("--seed", cfg.seed, "noise seed");
  add_routing_flags(routes_cmd, cfg);
  add_solver_flags(routes_cmd, cfg);
  routes_cmd->add_option("--config", config_path, "key = value file; flags override it");

  auto* design_cmd = app.add_subcommand("design", "solve the network design model");
  design_cmd->add_option("--instance", cfg.instance_path, "instance JSON")->required();
  design_cmd->add_option("--routes", routes_path, "route dump to use instead of enumerating");
  design_cmd->add_option("--out", out_path, "design JSON (default stdout)");
  design_cmd->add_option("--export-model", cfg.export_model, "write the model (.lp or .mps)");
  add_routing_flags(design_cmd, cfg);
  add_solver_flags(design_cmd, cfg);
  design_cmd->add_option("--config", config_path, "key = value file; flags override it");

  std::string formulation = "sparse";
  auto* fleet_cmd = app.add_subcommand("fleet-size", "size the shuttle fleet for a design");
  fleet_cmd->add_option("--instance", cfg.instance_path, "instance JSON")->required();
  fleet_cmd->add_option("--design", design_path, "design JSON")->required();
  fleet_cmd->add_option("--formulation", formulation, "dense or sparse")
      ->check(CLI::IsMember({"dense", "sparse"}));
  fleet_cmd->add_flag("--check-oracle", cfg.check_oracle, "cross-check against the other model and matching");
  fleet_cmd->add_option("--export-model", cfg.export_model, "write the fleet model (.lp or .mps)");
  fleet_cmd->add_option("--out", out_path, "fleet JSON (default stdout)");
  add_routing_flags(fleet_cmd, cfg);
  add_solver_flags(fleet_cmd, cfg);
  fleet_cmd->add_option("--config", config_path, "key = value file; flags override it");

  auto* report_cmd = app.add_subcommand("report", "compute metrics for one or more designs");
  report_cmd->add_option("--instance", cfg.instance_path, "instance JSON")->required();
  report_cmd->add_option("--design", design_paths, "design JSON (repeatable)")
      ->required()
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  report_cmd->add_option("--fleet", fleet_path, "fleet JSON for the first design");
  report_cmd->add_option("--out", out_path, "report file (.json or .csv, default stdout)");
  add_routing_flags(report_cmd, cfg);

  auto* pipeline_cmd = app.add_subcommand("pipeline", "run every stage end to end");
  pipeline_cmd->add_option("--instance", cfg.instance_path, "instance JSON")->required();
  pipeline_cmd->add_option("--out", cfg.out_dir, "output directory");
  pipeline_cmd->add_option("--formulation", formulation, "dense or sparse")
      ->check(CLI::IsMember({"dense", "sparse"}));
  pipeline_cmd->add_flag("--check-oracle", cfg.check_oracle, "fail if fleet models and matching disagree");
  pipeline_cmd->add_option("--export-model", cfg.export_model, "write the design model (.lp or .mps)");
  pipeline_cmd->add_option("--seed", cfg.seed, "noise seed");
  pipeline_cmd->add_option("--perturb-scale", cfg.perturb_scale, "Laplace noise scale on t1")
      ->check(CLI::PositiveNumber);
  add_routing_flags(pipeline_cmd, cfg);
  add_solver_flags(pipeline_cmd, cfg);
  pipeline_cmd->add_option("--config", config_path, "key = value file; flags override it");

  try {
    std::vector<std::string> args = expand_config(argc, argv);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    cfg.formulation = formulation_from_string(formulation);

    if (gen_cmd->parsed()) {
      const Instance inst = generate(gen.seed, gen.nodes, gen.hubs, gen.commodities,
                                     {gen.t_min, gen.t_max}, gen.params);
      write_or_print(out_path, instance_to_json(inst).dump(2) + "\n");
      return 0;
    }

    if (validate_cmd->parsed()) {
      Instance inst = load_instance(cfg.instance_path);
      apply_overrides(inst, cfg);
      const ValidationReport report = validate(inst);
      for (const auto& v : report.violations) std::cout << v.kind << ": " << v.message << "\n";
      std::cout << (report.ok() ? "valid" : "invalid") << "\n";
      return report.ok() ? 0 : 1;
    }

    if (routes_cmd->parsed()) {
      const Instance inst = load_checked(cfg);
      const RoutingContext ctx = pipeline_context(inst, cfg);
      const RouteSet pick = enumerate_pickup_routes(ctx, cfg.threads);
      const RouteSet drop = enumerate_dropoff_routes(ctx, cfg.threads);
      write_or_print(out_path, routes_to_jsonl(pick, drop, inst));
      std::cerr << pick.routes.size() << " pickup and " << drop.routes.size() << " dropoff routes\n";
      return 0;
    }

    if (design_cmd->parsed()) {
      const Instance inst = load_checked(cfg);
      RouteSet pick, drop;
      if (!routes_path.empty()) {
        std::tie(pick, drop) = routes_from_jsonl(read_text_file(routes_path), inst);
      } else {
        const RoutingContext ctx = make_routing_context(inst);
        pick = enumerate_pickup_routes(ctx, cfg.threads);
        drop = enumerate_dropoff_routes(ctx, cfg.threads);
      }
      const DesignModel dm = build_design_model(inst, pick, drop);
      if (!cfg.export_model.empty()) milp::export_model(dm.model, cfg.export_model);
      const DesignSolution sol = solve_design_model(dm, inst);
      write_or_print(out_path, design_to_json(sol, inst).dump(2) + "\n");
      std::cerr << "objective " << sol.objective << ", " << sol.opened_lines.size()
                << " lines opened\n";
      return 0;
    }

    if (fleet_cmd->parsed()) {
      const Instance inst = load_checked(cfg);
      const DesignSolution sol = design_from_json(nlohmann::json::parse(read_text_file(design_path)), inst);
      const std::vector<Task> tasks = routes_to_tasks(sol, inst);
      const FleetGraph g = build_fleet_graph(tasks, inst, cfg.formulation, cfg.threads);
      if (!cfg.export_model.empty()) milp::export_model(fleet_model(g), cfg.export_model);
      const FleetResult res = solve_fleet(g);
      if (cfg.check_oracle) check_fleet_oracle(tasks, inst, res, cfg.threads);
      write_or_print(out_path, fleet_to_json(res, g, inst).dump(2) + "\n");
      std::cerr << "fleet size " << res.fleet_size << " (" << to_string(res.kind) << ", "
                << g.arcs.size() << " arcs)\n";
      return 0;
    }

    if (report_cmd->parsed()) {
      const Instance base = load_checked(cfg);
      std::vector<Report> reports;
      for (std::size_t k = 0; k < design_paths.size(); ++k) {
        const auto dj = nlohmann::json::parse(read_text_file(design_paths[k]));
        const DesignSolution sol = design_from_json(dj, base);
        std::optional<FleetResult> fleet;
        if (k == 0 && !fleet_path.empty()) {
          const auto j = nlohmann::json::parse(read_text_file(fleet_path));
          fleet.emplace();
          fleet->fleet_size = j.at("fleet_size").get<int>();
        }
        Report rep = make_report(sol, fleet ? &*fleet : nullptr, base);
        if (dj.contains("K")) rep.capacity = dj["K"].get<int>();
        reports.push_back(rep);
      }
      if (out_path.empty() || out_path == "-") {
        std::cout << reports_to_csv(reports);
      } else {
        emit_report(reports, out_path, format_for(out_path));
      }
      return 0;
    }

    if (pipeline_cmd->parsed()) {
      const PipelineResult res = run_pipeline(cfg, &std::cerr);
      std::cout << report_to_json(res.report).dump(2) << "\n";
      return 0;
    }
  } catch (const StageError& e) {
    std::cerr << "error in stage " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
