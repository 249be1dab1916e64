// Copyright 2026 The Fluidstream Authors
// SPDX-License-Identifier: Apache-2.0

// fluidstream: serve the control API, generate streams, replay scenarios,
// dump fused DAGs.

#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "fluid/api/http_server.hpp"
#include "fluid/engine.hpp"
#include "fluid/fusion/fusion.hpp"
#include "fluid/scenario/scenario.hpp"

namespace {

fluid::HttpServer* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

std::vector<fluid::Strategy> parse_strategies(const std::string& list) {
  std::vector<fluid::Strategy> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "all") {
      out = {fluid::Strategy::Baseline, fluid::Strategy::FluidAuto, fluid::Strategy::Excessive};
      continue;
    }
    if (!item.empty()) out.push_back(fluid::parse_strategy(item));
  }
  if (out.empty()) throw fluid::Error(fluid::ErrorCode::InvalidArgument, "no strategy given");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fluid ETL pipeline engine"};
  app.require_subcommand(1);

  // serve
  auto* serve = app.add_subcommand("serve", "run the engine behind the HTTP control API");
  std::string listen = "127.0.0.1:8080";
  std::string log_dir;
  std::int64_t meter_ms = 1000;
  int fusion = 1;
  std::string mode = "manual";
  std::string serve_budget;
  double default_budget = 0;
  serve->add_option("--listen", listen, "host:port");
  serve->add_option("--log-dir", log_dir, "persist log segments here (default: memory only)");
  serve->add_option("--meter-interval-ms", meter_ms, "budget meter interval")->check(CLI::PositiveNumber);
  serve->add_option("--fusion", fusion, "fusion level 0..2")->check(CLI::Range(0, 2));
  serve->add_option("--manager", mode, "auto | manual");
  serve->add_option("--budget", serve_budget, "budget trace CSV")->check(CLI::ExistingFile);
  serve->add_option("--default-budget", default_budget, "budget units per record without a trace");

  // gen
  auto* gen = app.add_subcommand("gen", "write a synthetic GitHub-activity stream");
  fluid::GeneratorParams gp;
  std::string rate_curve = "diurnal:10000";
  std::string gen_config;
  std::string out_path;
  gen->add_option("--seed", gp.seed, "RNG seed");
  gen->add_option("--hours", gp.hours, "hours of stream")->check(CLI::PositiveNumber);
  gen->add_option("--rate-curve", rate_curve, "diurnal:<peak>, flat:<n> or comma list of per-hour counts");
  gen->add_option("--config", gen_config, "generator parameters as JSON (flags override)")->check(CLI::ExistingFile);
  gen->add_option("--out", out_path, "output NDJSON (.gz compresses)")->required();

  // run
  auto* run = app.add_subcommand("run", "replay a scenario under one or more strategies");
  std::string scenario_path, events_path, budget_path, report_dir = "report";
  std::string strategies = "all";
  double speedup = 60;
  run->add_option("--scenario", scenario_path, "scenario JSON")->required()->check(CLI::ExistingFile);
  run->add_option("--events", events_path, "NDJSON events (default: generate from the scenario)")
      ->check(CLI::ExistingFile);
  run->add_option("--budget", budget_path, "budget trace CSV (default: derived by calibration)")
      ->check(CLI::ExistingFile);
  run->add_option("--report", report_dir, "report directory");
  run->add_option("--strategy", strategies, "comma list of baseline, fluid-manual, fluid-auto, excessive, or all");
  run->add_option("--speedup", speedup, "simulated seconds per wall second, 0 = unpaced")->check(CLI::NonNegativeNumber);

  // fusedump
  auto* dump = app.add_subcommand("fusedump", "print the fused DAG of a spec set as JSON");
  std::string specs_path;
  int level = 2;
  dump->add_option("--specs", specs_path, "JSON array of DPR specs")->required()->check(CLI::ExistingFile);
  dump->add_option("--level", level, "fusion level 0..2")->check(CLI::Range(0, 2));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*serve) {
      const auto colon = listen.rfind(':');
      if (colon == std::string::npos) throw fluid::Error(fluid::ErrorCode::InvalidArgument, "--listen wants host:port");
      const std::string host = listen.substr(0, colon);
      const int port = std::stoi(listen.substr(colon + 1));

      fluid::EngineOptions eo;
      eo.log.log_dir = log_dir;
      eo.meter_interval_ms = meter_ms;
      eo.runtime.fusion = fluid::fusion_level_from_int(fusion);
      eo.manager.default_budget = default_budget;
      fluid::Engine engine(eo);
      if (!serve_budget.empty()) engine.manager().set_budget_trace(fluid::BudgetTrace::load_csv(serve_budget));
      engine.manager().set_mode(fluid::parse_manager_mode(mode));
      engine.start_background();

      fluid::HttpServer server(engine);
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cerr << "listening on " << host << ":" << port << "\n";
      const bool ok = server.listen(host, port);
      g_server = nullptr;
      engine.stop_background();
      if (!ok) {
        std::cerr << "cannot listen on " << listen << "\n";
        return 1;
      }
      return 0;
    }

    if (*gen) {
      fluid::GeneratorParams p = gp;
      if (!gen_config.empty()) {
        std::ifstream in(gen_config);
        p = fluid::GeneratorParams::from_json(nlohmann::json::parse(in));
        if (gen->count("--seed")) p.seed = gp.seed;
        if (gen->count("--hours")) p.hours = gp.hours;
      }
      if (gen_config.empty() || gen->count("--rate-curve")) p.rate_curve = fluid::parse_rate_curve(rate_curve);
      const auto n = fluid::generate_file(p, out_path);
      fluid::EventGenerator g(p);
      std::cerr << "wrote " << n << " events to " << out_path << "\n"
                << "spike repo " << g.planted().spike_repo.name << " (id " << g.planted().spike_repo.id << ")"
                << ", spam actor " << g.planted().spam_actor.login << "\n";
      return 0;
    }

    if (*run) {
      const auto spec = fluid::ScenarioSpec::load(scenario_path);
      fluid::RunOptions ro;
      ro.events_path = events_path;
      ro.speedup = speedup;
      ro.strategies = parse_strategies(strategies);
      if (!budget_path.empty()) ro.budget = fluid::BudgetTrace::load_csv(budget_path);
      const auto rep = fluid::run_scenario(spec, ro);
      rep.write(report_dir);
      std::cout << rep.summary();
      return rep.answers_identical() ? 0 : 3;
    }

    if (*dump) {
      std::ifstream in(specs_path);
      const auto j = nlohmann::json::parse(in);
      const auto& arr = j.is_object() && j.contains("specs") ? j.at("specs") : j;
      std::vector<fluid::DprSpec> specs;
      for (const auto& s : arr) {
        specs.push_back(fluid::spec_from_json(s));
        fluid::validate(specs.back());
      }
      const auto dag = fluid::fuse(specs, fluid::fusion_level_from_int(level));
      std::cout << fluid::fusedump(dag, specs).dump(2) << "\n";
      return 0;
    }
  } catch (const fluid::Error& e) {
    std::cerr << "error (" << fluid::error_code_name(e.code()) << "): " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
