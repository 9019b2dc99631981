#include "coplan/cli.hpp"

#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>

#include "CLI11.hpp"

#include "coplan/collab.hpp"
#include "coplan/format.hpp"
#include "coplan/planner.hpp"
#include "coplan/report.hpp"
#include "coplan/scenario.hpp"

namespace coplan::cli {
namespace {

namespace fs = std::filesystem;

double parse_gamma(const std::string& text) {
  if (text == "inf") return kUnbounded;
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || !(value >= 0.0)) {
    fail(ErrorCode::Usage,
         "gamma must be a non-negative number or 'inf', got '" + text + "'");
  }
  return value;
}

std::vector<double> parse_gamma_list(const std::string& text) {
  std::vector<double> gammas;
  std::size_t begin = 0;
  while (begin <= text.size()) {
    const std::size_t comma = text.find(',', begin);
    const std::string piece = text.substr(
        begin, comma == std::string::npos ? std::string::npos : comma - begin);
    if (piece.empty()) {
      fail(ErrorCode::Usage, "empty entry in gamma list '" + text + "'");
    }
    gammas.push_back(parse_gamma(piece));
    if (comma == std::string::npos) break;
    begin = comma + 1;
  }
  return gammas;
}

struct CommandOptions {
  std::string scenario_path;
  std::string out_dir = ".";
  std::string gamma_text;
  std::string gammas_text;
  std::optional<std::uint64_t> seed;
  bool no_transfer = false;
};

Scenario load_with_overrides(const CommandOptions& opts) {
  Scenario scenario = load_scenario(opts.scenario_path);
  if (opts.no_transfer) scenario.options.use_transfer_augmentation = false;
  if (opts.seed) scenario.seed = *opts.seed;
  if (!opts.gamma_text.empty()) {
    const double gamma = parse_gamma(opts.gamma_text);
    if (scenario.task) scenario.task->gamma = gamma;
    if (scenario.pipeline) {
      if (std::isinf(gamma)) {
        fail(ErrorCode::Usage, "pipeline scenarios need a finite gamma");
      }
      scenario.pipeline->gamma = gamma;
    }
  }
  return scenario;
}

fs::path prepare_out_dir(const CommandOptions& opts) {
  fs::path dir(opts.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    fail(ErrorCode::Io,
         "cannot create output directory '" + opts.out_dir + "'");
  }
  return dir;
}

// Values below display resolution read as noise in a share tuple; show them
// as zero without touching the underlying plan.
double displayed(double value) {
  return std::abs(value) < 1e-9 ? 0.0 : value;
}

std::string tuple_of(const std::vector<double>& values) {
  std::string text = "(";
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) text += ", ";
    text += format_sig9(displayed(values[i]));
  }
  text += ")";
  return text;
}

const planner::TaskSpec& require_task(const Scenario& scenario) {
  if (!scenario.task) {
    fail(ErrorCode::Config,
         "the scenario carries no divisible task; this command needs one");
  }
  return *scenario.task;
}

planner::EffectiveFleet effective_fleet(const Scenario& scenario) {
  return scenario.options.use_transfer_augmentation
             ? planner::augment_with_transfer(scenario.fleet(), scenario.links)
             : planner::lift_fleet(scenario.fleet());
}

void print_plan(const planner::AllocationPlan& plan, double gamma,
                bool sensitive) {
  std::cout << "devices: ";
  for (std::size_t i = 0; i < plan.device_ids.size(); ++i) {
    if (i) std::cout << ", ";
    std::cout << plan.device_ids[i];
  }
  std::cout << "\n";
  std::cout << "x = " << tuple_of(plan.shares) << "\n";
  if (sensitive) std::cout << "y = " << tuple_of(plan.sensitive_shares) << "\n";
  std::cout << "gamma = " << (std::isinf(gamma) ? "inf" : format_sig9(gamma))
            << "\n";
  std::cout << "t = " << format_sig9(plan.completion_time_s) << " s\n";
  std::cout << "energy = " << format_sig9(plan.energy_j) << " J\n";
  std::cout << "payment = " << format_sig9(plan.payment) << "\n";
  std::cout << "objective = " << format_sig9(plan.scalarized_objective)
            << "\n";
  if (!plan.budget_violations.empty()) {
    std::cout << "budget violations:";
    for (const std::string& violation : plan.budget_violations) {
      std::cout << " " << violation;
    }
    std::cout << "\n";
  }
}

int cmd_plan(const CommandOptions& opts) {
  Scenario scenario = load_with_overrides(opts);
  if (scenario.pipeline) {
    agents::PipelinePlacement placement = agents::place_pipeline(
        *scenario.pipeline, scenario.fleet(), scenario.links,
        scenario.pipeline->gamma);
    for (std::size_t k = 0; k < placement.stage_devices.size(); ++k) {
      std::cout << "stage " << scenario.pipeline->stages[k].name << " -> "
                << placement.stage_devices[k] << "\n";
    }
    std::cout << "expected time = "
              << format_sig9(placement.chosen.expected_time_s) << " s\n";
    std::cout << "mobile energy = "
              << format_sig9(placement.chosen.mobile_energy_j) << " J\n";
    std::cout << "objective = " << format_sig9(placement.chosen.objective)
              << "\n";
    return 0;
  }
  const planner::TaskSpec& task = require_task(scenario);
  planner::EffectiveFleet fleet = effective_fleet(scenario);
  planner::AllocationPlan plan = planner::plan(task, fleet);
  print_plan(plan, task.gamma, task.sensitive_mb > 0.0);
  const fs::path out = prepare_out_dir(opts) / "plan.csv";
  report::write_plan_csv_file(plan, fleet, out.string());
  std::cout << "wrote " << out.string() << "\n";
  return 0;
}

int cmd_baseline(const CommandOptions& opts) {
  Scenario scenario = load_with_overrides(opts);
  const planner::TaskSpec& task = require_task(scenario);
  planner::EffectiveFleet fleet = effective_fleet(scenario);
  planner::AllocationPlan plan = planner::plan_even_split(task, fleet);
  print_plan(plan, task.gamma, task.sensitive_mb > 0.0);
  const fs::path out = prepare_out_dir(opts) / "baseline.csv";
  report::write_plan_csv_file(plan, fleet, out.string());
  std::cout << "wrote " << out.string() << "\n";
  return 0;
}

int cmd_sweep(const CommandOptions& opts) {
  Scenario scenario = load_with_overrides(opts);
  const planner::TaskSpec& task = require_task(scenario);
  planner::EffectiveFleet fleet = effective_fleet(scenario);
  const std::vector<double> gammas = parse_gamma_list(opts.gammas_text);
  const auto sweep = planner::pareto_sweep(task, fleet, gammas);
  std::cout << "gamma,t,energy,payment,objective\n";
  for (const auto& [gamma, plan] : sweep) {
    std::cout << (std::isinf(gamma) ? "inf" : format_sig9(gamma)) << ","
              << format_sig9(plan.completion_time_s) << ","
              << format_sig9(plan.energy_j) << "," << format_sig9(plan.payment)
              << "," << format_sig9(plan.scalarized_objective) << "\n";
  }
  const fs::path out = prepare_out_dir(opts) / "pareto.csv";
  report::write_pareto_csv_file(sweep, out.string());
  std::cout << "wrote " << out.string() << "\n";
  return 0;
}

int cmd_simulate(const CommandOptions& opts) {
  Scenario scenario = load_with_overrides(opts);
  agents::SimOutcome outcome = agents::run_collaboration(scenario);
  const fs::path dir = prepare_out_dir(opts);
  const fs::path trace_path = dir / "trace.csv";
  const fs::path report_path = dir / "report.json";
  netsim::write_trace_csv_file(outcome.trace, trace_path.string());
  report::write_report_json(outcome.report, report_path.string());

  const report::CollaborationReport& rep = outcome.report;
  std::cout << "status: " << rep.status;
  if (!rep.binding_constraint.empty()) {
    std::cout << " (" << rep.binding_constraint << ")";
  }
  std::cout << "\n";
  std::cout << "completion time = " << format_sig9(rep.completion_time_s)
            << " s\n";
  std::cout << "mobile energy = " << format_sig9(rep.mobile_energy_j)
            << " J\n";
  std::cout << "initiator energy = " << format_sig9(rep.initiator_energy_j)
            << " J\n";
  std::cout << "payment = " << format_sig9(rep.total_payment) << "\n";
  if (rep.gains) {
    std::cout << "time gain = " << format_sig9(rep.gains->time_gain)
              << ", energy gain = " << format_sig9(rep.gains->energy_gain)
              << ", combined = " << format_sig9(rep.gains->combined_gain)
              << "\n";
  }
  std::cout << "wrote " << trace_path.string() << ", " << report_path.string()
            << "\n";
  return rep.status == "infeasible" ? 3 : 0;
}

int map_error(const Error& error) {
  switch (error.code()) {
    case ErrorCode::Usage:
      return 2;
    case ErrorCode::Infeasible:
      return 3;
    case ErrorCode::Config:
    case ErrorCode::Io:
      return 4;
    case ErrorCode::Internal:
      return 1;
  }
  return 1;
}

}  // namespace

int run_command(const std::vector<std::string>& args) {
  CLI::App app{"collaboration planning and offloading simulation"};
  app.name("coplan");
  app.require_subcommand(1);

  CommandOptions opts;
  std::uint64_t seed_value = 0;

  auto add_common = [&opts](CLI::App* sub, bool with_gamma) {
    sub->add_option("scenario", opts.scenario_path, "scenario JSON file")
        ->required();
    sub->add_option("--out-dir", opts.out_dir,
                    "directory for emitted files (default: .)");
    sub->add_flag("--no-transfer", opts.no_transfer,
                  "plan on raw device rates, without folding link transfer "
                  "costs in");
    if (with_gamma) {
      sub->add_option("--gamma", opts.gamma_text,
                      "tradeoff weight, a number >= 0 or 'inf'");
    }
  };

  CLI::App* plan_cmd =
      app.add_subcommand("plan", "compute the allocation plan");
  add_common(plan_cmd, true);

  CLI::App* simulate_cmd = app.add_subcommand(
      "simulate", "run the full collaboration and write trace + report");
  add_common(simulate_cmd, true);
  CLI::Option* seed_opt = simulate_cmd->add_option(
      "--seed", seed_value, "override the scenario's random seed");

  CLI::App* sweep_cmd = app.add_subcommand(
      "sweep", "plan across a gamma list and write the tradeoff curve");
  add_common(sweep_cmd, false);
  sweep_cmd
      ->add_option("--gammas", opts.gammas_text,
                   "comma-separated gamma values, e.g. 0,1,inf")
      ->required();

  CLI::App* baseline_cmd = app.add_subcommand(
      "baseline", "evaluate the naive even-split comparison plan");
  add_common(baseline_cmd, false);

  int exit_code = 0;
  plan_cmd->callback([&] { exit_code = cmd_plan(opts); });
  simulate_cmd->callback([&] {
    if (seed_opt->count() > 0) opts.seed = seed_value;
    exit_code = cmd_simulate(opts);
  });
  sweep_cmd->callback([&] { exit_code = cmd_sweep(opts); });
  baseline_cmd->callback([&] { exit_code = cmd_baseline(opts); });

  std::vector<std::string> argv_storage;
  argv_storage.push_back("coplan");
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  argv.reserve(argv_storage.size());
  for (const std::string& arg : argv_storage) argv.push_back(arg.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    std::cout << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const planner::InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << " [" << e.cause_name() << "]\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return map_error(e);
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return exit_code;
}

}  // namespace coplan::cli
