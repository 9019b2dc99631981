#include "coplan.h"

#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "coplan/cli.hpp"
#include "coplan/collab.hpp"
#include "coplan/planner.hpp"
#include "coplan/report.hpp"
#include "coplan/scenario.hpp"

struct coplan_scenario {
  coplan::Scenario value;
};

struct coplan_plan {
  coplan::planner::AllocationPlan plan;
  coplan::planner::EffectiveFleet fleet;
};

struct coplan_sim {
  coplan::agents::SimOutcome outcome;
};

struct coplan_sweep {
  std::vector<std::pair<double, coplan::planner::AllocationPlan>> points;
};

namespace {

thread_local std::string g_last_error;

coplan_status set_error(coplan_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

coplan_status from_exception(const coplan::Error& e) {
  return set_error(static_cast<coplan_status>(static_cast<int>(e.code())),
                   e.what());
}

// Runs the body, translating exceptions into status codes at the boundary.
template <typename Fn>
coplan_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return COPLAN_OK;
  } catch (const coplan::Error& e) {
    return from_exception(e);
  } catch (const std::exception& e) {
    return set_error(COPLAN_INTERNAL_ERROR, e.what());
  } catch (...) {
    return set_error(COPLAN_INTERNAL_ERROR, "unknown failure");
  }
}

const coplan::planner::TaskSpec& task_of(const coplan::Scenario& scenario) {
  if (!scenario.task) {
    coplan::fail(coplan::ErrorCode::Config,
                 "the scenario carries no divisible task");
  }
  return *scenario.task;
}

coplan::planner::EffectiveFleet fleet_of(const coplan::Scenario& scenario) {
  return scenario.options.use_transfer_augmentation
             ? coplan::planner::augment_with_transfer(scenario.fleet(),
                                                      scenario.links)
             : coplan::planner::lift_fleet(scenario.fleet());
}

double nan_value() { return std::numeric_limits<double>::quiet_NaN(); }

}  // namespace

extern "C" {

const char* coplan_version(void) { return "0.1.0"; }

const char* coplan_last_error(void) { return g_last_error.c_str(); }

coplan_status coplan_scenario_open(const char* path, coplan_scenario** out) {
  if (path == nullptr || out == nullptr) {
    return set_error(COPLAN_USAGE_ERROR, "null argument");
  }
  *out = nullptr;
  return guarded([&] {
    auto handle = std::make_unique<coplan_scenario>();
    handle->value = coplan::load_scenario(path);
    *out = handle.release();
  });
}

coplan_status coplan_scenario_parse(const char* json_text,
                                    coplan_scenario** out) {
  if (json_text == nullptr || out == nullptr) {
    return set_error(COPLAN_USAGE_ERROR, "null argument");
  }
  *out = nullptr;
  return guarded([&] {
    nlohmann::json root;
    try {
      root = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
      coplan::fail(coplan::ErrorCode::Config,
                   std::string("scenario text is not valid JSON: ") + e.what());
    }
    auto handle = std::make_unique<coplan_scenario>();
    handle->value = coplan::parse_scenario(root, "<memory>");
    *out = handle.release();
  });
}

void coplan_scenario_close(coplan_scenario* scenario) { delete scenario; }

coplan_status coplan_scenario_set_seed(coplan_scenario* scenario,
                                       uint64_t seed) {
  if (scenario == nullptr) {
    return set_error(COPLAN_USAGE_ERROR, "null scenario");
  }
  scenario->value.seed = seed;
  g_last_error.clear();
  return COPLAN_OK;
}

coplan_status coplan_scenario_set_gamma(coplan_scenario* scenario,
                                        double gamma) {
  if (scenario == nullptr) {
    return set_error(COPLAN_USAGE_ERROR, "null scenario");
  }
  return guarded([&] {
    if (!(gamma >= 0.0)) {
      coplan::fail(coplan::ErrorCode::Usage, "gamma must be >= 0");
    }
    if (scenario->value.task) {
      scenario->value.task->gamma = gamma;
    } else if (scenario->value.pipeline) {
      if (std::isinf(gamma)) {
        coplan::fail(coplan::ErrorCode::Usage,
                     "pipeline scenarios need a finite gamma");
      }
      scenario->value.pipeline->gamma = gamma;
    } else {
      coplan::fail(coplan::ErrorCode::Config,
                   "the scenario carries no task to weight");
    }
  });
}

coplan_status coplan_scenario_set_transfer_augmentation(
    coplan_scenario* scenario, int enabled) {
  if (scenario == nullptr) {
    return set_error(COPLAN_USAGE_ERROR, "null scenario");
  }
  scenario->value.options.use_transfer_augmentation = enabled != 0;
  g_last_error.clear();
  return COPLAN_OK;
}

size_t coplan_scenario_device_count(const coplan_scenario* scenario) {
  return scenario == nullptr ? 0 : scenario->value.devices.size();
}

coplan_status coplan_plan_compute(const coplan_scenario* scenario,
                                  coplan_plan** out) {
  if (scenario == nullptr || out == nullptr) {
    return set_error(COPLAN_USAGE_ERROR, "null argument");
  }
  *out = nullptr;
  return guarded([&] {
    auto handle = std::make_unique<coplan_plan>();
    handle->fleet = fleet_of(scenario->value);
    handle->plan =
        coplan::planner::plan(task_of(scenario->value), handle->fleet);
    *out = handle.release();
  });
}

coplan_status coplan_plan_even_split(const coplan_scenario* scenario,
                                     coplan_plan** out) {
  if (scenario == nullptr || out == nullptr) {
    return set_error(COPLAN_USAGE_ERROR, "null argument");
  }
  *out = nullptr;
  return guarded([&] {
    auto handle = std::make_unique<coplan_plan>();
    handle->fleet = fleet_of(scenario->value);
    handle->plan = coplan::planner::plan_even_split(task_of(scenario->value),
                                                    handle->fleet);
    *out = handle.release();
  });
}

void coplan_plan_close(coplan_plan* plan) { delete plan; }

size_t coplan_plan_device_count(const coplan_plan* plan) {
  return plan == nullptr ? 0 : plan->plan.device_ids.size();
}

const char* coplan_plan_device_id(const coplan_plan* plan, size_t index) {
  if (plan == nullptr || index >= plan->plan.device_ids.size()) return nullptr;
  return plan->plan.device_ids[index].c_str();
}

double coplan_plan_share_mb(const coplan_plan* plan, size_t index) {
  if (plan == nullptr || index >= plan->plan.shares.size()) return nan_value();
  return plan->plan.shares[index];
}

double coplan_plan_sensitive_share_mb(const coplan_plan* plan, size_t index) {
  if (plan == nullptr || index >= plan->plan.sensitive_shares.size()) {
    return nan_value();
  }
  return plan->plan.sensitive_shares[index];
}

double coplan_plan_completion_time_s(const coplan_plan* plan) {
  return plan == nullptr ? nan_value() : plan->plan.completion_time_s;
}

double coplan_plan_energy_j(const coplan_plan* plan) {
  return plan == nullptr ? nan_value() : plan->plan.energy_j;
}

double coplan_plan_payment(const coplan_plan* plan) {
  return plan == nullptr ? nan_value() : plan->plan.payment;
}

double coplan_plan_objective(const coplan_plan* plan) {
  return plan == nullptr ? nan_value() : plan->plan.scalarized_objective;
}

int coplan_plan_is_baseline(const coplan_plan* plan) {
  return plan != nullptr &&
         plan->plan.status == coplan::planner::PlanStatus::Baseline;
}

size_t coplan_plan_violation_count(const coplan_plan* plan) {
  return plan == nullptr ? 0 : plan->plan.budget_violations.size();
}

const char* coplan_plan_violation(const coplan_plan* plan, size_t index) {
  if (plan == nullptr || index >= plan->plan.budget_violations.size()) {
    return nullptr;
  }
  return plan->plan.budget_violations[index].c_str();
}

coplan_status coplan_plan_write_csv(const coplan_plan* plan,
                                    const char* path) {
  if (plan == nullptr || path == nullptr) {
    return set_error(COPLAN_USAGE_ERROR, "null argument");
  }
  return guarded(
      [&] { coplan::report::write_plan_csv_file(plan->plan, plan->fleet, path); });
}

coplan_status coplan_simulate(const coplan_scenario* scenario,
                              coplan_sim** out) {
  if (scenario == nullptr || out == nullptr) {
    return set_error(COPLAN_USAGE_ERROR, "null argument");
  }
  *out = nullptr;
  coplan_status status = guarded([&] {
    auto handle = std::make_unique<coplan_sim>();
    handle->outcome = coplan::agents::run_collaboration(scenario->value);
    *out = handle.release();
  });
  if (status != COPLAN_OK) return status;
  if ((*out)->outcome.report.status == "infeasible") {
    return set_error(COPLAN_INFEASIBLE,
                     "planning infeasible: " +
                         (*out)->outcome.report.binding_constraint);
  }
  return COPLAN_OK;
}

void coplan_sim_close(coplan_sim* sim) { delete sim; }

const char* coplan_sim_status(const coplan_sim* sim) {
  return sim == nullptr ? nullptr : sim->outcome.report.status.c_str();
}

const char* coplan_sim_binding_constraint(const coplan_sim* sim) {
  if (sim == nullptr || sim->outcome.report.binding_constraint.empty()) {
    return nullptr;
  }
  return sim->outcome.report.binding_constraint.c_str();
}

double coplan_sim_completion_time_s(const coplan_sim* sim) {
  return sim == nullptr ? nan_value() : sim->outcome.report.completion_time_s;
}

double coplan_sim_mobile_energy_j(const coplan_sim* sim) {
  return sim == nullptr ? nan_value() : sim->outcome.report.mobile_energy_j;
}

double coplan_sim_initiator_energy_j(const coplan_sim* sim) {
  return sim == nullptr ? nan_value() : sim->outcome.report.initiator_energy_j;
}

double coplan_sim_discovery_energy_j(const coplan_sim* sim) {
  return sim == nullptr ? nan_value() : sim->outcome.report.discovery_energy_j;
}

double coplan_sim_payment(const coplan_sim* sim) {
  return sim == nullptr ? nan_value() : sim->outcome.report.total_payment;
}

size_t coplan_sim_event_count(const coplan_sim* sim) {
  return sim == nullptr ? 0 : sim->outcome.trace.events.size();
}

int coplan_sim_has_gains(const coplan_sim* sim) {
  return sim != nullptr && sim->outcome.report.gains.has_value();
}

double coplan_sim_combined_gain(const coplan_sim* sim) {
  if (sim == nullptr || !sim->outcome.report.gains) return nan_value();
  return sim->outcome.report.gains->combined_gain;
}

coplan_status coplan_sim_write_trace_csv(const coplan_sim* sim,
                                         const char* path) {
  if (sim == nullptr || path == nullptr) {
    return set_error(COPLAN_USAGE_ERROR, "null argument");
  }
  return guarded(
      [&] { coplan::netsim::write_trace_csv_file(sim->outcome.trace, path); });
}

coplan_status coplan_sim_write_report_json(const coplan_sim* sim,
                                           const char* path) {
  if (sim == nullptr || path == nullptr) {
    return set_error(COPLAN_USAGE_ERROR, "null argument");
  }
  return guarded(
      [&] { coplan::report::write_report_json(sim->outcome.report, path); });
}

coplan_status coplan_sweep_run(const coplan_scenario* scenario,
                               const double* gammas, size_t count,
                               coplan_sweep** out) {
  if (scenario == nullptr || out == nullptr ||
      (gammas == nullptr && count > 0)) {
    return set_error(COPLAN_USAGE_ERROR, "null argument");
  }
  *out = nullptr;
  return guarded([&] {
    const std::vector<double> list(gammas, gammas + count);
    auto handle = std::make_unique<coplan_sweep>();
    handle->points = coplan::planner::pareto_sweep(
        task_of(scenario->value), fleet_of(scenario->value), list);
    *out = handle.release();
  });
}

void coplan_sweep_close(coplan_sweep* sweep) { delete sweep; }

size_t coplan_sweep_point_count(const coplan_sweep* sweep) {
  return sweep == nullptr ? 0 : sweep->points.size();
}

double coplan_sweep_gamma(const coplan_sweep* sweep, size_t index) {
  if (sweep == nullptr || index >= sweep->points.size()) return nan_value();
  return sweep->points[index].first;
}

double coplan_sweep_time_s(const coplan_sweep* sweep, size_t index) {
  if (sweep == nullptr || index >= sweep->points.size()) return nan_value();
  return sweep->points[index].second.completion_time_s;
}

double coplan_sweep_energy_j(const coplan_sweep* sweep, size_t index) {
  if (sweep == nullptr || index >= sweep->points.size()) return nan_value();
  return sweep->points[index].second.energy_j;
}

double coplan_sweep_payment(const coplan_sweep* sweep, size_t index) {
  if (sweep == nullptr || index >= sweep->points.size()) return nan_value();
  return sweep->points[index].second.payment;
}

coplan_status coplan_sweep_write_csv(const coplan_sweep* sweep,
                                     const char* path) {
  if (sweep == nullptr || path == nullptr) {
    return set_error(COPLAN_USAGE_ERROR, "null argument");
  }
  return guarded(
      [&] { coplan::report::write_pareto_csv_file(sweep->points, path); });
}

int coplan_run_command(int argc, const char* const* argv) {
  try {
    std::vector<std::string> args;
    args.reserve(argc > 0 ? static_cast<size_t>(argc) : 0);
    for (int i = 0; i < argc; ++i) args.emplace_back(argv[i]);
    return coplan::cli::run_command(args);
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return 1;
  } catch (...) {
    g_last_error = "unknown failure";
    return 1;
  }
}

}  // extern "C"
