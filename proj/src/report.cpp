#include "coplan/report.hpp"

#include <fstream>

#include "coplan/errors.hpp"
#include "coplan/format.hpp"

namespace coplan::report {
namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot write '" + path + "'");
  return out;
}

nlohmann::json plan_to_json(const planner::AllocationPlan& plan) {
  nlohmann::json devices = nlohmann::json::array();
  for (std::size_t i = 0; i < plan.device_ids.size(); ++i) {
    devices.push_back({{"device", plan.device_ids[i]},
                       {"share_mb", plan.shares[i]},
                       {"sensitive_share_mb", plan.sensitive_shares[i]}});
  }
  nlohmann::json out = {
      {"devices", std::move(devices)},
      {"completion_time_s", plan.completion_time_s},
      {"energy_j", plan.energy_j},
      {"payment", plan.payment},
      {"objective", plan.scalarized_objective},
      {"status",
       plan.status == planner::PlanStatus::Optimal ? "optimal" : "baseline"},
  };
  if (!plan.budget_violations.empty()) {
    out["budget_violations"] = plan.budget_violations;
  }
  return out;
}

nlohmann::json placement_to_json(const agents::PipelinePlacement& placement,
                                 const std::vector<std::string>& fleet_ids) {
  auto resolve = [&fleet_ids](const std::vector<std::size_t>& assignment) {
    nlohmann::json ids = nlohmann::json::array();
    for (std::size_t index : assignment) {
      ids.push_back(index < fleet_ids.size() ? fleet_ids[index]
                                             : std::to_string(index));
    }
    return ids;
  };
  nlohmann::json table = nlohmann::json::array();
  for (const agents::PlacementEval& eval : placement.table) {
    table.push_back({{"devices", resolve(eval.assignment)},
                     {"expected_time_s", eval.expected_time_s},
                     {"mobile_energy_j", eval.mobile_energy_j},
                     {"initiator_energy_j", eval.initiator_energy_j},
                     {"objective", eval.objective}});
  }
  return {{"stage_devices", placement.stage_devices},
          {"expected_time_s", placement.chosen.expected_time_s},
          {"mobile_energy_j", placement.chosen.mobile_energy_j},
          {"initiator_energy_j", placement.chosen.initiator_energy_j},
          {"objective", placement.chosen.objective},
          {"table", std::move(table)}};
}

}  // namespace

Gains compute_gains(double local_time_s, double local_energy_j,
                    double collab_time_s, double collab_energy_j) {
  if (!(local_time_s > 0.0) || !(local_energy_j > 0.0)) {
    fail(ErrorCode::Config,
         "local baselines must be positive to express relative gains");
  }
  Gains gains;
  gains.local_time_s = local_time_s;
  gains.local_energy_j = local_energy_j;
  gains.time_gain = 1.0 - collab_time_s / local_time_s;
  gains.energy_gain = 1.0 - collab_energy_j / local_energy_j;
  gains.combined_gain = (gains.time_gain + gains.energy_gain) / 2.0;
  return gains;
}

nlohmann::json to_json(const CollaborationReport& report) {
  nlohmann::json energy = {
      {"per_device_j", report.per_device_energy_j},
      {"mobile_total_j", report.mobile_energy_j},
      {"initiator_j", report.initiator_energy_j},
      {"discovery_j", report.discovery_energy_j},
  };
  nlohmann::json out = {
      {"status", report.status},
      {"completion_time_s", report.completion_time_s},
      {"energy", std::move(energy)},
      {"payment", report.total_payment},
      {"seed", report.seed},
      {"used_transfer_augmentation", report.used_transfer_augmentation},
  };
  if (!report.binding_constraint.empty()) {
    out["binding_constraint"] = report.binding_constraint;
  }
  if (report.plan) out["plan"] = plan_to_json(*report.plan);
  if (report.placement) {
    out["placement"] =
        placement_to_json(*report.placement, report.placement_fleet_ids);
  }
  if (report.gains) {
    out["gains"] = {{"local_time_s", report.gains->local_time_s},
                    {"local_energy_j", report.gains->local_energy_j},
                    {"time_gain", report.gains->time_gain},
                    {"energy_gain", report.gains->energy_gain},
                    {"combined_gain", report.gains->combined_gain}};
  }
  return out;
}

void write_report_json(const CollaborationReport& report,
                       const std::string& path) {
  std::ofstream out = open_out(path);
  out << to_json(report).dump(2) << "\n";
  if (!out) fail(ErrorCode::Io, "failed while writing '" + path + "'");
}

void write_plan_csv(const planner::AllocationPlan& plan,
                    const planner::EffectiveFleet& fleet, std::ostream& out) {
  out << "device,kind,share_mb,sensitive_share_mb,busy_time_s,energy_j,"
         "payment\n";
  for (std::size_t i = 0; i < plan.device_ids.size(); ++i) {
    const double assigned = plan.shares[i] + plan.sensitive_shares[i];
    const planner::EffectiveDevice& device = fleet.at(i);
    out << plan.device_ids[i] << ',' << to_string(device.base.kind) << ','
        << format_sig9(plan.shares[i]) << ',' << format_sig9(plan.sensitive_shares[i]) << ','
        << format_sig9(assigned * device.effective_time_per_mb) << ','
        << format_sig9(assigned * device.objective_energy_per_mb) << ','
        << format_sig9(assigned * device.base.payment_per_mb) << '\n';
  }
}

void write_plan_csv_file(const planner::AllocationPlan& plan,
                         const planner::EffectiveFleet& fleet,
                         const std::string& path) {
  std::ofstream out = open_out(path);
  write_plan_csv(plan, fleet, out);
  if (!out) fail(ErrorCode::Io, "failed while writing '" + path + "'");
}

void write_pareto_csv(
    const std::vector<std::pair<double, planner::AllocationPlan>>& sweep,
    std::ostream& out) {
  out << "gamma,t,energy,payment,objective\n";
  for (const auto& [gamma, plan] : sweep) {
    out << format_sig9(gamma) << ',' << format_sig9(plan.completion_time_s) << ','
        << format_sig9(plan.energy_j) << ',' << format_sig9(plan.payment) << ','
        << format_sig9(plan.scalarized_objective) << '\n';
  }
}

void write_pareto_csv_file(
    const std::vector<std::pair<double, planner::AllocationPlan>>& sweep,
    const std::string& path) {
  std::ofstream out = open_out(path);
  write_pareto_csv(sweep, out);
  if (!out) fail(ErrorCode::Io, "failed while writing '" + path + "'");
}

}  // namespace coplan::report
