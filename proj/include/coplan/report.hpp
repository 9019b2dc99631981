#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "coplan/agents.hpp"
#include "coplan/planner.hpp"
#include "json.hpp"

namespace coplan::report {

// Relative improvement of a collaborative run over doing everything locally.
// Each gain is 1 - collaborative/local, so positive means the collaboration
// helped and negative means it cost more than going alone.
struct Gains {
  double local_time_s = 0.0;
  double local_energy_j = 0.0;
  double time_gain = 0.0;
  double energy_gain = 0.0;
  double combined_gain = 0.0;  // arithmetic mean of the two gains
};

// Both local baselines must be positive; a zero or negative baseline has no
// meaningful relative gain and raises a config error.
Gains compute_gains(double local_time_s, double local_energy_j,
                    double collab_time_s, double collab_energy_j);

struct CollaborationReport {
  std::string status = "ok";       // "ok" or "infeasible"
  std::string binding_constraint;  // set when status == "infeasible"
  double completion_time_s = 0.0;
  std::map<std::string, double> per_device_energy_j;
  double mobile_energy_j = 0.0;     // battery-powered devices only
  double initiator_energy_j = 0.0;
  double discovery_energy_j = 0.0;  // radio energy spent before planning
  double total_payment = 0.0;
  std::optional<planner::AllocationPlan> plan;
  std::optional<agents::PipelinePlacement> placement;
  std::vector<std::string> placement_fleet_ids;  // resolves placement indices
  std::optional<Gains> gains;
  std::uint64_t seed = 0;
  bool used_transfer_augmentation = true;
};

nlohmann::json to_json(const CollaborationReport& report);
void write_report_json(const CollaborationReport& report,
                       const std::string& path);

// One row per device holding the planned share, the time the share keeps the
// device busy, and the energy and payment it accrues at the effective rates.
void write_plan_csv(const planner::AllocationPlan& plan,
                    const planner::EffectiveFleet& fleet, std::ostream& out);
void write_plan_csv_file(const planner::AllocationPlan& plan,
                         const planner::EffectiveFleet& fleet,
                         const std::string& path);

void write_pareto_csv(
    const std::vector<std::pair<double, planner::AllocationPlan>>& sweep,
    std::ostream& out);
void write_pareto_csv_file(
    const std::vector<std::pair<double, planner::AllocationPlan>>& sweep,
    const std::string& path);

}  // namespace coplan::report
