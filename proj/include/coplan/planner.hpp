#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "coplan/errors.hpp"
#include "coplan/lp.hpp"
#include "coplan/netsim.hpp"
#include "coplan/types.hpp"

namespace coplan::planner {

// Per-device cost rates, all per MB of workload. `energy_budget` caps the
// joules a device will donate; unbounded means "no cap".
struct DeviceProfile {
  std::string id;
  DeviceKind kind = DeviceKind::Peer;
  double energy_per_mb = 0.0;    // e, J/MB
  double time_per_mb = 1.0;      // f, s/MB
  double payment_per_mb = 0.0;   // c, currency/MB
  double energy_budget = kUnbounded;  // b, J
  bool trusted = true;
  std::string link;              // link id for non-initiator devices
  double overhead_time_s = 0.0;  // fixed per-delegation setup, seconds
  double overhead_energy_j = 0.0;
};

enum class ObjectiveMode { EnergyTime, CostTime };

const char* to_string(ObjectiveMode mode);

// A divisible workload of `workload_mb` MB, of which `sensitive_mb` may only
// run on trusted devices. A gamma of infinity selects the time-first mode:
// completion time is minimised outright instead of being weighed against the
// primary cost.
struct TaskSpec {
  std::string service = "default";
  double workload_mb = 0.0;       // w
  double sensitive_mb = 0.0;      // u
  double payment_budget = kUnbounded;  // B
  double gamma = 0.0;
  ObjectiveMode mode = ObjectiveMode::EnergyTime;
  double result_payload_mb = 0.0;  // shipped back per task, usually negligible
};

// A device as the optimiser sees it once shipping costs are folded in.
// `objective_energy_per_mb` is the coefficient that enters the energy
// objective: compute energy for mobile devices (zero for plugged-in kinds)
// plus any per-MB transfer energy charged to mobile radios.
struct EffectiveDevice {
  DeviceProfile base;
  double objective_energy_per_mb = 0.0;
  double effective_time_per_mb = 0.0;
  std::string provenance;  // human-readable note on how the rates were formed
};

using EffectiveFleet = std::vector<EffectiveDevice>;

// Identity lift: declared rates, no shipping folded in.
EffectiveFleet lift_fleet(const std::vector<DeviceProfile>& fleet);

// Folds link shipping into every non-initiator device: the per-MB transfer
// time joins the compute rate, and the per-MB transfer energy joins the
// energy coefficient. Both radios count when the remote end is mobile; only
// the sender's does when the remote end is a cloudlet or cloud. The
// initiator's own rates never change. Link setup latency is a per-connection
// cost and stays out of these per-MB rates.
EffectiveFleet augment_with_transfer(
    const std::vector<DeviceProfile>& fleet,
    const std::map<std::string, netsim::LinkProfile>& links);

enum class PlanStatus { Optimal, Baseline };

struct AllocationPlan {
  std::vector<std::string> device_ids;   // input fleet order
  std::vector<double> shares;            // x, MB per device
  std::vector<double> sensitive_shares;  // y, MB per device, zero on untrusted
  double completion_time_s = 0.0;
  double energy_j = 0.0;   // sum of objective energy rates times assigned MB
  double payment = 0.0;
  double scalarized_objective = 0.0;  // value of the first-stage objective
  PlanStatus status = PlanStatus::Optimal;
  std::vector<std::string> budget_violations;  // populated for baselines only
};

class InfeasibleError : public Error {
 public:
  enum class Cause { EnergyBudgets, PaymentBudget, Privacy };

  InfeasibleError(Cause cause, std::string message)
      : Error(ErrorCode::Infeasible, std::move(message)), cause_(cause) {}

  Cause cause() const noexcept { return cause_; }
  const char* cause_name() const noexcept;

 private:
  Cause cause_;
};

// Scalarised allocation programs over variables (x per device, y per trusted
// device when sensitive work exists, completion time t):
//   energy/time:  min  sum(e_obj * x) + sum(e_obj * y) + gamma * t
//   cost/time:    min  sum(c * x)     + sum(c * y)     + gamma * t
// subject to per-device energy budgets, per-device time rows f*(x+y) <= t,
// share balances sum(x) = w - u and sum(y) = u, and (energy/time only) the
// payment budget when finite. Builders need a finite gamma; plan() handles
// the time-first mode. Throws InfeasibleError(Privacy) when sensitive work
// exists but no device is trusted.
lp::LinearProgram build_energy_time_lp(const TaskSpec& task,
                                       const EffectiveFleet& fleet);
lp::LinearProgram build_cost_time_lp(const TaskSpec& task,
                                     const EffectiveFleet& fleet);

// Solves the scalarised program, then breaks ties deterministically: among
// optima it minimises completion time (with the first objective pinned), then
// payment, and finally lets the solver's lowest-index rule settle anything
// left, with devices ordered by id. Throws InfeasibleError with the binding
// constraint class when the constraints cannot host the workload.
AllocationPlan plan(const TaskSpec& task, const EffectiveFleet& fleet);
AllocationPlan plan(const TaskSpec& task,
                    const std::vector<DeviceProfile>& fleet);

// Naive comparison baseline: the insensitive work spreads evenly over every
// device and the sensitive part evenly over the trusted ones. Budget
// violations are reported on the plan, never rejected.
AllocationPlan plan_even_split(const TaskSpec& task,
                               const EffectiveFleet& fleet);

// One plan per gamma. Gammas must be non-negative and non-decreasing
// (repeats are fine and yield identical plans).
std::vector<std::pair<double, AllocationPlan>> pareto_sweep(
    const TaskSpec& task, const EffectiveFleet& fleet,
    const std::vector<double>& gammas);

}  // namespace coplan::planner
