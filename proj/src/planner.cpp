#include "coplan/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

namespace coplan::planner {
namespace {

// Tolerance used when pinning a previous stage's objective while breaking
// ties; it doubles as the slack allowed on reported budget checks.
constexpr double kTieTol = 1e-9;

std::string fmt(double v) {
  std::ostringstream out;
  out.precision(9);
  out << v;
  return out.str();
}

void validate_inputs(const TaskSpec& task, const EffectiveFleet& fleet) {
  if (fleet.empty()) fail(ErrorCode::Usage, "planner needs at least one device");
  std::set<std::string> seen;
  for (const EffectiveDevice& dev : fleet) {
    if (dev.base.id.empty()) fail(ErrorCode::Usage, "device with empty id");
    if (!seen.insert(dev.base.id).second) {
      fail(ErrorCode::Usage, "duplicate device id '" + dev.base.id + "'");
    }
    if (!(dev.effective_time_per_mb > 0.0) ||
        !std::isfinite(dev.effective_time_per_mb)) {
      fail(ErrorCode::Usage,
           "device '" + dev.base.id + "': time per MB must be positive");
    }
    if (dev.objective_energy_per_mb < 0.0 ||
        !std::isfinite(dev.objective_energy_per_mb)) {
      fail(ErrorCode::Usage,
           "device '" + dev.base.id + "': energy rate must be >= 0");
    }
    if (dev.base.energy_per_mb < 0.0 || dev.base.payment_per_mb < 0.0) {
      fail(ErrorCode::Usage,
           "device '" + dev.base.id + "': negative cost rate");
    }
    if (dev.base.energy_budget < 0.0) {
      fail(ErrorCode::Usage,
           "device '" + dev.base.id + "': negative energy budget");
    }
  }
  if (!(task.workload_mb > 0.0) || !std::isfinite(task.workload_mb)) {
    fail(ErrorCode::Usage, "task workload must be positive");
  }
  if (task.sensitive_mb < 0.0 || task.sensitive_mb > task.workload_mb) {
    fail(ErrorCode::Usage,
         "sensitive workload must lie between 0 and the total workload");
  }
  if (task.payment_budget < 0.0) {
    fail(ErrorCode::Usage, "payment budget must be >= 0");
  }
  if (task.gamma < 0.0 || std::isnan(task.gamma)) {
    fail(ErrorCode::Usage, "gamma must be >= 0");
  }
}

std::vector<std::size_t> trusted_positions(const EffectiveFleet& fleet) {
  std::vector<std::size_t> positions;
  for (std::size_t i = 0; i < fleet.size(); ++i) {
    if (fleet[i].base.trusted) positions.push_back(i);
  }
  return positions;
}

// Shared constraint matrix for both scalarisations. Variables are laid out as
// (x per device, y per trusted device when sensitive work exists, t last);
// rows as (energy budgets, time rows, optional payment row, share balances).
// Devices with no declared budget still get a budget row so the matrix shape
// is uniform; the surrogate bound e*w + 1 can never bind because no device
// can be assigned more than w MB.
lp::LinearProgram build_constraints(const TaskSpec& task,
                                    const EffectiveFleet& fleet,
                                    bool include_payment_row,
                                    std::vector<std::size_t>* y_for_out) {
  const std::size_t n = fleet.size();
  const double w = task.workload_mb;
  const double u = task.sensitive_mb;
  const bool has_y = u > 0.0;

  std::vector<std::size_t> y_for;
  if (has_y) {
    y_for = trusted_positions(fleet);
    if (y_for.empty()) {
      throw InfeasibleError(InfeasibleError::Cause::Privacy,
                            "sensitive workload of " + fmt(u) +
                                " MB but no trusted device to host it");
    }
  }
  const std::size_t m = y_for.size();

  lp::LinearProgram prog;
  prog.variable_count = n + m + 1;
  prog.objective.assign(prog.variable_count, 0.0);
  const std::size_t t_var = n + m;

  auto row_for_device = [&](std::size_t pos, double coeff) {
    std::vector<double> row(prog.variable_count, 0.0);
    row[pos] = coeff;
    for (std::size_t k = 0; k < m; ++k) {
      if (y_for[k] == pos) row[n + k] = coeff;
    }
    return row;
  };

  for (std::size_t i = 0; i < n; ++i) {
    const DeviceProfile& base = fleet[i].base;
    const double budget = std::isfinite(base.energy_budget)
                              ? base.energy_budget
                              : base.energy_per_mb * w + 1.0;
    prog.ineq.push_back(row_for_device(i, base.energy_per_mb));
    prog.ineq_rhs.push_back(budget);
  }
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> row = row_for_device(i, fleet[i].effective_time_per_mb);
    row[t_var] = -1.0;
    prog.ineq.push_back(std::move(row));
    prog.ineq_rhs.push_back(0.0);
  }
  if (include_payment_row && std::isfinite(task.payment_budget)) {
    std::vector<double> row(prog.variable_count, 0.0);
    for (std::size_t i = 0; i < n; ++i) row[i] = fleet[i].base.payment_per_mb;
    for (std::size_t k = 0; k < m; ++k) {
      row[n + k] = fleet[y_for[k]].base.payment_per_mb;
    }
    prog.ineq.push_back(std::move(row));
    prog.ineq_rhs.push_back(task.payment_budget);
  }

  std::vector<double> balance_x(prog.variable_count, 0.0);
  for (std::size_t i = 0; i < n; ++i) balance_x[i] = 1.0;
  prog.eq.push_back(std::move(balance_x));
  prog.eq_rhs.push_back(w - u);
  if (has_y) {
    std::vector<double> balance_y(prog.variable_count, 0.0);
    for (std::size_t k = 0; k < m; ++k) balance_y[n + k] = 1.0;
    prog.eq.push_back(std::move(balance_y));
    prog.eq_rhs.push_back(u);
  }

  if (y_for_out) *y_for_out = y_for;
  return prog;
}

std::vector<double> energy_objective(const EffectiveFleet& fleet,
                                     const std::vector<std::size_t>& y_for,
                                     std::size_t var_count, double gamma) {
  std::vector<double> obj(var_count, 0.0);
  for (std::size_t i = 0; i < fleet.size(); ++i) {
    obj[i] = fleet[i].objective_energy_per_mb;
  }
  for (std::size_t k = 0; k < y_for.size(); ++k) {
    obj[fleet.size() + k] = fleet[y_for[k]].objective_energy_per_mb;
  }
  obj[var_count - 1] = gamma;
  return obj;
}

std::vector<double> payment_objective(const EffectiveFleet& fleet,
                                      const std::vector<std::size_t>& y_for,
                                      std::size_t var_count, double gamma) {
  std::vector<double> obj(var_count, 0.0);
  for (std::size_t i = 0; i < fleet.size(); ++i) {
    obj[i] = fleet[i].base.payment_per_mb;
  }
  for (std::size_t k = 0; k < y_for.size(); ++k) {
    obj[fleet.size() + k] = fleet[y_for[k]].base.payment_per_mb;
  }
  obj[var_count - 1] = gamma;
  return obj;
}

std::vector<double> time_objective(std::size_t var_count) {
  std::vector<double> obj(var_count, 0.0);
  obj[var_count - 1] = 1.0;
  return obj;
}

// Adds `vector . z <= bound` to a copy of the program.  The slack is kept
// far below kTieTol so later stages cannot trade a visible amount of the
// pinned objective for their own; it only needs to absorb the rounding in
// the achieved bound itself.
lp::LinearProgram pin(const lp::LinearProgram& prog,
                      const std::vector<double>& vector, double bound) {
  lp::LinearProgram pinned = prog;
  pinned.ineq.push_back(vector);
  pinned.ineq_rhs.push_back(bound + 1e-12 * std::max(1.0, std::abs(bound)));
  return pinned;
}

lp::Solution solve_expect_optimal(const lp::LinearProgram& prog,
                                  const char* stage) {
  lp::Solution sol = lp::solve(prog);
  if (sol.status != lp::SolveStatus::Optimal) {
    fail(ErrorCode::Internal, std::string("tie-break stage '") + stage +
                                  "' unexpectedly reported " +
                                  lp::to_string(sol.status));
  }
  return sol;
}

// Decides which constraint family made the program infeasible. Privacy is
// ruled out before any solve; share balances alone can always be met because
// time is a free variable; that leaves the payment row (drop it and retry)
// and otherwise the energy budgets.
[[noreturn]] void classify_infeasible(const TaskSpec& task,
                                      const EffectiveFleet& fleet,
                                      bool had_payment_row) {
  if (had_payment_row && std::isfinite(task.payment_budget)) {
    lp::LinearProgram relaxed = build_constraints(task, fleet, false, nullptr);
    relaxed.objective = time_objective(relaxed.variable_count);
    if (lp::solve(relaxed).status == lp::SolveStatus::Optimal) {
      throw InfeasibleError(
          InfeasibleError::Cause::PaymentBudget,
          "constraints cannot host the workload: the payment budget of " +
              fmt(task.payment_budget) + " is binding");
    }
  }
  throw InfeasibleError(
      InfeasibleError::Cause::EnergyBudgets,
      "constraints cannot host the workload: the device energy budgets are "
      "binding");
}

struct SortedView {
  EffectiveFleet fleet;                  // id-sorted copy
  std::vector<std::size_t> input_index;  // sorted position -> caller position
};

// The solver prefers low variable indices when several optima remain, so
// building the program over an id-sorted fleet makes the final tie-break
// follow device-id order and makes plans invariant under input permutation.
SortedView sort_by_id(const EffectiveFleet& fleet) {
  SortedView view;
  view.input_index.resize(fleet.size());
  std::iota(view.input_index.begin(), view.input_index.end(), 0);
  std::sort(view.input_index.begin(), view.input_index.end(),
            [&](std::size_t a, std::size_t b) {
              return fleet[a].base.id < fleet[b].base.id;
            });
  for (std::size_t pos : view.input_index) view.fleet.push_back(fleet[pos]);
  return view;
}

// Shares below a nanobyte are solver dust left by the tie-break slack, not
// meaningful allocations. Collapse them to zero and keep the share balance
// exact by folding the removed mass into the largest share.
void snap_shares(std::vector<double>& shares) {
  constexpr double kDustMb = 1e-9;
  double removed = 0.0;
  std::size_t largest = shares.size();
  for (std::size_t i = 0; i < shares.size(); ++i) {
    if (std::abs(shares[i]) < kDustMb) {
      removed += shares[i];
      shares[i] = 0.0;
    } else if (largest == shares.size() || shares[i] > shares[largest]) {
      largest = i;
    }
  }
  if (removed != 0.0 && largest != shares.size()) shares[largest] += removed;
}

AllocationPlan extract_plan(const TaskSpec& task, const EffectiveFleet& input,
                            const SortedView& view,
                            const std::vector<std::size_t>& y_for,
                            const lp::Solution& final_solution,
                            double scalarized_value) {
  const std::size_t n = view.fleet.size();
  std::vector<double> x_sorted(final_solution.point.begin(),
                               final_solution.point.begin() + n);
  std::vector<double> y_sorted(n, 0.0);
  for (std::size_t k = 0; k < y_for.size(); ++k) {
    y_sorted[y_for[k]] = final_solution.point[n + k];
  }

  // Snap and aggregate in id-sorted order so identical fleets produce
  // bit-identical plans no matter how the caller ordered the devices.
  snap_shares(x_sorted);
  snap_shares(y_sorted);

  AllocationPlan out;
  out.device_ids.resize(n);
  out.shares.assign(n, 0.0);
  out.sensitive_shares.assign(n, 0.0);
  out.completion_time_s = final_solution.point[final_solution.point.size() - 1];
  for (std::size_t pos = 0; pos < n; ++pos) {
    const std::size_t caller = view.input_index[pos];
    out.device_ids[caller] = input[caller].base.id;
    out.shares[caller] = x_sorted[pos];
    out.sensitive_shares[caller] = y_sorted[pos];
    const double assigned = x_sorted[pos] + y_sorted[pos];
    out.energy_j += view.fleet[pos].objective_energy_per_mb * assigned;
    out.payment += view.fleet[pos].base.payment_per_mb * assigned;
  }
  out.scalarized_objective = scalarized_value;
  out.status = PlanStatus::Optimal;
  (void)task;
  return out;
}

}  // namespace

const char* InfeasibleError::cause_name() const noexcept {
  switch (cause_) {
    case Cause::EnergyBudgets:
      return "energy_budgets";
    case Cause::PaymentBudget:
      return "payment_budget";
    case Cause::Privacy:
      return "privacy";
  }
  return "unknown";
}

const char* to_string(ObjectiveMode mode) {
  return mode == ObjectiveMode::EnergyTime ? "energy_time" : "cost_time";
}

EffectiveFleet lift_fleet(const std::vector<DeviceProfile>& fleet) {
  EffectiveFleet lifted;
  lifted.reserve(fleet.size());
  for (const DeviceProfile& dev : fleet) {
    EffectiveDevice eff;
    eff.base = dev;
    eff.objective_energy_per_mb = is_mobile(dev.kind) ? dev.energy_per_mb : 0.0;
    eff.effective_time_per_mb = dev.time_per_mb;
    eff.provenance = "declared rates";
    lifted.push_back(std::move(eff));
  }
  return lifted;
}

EffectiveFleet augment_with_transfer(
    const std::vector<DeviceProfile>& fleet,
    const std::map<std::string, netsim::LinkProfile>& links) {
  EffectiveFleet augmented = lift_fleet(fleet);
  for (EffectiveDevice& eff : augmented) {
    if (eff.base.kind == DeviceKind::Initiator) {
      eff.provenance = "initiator, no shipping";
      continue;
    }
    auto it = links.find(eff.base.link);
    if (it == links.end()) {
      fail(ErrorCode::Config, "device '" + eff.base.id + "': link '" +
                                  eff.base.link +
                                  "' is not in the link table");
    }
    const netsim::LinkProfile& link = it->second;
    const double seconds_per_mb = 8.0 / link.rate_mbps;  // rate is megabits
    const double mobile_radio_w =
        is_mobile(eff.base.kind) ? link.tx_power_w + link.rx_power_w
                                 : link.tx_power_w;
    eff.effective_time_per_mb += seconds_per_mb;
    eff.objective_energy_per_mb += mobile_radio_w * seconds_per_mb;
    eff.provenance = "shipping over '" + link.id + "' folded in (" +
                     fmt(seconds_per_mb) + " s/MB, " +
                     fmt(mobile_radio_w * seconds_per_mb) + " J/MB)";
  }
  return augmented;
}

lp::LinearProgram build_energy_time_lp(const TaskSpec& task,
                                       const EffectiveFleet& fleet) {
  validate_inputs(task, fleet);
  if (std::isinf(task.gamma)) {
    fail(ErrorCode::Usage,
         "builders need a finite gamma; plan() handles the time-first mode");
  }
  std::vector<std::size_t> y_for;
  lp::LinearProgram prog = build_constraints(task, fleet, true, &y_for);
  prog.objective =
      energy_objective(fleet, y_for, prog.variable_count, task.gamma);
  return prog;
}

lp::LinearProgram build_cost_time_lp(const TaskSpec& task,
                                     const EffectiveFleet& fleet) {
  validate_inputs(task, fleet);
  if (std::isinf(task.gamma)) {
    fail(ErrorCode::Usage,
         "builders need a finite gamma; plan() handles the time-first mode");
  }
  std::vector<std::size_t> y_for;
  lp::LinearProgram prog = build_constraints(task, fleet, false, &y_for);
  prog.objective =
      payment_objective(fleet, y_for, prog.variable_count, task.gamma);
  return prog;
}

AllocationPlan plan(const TaskSpec& task, const EffectiveFleet& fleet) {
  validate_inputs(task, fleet);
  const SortedView view = sort_by_id(fleet);
  const bool energy_mode = task.mode == ObjectiveMode::EnergyTime;
  const bool payment_row = energy_mode;

  std::vector<std::size_t> y_for;
  const lp::LinearProgram constraints =
      build_constraints(task, view.fleet, payment_row, &y_for);
  const std::size_t var_count = constraints.variable_count;

  const std::vector<double> primary =
      energy_mode ? energy_objective(view.fleet, y_for, var_count, 0.0)
                  : payment_objective(view.fleet, y_for, var_count, 0.0);
  const std::vector<double> pay =
      payment_objective(view.fleet, y_for, var_count, 0.0);
  const std::vector<double> timing = time_objective(var_count);

  if (std::isinf(task.gamma)) {
    // Time-first mode: minimise t outright, then the mode's primary cost,
    // then payment.
    lp::LinearProgram stage1 = constraints;
    stage1.objective = timing;
    lp::Solution sol1 = lp::solve(stage1);
    if (sol1.status == lp::SolveStatus::Infeasible) {
      classify_infeasible(task, view.fleet, payment_row);
    }
    if (sol1.status != lp::SolveStatus::Optimal) {
      fail(ErrorCode::Internal, "time-first stage reported unbounded");
    }
    const double t_best = sol1.objective_value;

    lp::LinearProgram stage2 = pin(stage1, timing, t_best);
    stage2.objective = primary;
    lp::Solution sol2 = solve_expect_optimal(stage2, "primary-after-time");

    lp::Solution final_solution = sol2;
    if (energy_mode) {
      lp::LinearProgram stage3 = pin(stage2, primary, sol2.objective_value);
      stage3.objective = pay;
      final_solution = solve_expect_optimal(stage3, "payment-after-energy");
    }
    return extract_plan(task, fleet, view, y_for, final_solution, t_best);
  }

  // Finite gamma: scalarised objective, then time, then payment.
  std::vector<double> scalarized = primary;
  scalarized[var_count - 1] = task.gamma;
  lp::LinearProgram stage1 = constraints;
  stage1.objective = scalarized;
  lp::Solution sol1 = lp::solve(stage1);
  if (sol1.status == lp::SolveStatus::Infeasible) {
    classify_infeasible(task, view.fleet, payment_row);
  }
  if (sol1.status != lp::SolveStatus::Optimal) {
    fail(ErrorCode::Internal, "scalarised stage reported unbounded");
  }
  const double best_value = sol1.objective_value;

  lp::LinearProgram stage2 = pin(stage1, scalarized, best_value);
  stage2.objective = timing;
  lp::Solution sol2 = solve_expect_optimal(stage2, "time-after-primary");

  lp::LinearProgram stage3 = pin(stage2, timing, sol2.objective_value);
  stage3.objective = pay;
  lp::Solution sol3 = solve_expect_optimal(stage3, "payment-after-time");

  return extract_plan(task, fleet, view, y_for, sol3, best_value);
}

AllocationPlan plan(const TaskSpec& task,
                    const std::vector<DeviceProfile>& fleet) {
  return plan(task, lift_fleet(fleet));
}

AllocationPlan plan_even_split(const TaskSpec& task,
                               const EffectiveFleet& fleet) {
  validate_inputs(task, fleet);
  const std::size_t n = fleet.size();
  const double u = task.sensitive_mb;
  const std::vector<std::size_t> trusted = trusted_positions(fleet);
  if (u > 0.0 && trusted.empty()) {
    throw InfeasibleError(InfeasibleError::Cause::Privacy,
                          "sensitive workload of " + fmt(u) +
                              " MB but no trusted device to host it");
  }

  AllocationPlan out;
  out.status = PlanStatus::Baseline;
  out.shares.assign(n, (task.workload_mb - u) / static_cast<double>(n));
  out.sensitive_shares.assign(n, 0.0);
  for (std::size_t pos : trusted) {
    out.sensitive_shares[pos] = u / static_cast<double>(trusted.size());
  }
  for (std::size_t i = 0; i < n; ++i) {
    out.device_ids.push_back(fleet[i].base.id);
    const double assigned = out.shares[i] + out.sensitive_shares[i];
    out.completion_time_s =
        std::max(out.completion_time_s,
                 fleet[i].effective_time_per_mb * assigned);
    out.energy_j += fleet[i].objective_energy_per_mb * assigned;
    out.payment += fleet[i].base.payment_per_mb * assigned;

    const double spent = fleet[i].base.energy_per_mb * assigned;
    if (spent > fleet[i].base.energy_budget + kTieTol) {
      out.budget_violations.push_back(
          fleet[i].base.id + ": energy budget exceeded (" + fmt(spent) +
          " J > " + fmt(fleet[i].base.energy_budget) + " J)");
    }
  }
  if (out.payment > task.payment_budget + kTieTol) {
    out.budget_violations.push_back("payment budget exceeded (" +
                                    fmt(out.payment) + " > " +
                                    fmt(task.payment_budget) + ")");
  }
  const double primary_cost =
      task.mode == ObjectiveMode::EnergyTime ? out.energy_j : out.payment;
  out.scalarized_objective =
      std::isinf(task.gamma) ? out.completion_time_s
                             : primary_cost + task.gamma * out.completion_time_s;
  return out;
}

std::vector<std::pair<double, AllocationPlan>> pareto_sweep(
    const TaskSpec& task, const EffectiveFleet& fleet,
    const std::vector<double>& gammas) {
  if (gammas.empty()) fail(ErrorCode::Usage, "sweep needs at least one gamma");
  for (std::size_t i = 0; i < gammas.size(); ++i) {
    if (gammas[i] < 0.0 || std::isnan(gammas[i])) {
      fail(ErrorCode::Usage, "sweep gammas must be >= 0");
    }
    if (i > 0 && gammas[i] < gammas[i - 1]) {
      fail(ErrorCode::Usage, "sweep gammas must be non-decreasing");
    }
  }
  std::vector<std::pair<double, AllocationPlan>> points;
  points.reserve(gammas.size());
  for (double gamma : gammas) {
    TaskSpec step = task;
    step.gamma = gamma;
    points.emplace_back(gamma, plan(step, fleet));
  }
  return points;
}

}  // namespace coplan::planner
