#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "coplan/errors.hpp"
#include "coplan/netsim.hpp"
#include "coplan/planner.hpp"
#include "coplan/types.hpp"
#include "support/grid_oracle.hpp"

using coplan::DeviceKind;
using coplan::Error;
using coplan::ErrorCode;
using coplan::kUnbounded;
namespace planner = coplan::planner;
namespace netsim = coplan::netsim;

namespace {

planner::DeviceProfile device(std::string id, DeviceKind kind, double e,
                              double f, double c,
                              double b = kUnbounded, bool trusted = true) {
  planner::DeviceProfile profile;
  profile.id = std::move(id);
  profile.kind = kind;
  profile.energy_per_mb = e;
  profile.time_per_mb = f;
  profile.payment_per_mb = c;
  profile.energy_budget = b;
  profile.trusted = trusted;
  return profile;
}

// The worked three-device fleet used throughout: an expensive-but-free
// initiator, a cheap slow peer, and a fast power-hungry peer.
std::vector<planner::DeviceProfile> s1_fleet() {
  return {device("d0", DeviceKind::Initiator, 3.0, 2.0, 0.0),
          device("d1", DeviceKind::Peer, 1.0, 2.0, 1.0, 100.0),
          device("d2", DeviceKind::Peer, 4.0, 0.5, 1.0, 100.0)};
}

planner::TaskSpec divisible(double workload, double gamma,
                            double sensitive = 0.0) {
  planner::TaskSpec task;
  task.workload_mb = workload;
  task.sensitive_mb = sensitive;
  task.gamma = gamma;
  return task;
}

}  // namespace

TEST_CASE("identity lift copies declared rates") {
  const auto fleet = planner::lift_fleet(s1_fleet());
  REQUIRE(fleet.size() == 3);
  CHECK(fleet[1].objective_energy_per_mb == 1.0);
  CHECK(fleet[1].effective_time_per_mb == 2.0);
  CHECK(fleet[2].effective_time_per_mb == 0.5);
}

TEST_CASE("transfer augmentation folds link shipping into the rates") {
  auto profiles = s1_fleet();
  profiles[1].link = "bt";
  profiles[2].link = "bt";
  std::map<std::string, netsim::LinkProfile> links;
  links["bt"] = {"bt", 2.1, 0.44, 0.44, 0.1};

  const auto fleet = planner::augment_with_transfer(profiles, links);
  const double per_mb_s = 8.0 / 2.1;
  // Initiator rates never move.
  CHECK(fleet[0].effective_time_per_mb == doctest::Approx(2.0));
  CHECK(fleet[0].objective_energy_per_mb == doctest::Approx(3.0));
  // Mobile peer: transfer time joins the compute rate and both radios are
  // battery-powered, so both powers charge the energy coefficient.
  CHECK(fleet[1].effective_time_per_mb ==
        doctest::Approx(2.0 + per_mb_s).epsilon(1e-12));
  CHECK(fleet[1].objective_energy_per_mb ==
        doctest::Approx(1.0 + (0.44 + 0.44) * per_mb_s).epsilon(1e-12));
  // Budget rows keep the raw compute energy.
  CHECK(fleet[1].base.energy_per_mb == 1.0);
}

TEST_CASE("plugged-in remotes only charge the sender's radio") {
  std::vector<planner::DeviceProfile> profiles = {
      device("d0", DeviceKind::Initiator, 1.0, 1.0, 0.0),
      device("cl", DeviceKind::Cloudlet, 0.0, 0.1, 0.0)};
  profiles[1].link = "lan";
  std::map<std::string, netsim::LinkProfile> links;
  links["lan"] = {"lan", 80.0, 0.5, 0.5, 0.0};
  const auto fleet = planner::augment_with_transfer(profiles, links);
  CHECK(fleet[1].effective_time_per_mb == doctest::Approx(0.1 + 0.1));
  CHECK(fleet[1].objective_energy_per_mb == doctest::Approx(0.5 * 0.1));
}

TEST_CASE("augmentation demands a resolvable link") {
  auto profiles = s1_fleet();
  profiles[1].link = "missing";
  std::map<std::string, netsim::LinkProfile> links;
  CHECK_THROWS_AS(planner::augment_with_transfer(profiles, links), Error);
}

TEST_CASE("scalarized program has the documented shape") {
  const auto fleet = planner::lift_fleet(s1_fleet());
  const auto prog = planner::build_energy_time_lp(divisible(4.0, 1.0), fleet);
  // Variables x0,x1,x2,t; rows: 3 budgets, 3 time rows, 1 share equality.
  CHECK(prog.variable_count == 4);
  CHECK(prog.ineq.size() == 6);
  CHECK(prog.eq.size() == 1);
  CHECK_NOTHROW(prog.validate());
  // Objective carries the energy rates and gamma on t.
  CHECK(prog.objective[3] == 1.0);
}

TEST_CASE("single device takes the whole workload") {
  const std::vector<planner::DeviceProfile> fleet = {
      device("solo", DeviceKind::Initiator, 2.0, 1.5, 0.0)};
  const auto plan = planner::plan(divisible(4.0, 0.0), fleet);
  CHECK(plan.shares[0] == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(plan.completion_time_s == doctest::Approx(6.0));
  CHECK(plan.energy_j == doctest::Approx(8.0));
}

TEST_CASE("fully sensitive task lives on the trusted set") {
  auto profiles = s1_fleet();
  profiles[1].trusted = false;
  const auto plan = planner::plan(divisible(4.0, 0.0, 4.0), profiles);
  CHECK(plan.sensitive_shares[1] == 0.0);
  double insensitive = 0.0;
  double sensitive = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    insensitive += plan.shares[i];
    sensitive += plan.sensitive_shares[i];
  }
  CHECK(insensitive == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
  CHECK(sensitive == doctest::Approx(4.0).epsilon(1e-9));
}

TEST_CASE("energy-first plan routes everything to the cheapest device") {
  const auto plan = planner::plan(divisible(4.0, 0.0), s1_fleet());
  CHECK(plan.shares[0] == doctest::Approx(0.0).scale(1.0).epsilon(1e-7));
  CHECK(plan.shares[1] == doctest::Approx(4.0).epsilon(1e-7));
  CHECK(plan.shares[2] == doctest::Approx(0.0).scale(1.0).epsilon(1e-7));
  CHECK(plan.energy_j == doctest::Approx(4.0).epsilon(1e-9));
  // Tie-breaking: among the energy optima the shortest completion wins.
  CHECK(plan.completion_time_s == doctest::Approx(8.0).epsilon(1e-9));
  CHECK(plan.payment == doctest::Approx(4.0).epsilon(1e-9));
}

TEST_CASE("time-first plan water-fills the busy times") {
  const auto plan = planner::plan(divisible(4.0, kUnbounded), s1_fleet());
  CHECK(plan.completion_time_s == doctest::Approx(4.0 / 3.0).epsilon(1e-9));
  CHECK(plan.shares[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-6));
  CHECK(plan.shares[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-6));
  CHECK(plan.shares[2] == doctest::Approx(8.0 / 3.0).epsilon(1e-6));
  CHECK(plan.energy_j == doctest::Approx(40.0 / 3.0).epsilon(1e-9));
  CHECK(plan.payment == doctest::Approx(10.0 / 3.0).epsilon(1e-9));
}

TEST_CASE("balanced weighting lands between the extremes") {
  const auto plan = planner::plan(divisible(4.0, 1.0), s1_fleet());
  CHECK(plan.scalarized_objective == doctest::Approx(12.0).epsilon(1e-9));
  CHECK(plan.completion_time_s == doctest::Approx(4.0).epsilon(1e-9));
  CHECK(plan.shares[0] == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(plan.shares[1] == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(plan.shares[2] == doctest::Approx(0.0).scale(1.0).epsilon(1e-6));
  CHECK(plan.energy_j == doctest::Approx(8.0).epsilon(1e-9));
  CHECK(plan.payment == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("sensitive share avoids untrusted devices") {
  auto profiles = s1_fleet();
  profiles[1].trusted = false;
  profiles[2].trusted = false;
  const auto plan = planner::plan(divisible(4.0, kUnbounded, 1.5), profiles);
  CHECK(plan.sensitive_shares[0] == doctest::Approx(1.5).epsilon(1e-9));
  CHECK(plan.sensitive_shares[1] == 0.0);
  CHECK(plan.sensitive_shares[2] == 0.0);
  CHECK(plan.completion_time_s == doctest::Approx(3.0).epsilon(1e-9));
  // Tie-break: minimum energy among the t=3 optima.
  CHECK(plan.shares[1] == doctest::Approx(1.5).epsilon(1e-6));
  CHECK(plan.shares[2] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(plan.energy_j == doctest::Approx(10.0).epsilon(1e-9));
}

TEST_CASE("sensitive work with no trusted host is a privacy failure") {
  auto profiles = s1_fleet();
  for (auto& p : profiles) p.trusted = false;
  try {
    planner::plan(divisible(4.0, 0.0, 1.0), profiles);
    FAIL("expected infeasibility");
  } catch (const planner::InfeasibleError& err) {
    CHECK(err.cause() == planner::InfeasibleError::Cause::Privacy);
    CHECK(std::string(err.cause_name()) == "privacy");
  }
}

TEST_CASE("exhausted budgets are the binding class") {
  const std::vector<planner::DeviceProfile> fleet = {
      device("d0", DeviceKind::Initiator, 1.0, 1.0, 0.0, 1.0),
      device("d1", DeviceKind::Peer, 1.0, 1.0, 1.0, 1.0)};
  try {
    planner::plan(divisible(4.0, 0.0), fleet);
    FAIL("expected infeasibility");
  } catch (const planner::InfeasibleError& err) {
    CHECK(err.cause() == planner::InfeasibleError::Cause::EnergyBudgets);
    CHECK(std::string(err.cause_name()) == "energy_budgets");
  }
}

TEST_CASE("tight payment cap is distinguished from tight budgets") {
  planner::TaskSpec task = divisible(4.0, 0.0);
  task.payment_budget = 1.0;
  const std::vector<planner::DeviceProfile> fleet = {
      device("d0", DeviceKind::Initiator, 1.0, 1.0, 0.0, 1.0),
      device("d1", DeviceKind::Peer, 1.0, 1.0, 1.0),
      device("d2", DeviceKind::Peer, 1.0, 1.0, 2.0)};
  try {
    planner::plan(task, fleet);
    FAIL("expected infeasibility");
  } catch (const planner::InfeasibleError& err) {
    CHECK(err.cause() == planner::InfeasibleError::Cause::PaymentBudget);
    CHECK(std::string(err.cause_name()) == "payment_budget");
  }
}

TEST_CASE("payment-first mode spills over only when budgets force it") {
  planner::TaskSpec task = divisible(2.0, 0.0);
  task.mode = planner::ObjectiveMode::CostTime;
  std::vector<planner::DeviceProfile> fleet = {
      device("d0", DeviceKind::Initiator, 1.0, 1.0, 0.0),
      device("d1", DeviceKind::Peer, 1.0, 1.0, 1.0)};

  // Free device with room: everything stays local.
  auto plan = planner::plan(task, fleet);
  CHECK(plan.shares[0] == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(plan.payment == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));

  // A 1 J budget on the free device forces half the load to the paid one.
  fleet[0].energy_budget = 1.0;
  plan = planner::plan(task, fleet);
  CHECK(plan.shares[0] == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(plan.shares[1] == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(plan.payment == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("even split spreads work uniformly and reports violations") {
  const auto fleet = planner::lift_fleet(s1_fleet());
  const auto plan = planner::plan_even_split(divisible(4.0, 0.0), fleet);
  CHECK(plan.status == planner::PlanStatus::Baseline);
  for (int i = 0; i < 3; ++i) {
    CHECK(plan.shares[i] == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
  }
  CHECK(plan.energy_j == doctest::Approx(32.0 / 3.0).epsilon(1e-9));
  CHECK(plan.completion_time_s == doctest::Approx(8.0 / 3.0).epsilon(1e-9));
  CHECK(plan.budget_violations.empty());

  auto tight = s1_fleet();
  tight[1].energy_budget = 0.5;  // even split wants 4/3 J from d1
  const auto violating =
      planner::plan_even_split(divisible(4.0, 0.0), planner::lift_fleet(tight));
  REQUIRE(violating.budget_violations.size() == 1);
  CHECK(violating.budget_violations[0].find("d1") != std::string::npos);
}

TEST_CASE("sweep trades time against energy monotonically") {
  const auto fleet = planner::lift_fleet(s1_fleet());
  const auto sweep = planner::pareto_sweep(divisible(4.0, 0.0), fleet,
                                           {0.0, 1.0, kUnbounded});
  REQUIRE(sweep.size() == 3);
  CHECK(sweep[0].second.completion_time_s == doctest::Approx(8.0));
  CHECK(sweep[1].second.completion_time_s == doctest::Approx(4.0));
  CHECK(sweep[2].second.completion_time_s == doctest::Approx(4.0 / 3.0));
  CHECK(sweep[0].second.energy_j <= sweep[1].second.energy_j + 1e-9);
  CHECK(sweep[1].second.energy_j <= sweep[2].second.energy_j + 1e-9);

  CHECK_THROWS_AS(
      planner::pareto_sweep(divisible(4.0, 0.0), fleet, {1.0, 0.5}), Error);
  CHECK_THROWS_AS(planner::pareto_sweep(divisible(4.0, 0.0), fleet, {}),
                  Error);
  // Repeats are allowed and reproduce the same plan.
  const auto repeated =
      planner::pareto_sweep(divisible(4.0, 0.0), fleet, {1.0, 1.0});
  CHECK(repeated[0].second.completion_time_s ==
        repeated[1].second.completion_time_s);
}

TEST_CASE("planning twice gives bit-identical shares") {
  std::mt19937_64 rng(31337);
  for (int trial = 0; trial < 20; ++trial) {
    testsupport::FleetOptions options;
    options.workload_mb = 3.0;
    const auto profiles = testsupport::random_fleet(rng, options);
    planner::TaskSpec task = divisible(3.0, 0.7);
    planner::AllocationPlan a, b;
    try {
      a = planner::plan(task, profiles);
      b = planner::plan(task, profiles);
    } catch (const planner::InfeasibleError&) {
      continue;
    }
    REQUIRE(a.shares.size() == b.shares.size());
    for (std::size_t i = 0; i < a.shares.size(); ++i) {
      CHECK(a.shares[i] == b.shares[i]);
    }
    CHECK(a.completion_time_s == b.completion_time_s);
    CHECK(a.energy_j == b.energy_j);
  }
}

TEST_CASE("device order does not matter beyond relabeling") {
  std::mt19937_64 rng(424242);
  for (int trial = 0; trial < 20; ++trial) {
    testsupport::FleetOptions options;
    options.min_devices = 2;
    options.workload_mb = 2.0;
    auto profiles = testsupport::random_fleet(rng, options);
    planner::TaskSpec task = divisible(2.0, 1.3);

    planner::AllocationPlan original;
    try {
      original = planner::plan(task, profiles);
    } catch (const planner::InfeasibleError&) {
      continue;
    }
    std::map<std::string, double> by_id;
    for (std::size_t i = 0; i < profiles.size(); ++i) {
      by_id[original.device_ids[i]] = original.shares[i];
    }

    std::shuffle(profiles.begin(), profiles.end(), rng);
    const auto shuffled = planner::plan(task, profiles);
    CHECK(shuffled.completion_time_s == original.completion_time_s);
    CHECK(shuffled.energy_j == original.energy_j);
    for (std::size_t i = 0; i < profiles.size(); ++i) {
      CHECK(shuffled.shares[i] == by_id[shuffled.device_ids[i]]);
    }
  }
}

TEST_CASE("weight increases never slow the plan down") {
  std::mt19937_64 rng(555);
  const std::vector<double> gammas = {0.0, 0.5, 2.0, kUnbounded};
  for (int trial = 0; trial < 20; ++trial) {
    testsupport::FleetOptions options;
    options.workload_mb = 1.0;
    const auto profiles = testsupport::random_fleet(rng, options);
    double last_t = coplan::kUnbounded;
    double last_e = -coplan::kUnbounded;
    bool feasible = true;
    for (double gamma : gammas) {
      planner::AllocationPlan plan;
      try {
        plan = planner::plan(divisible(1.0, gamma), profiles);
      } catch (const planner::InfeasibleError&) {
        feasible = false;
        break;
      }
      CHECK(plan.completion_time_s <= last_t + 1e-9);
      CHECK(plan.energy_j >= last_e - 1e-9);
      last_t = plan.completion_time_s;
      last_e = plan.energy_j;
    }
    if (!feasible) continue;
  }
}

TEST_CASE("plans satisfy every declared constraint") {
  std::mt19937_64 rng(90210);
  std::uniform_real_distribution<double> gamma_pick(0.0, 3.0);
  std::uniform_real_distribution<double> frac(0.0, 0.5);
  int accepted = 0;
  for (int trial = 0; trial < 200 && accepted < 80; ++trial) {
    testsupport::FleetOptions options;
    options.workload_mb = 2.0;
    const auto profiles = testsupport::random_fleet(rng, options);
    planner::TaskSpec task = divisible(2.0, gamma_pick(rng));
    task.sensitive_mb = 2.0 * frac(rng);
    planner::AllocationPlan plan;
    try {
      plan = planner::plan(task, profiles);
    } catch (const planner::InfeasibleError&) {
      continue;
    }
    ++accepted;
    double x_total = 0.0;
    double y_total = 0.0;
    for (std::size_t i = 0; i < profiles.size(); ++i) {
      const double assigned = plan.shares[i] + plan.sensitive_shares[i];
      CHECK(plan.shares[i] >= -1e-9);
      CHECK(plan.sensitive_shares[i] >= -1e-9);
      if (!profiles[i].trusted) CHECK(plan.sensitive_shares[i] == 0.0);
      CHECK(profiles[i].energy_per_mb * assigned <=
            profiles[i].energy_budget + 1e-9);
      CHECK(profiles[i].time_per_mb * assigned <=
            plan.completion_time_s + 1e-9);
      x_total += plan.shares[i];
      y_total += plan.sensitive_shares[i];
    }
    CHECK(x_total ==
          doctest::Approx(task.workload_mb - task.sensitive_mb).epsilon(1e-9));
    CHECK(y_total == doctest::Approx(task.sensitive_mb)
                         .scale(1.0)
                         .epsilon(1e-9));
  }
  CHECK(accepted >= 40);
}

TEST_CASE("optimum agrees with a coarse grid search") {
  std::mt19937_64 rng(1912);
  std::uniform_int_distribution<int> units(10, 30);
  const double step = 0.01;
  const std::vector<double> gammas = {0.0, 0.3, 1.0, 3.0};
  int compared = 0;
  for (int trial = 0; trial < 120 && compared < 50; ++trial) {
    testsupport::FleetOptions options;
    options.max_devices = 5;
    options.workload_mb = units(rng) * step;
    const auto profiles = testsupport::random_fleet(rng, options);
    planner::TaskSpec task =
        divisible(options.workload_mb, gammas[trial % gammas.size()]);
    const auto fleet = planner::lift_fleet(profiles);
    const auto oracle = testsupport::grid_minimize(fleet, task, step);
    planner::AllocationPlan plan;
    try {
      plan = planner::plan(task, fleet);
    } catch (const planner::InfeasibleError&) {
      CHECK(!oracle.feasible);  // a feasible grid point would refute this
      continue;
    }
    if (!oracle.feasible) continue;
    ++compared;
    double max_e = 0.0;
    double max_f = 0.0;
    for (const auto& dev : fleet) {
      max_e = std::max(max_e, dev.objective_energy_per_mb);
      max_f = std::max(max_f, dev.effective_time_per_mb);
    }
    const double slack = 2.0 * static_cast<double>(fleet.size()) * step *
                         (max_e + task.gamma * max_f);
    CHECK(plan.scalarized_objective <= oracle.objective + 1e-9);
    CHECK(oracle.objective <= plan.scalarized_objective + slack);
  }
  CHECK(compared >= 25);
}
