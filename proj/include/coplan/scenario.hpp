#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "coplan/agents.hpp"
#include "coplan/netsim.hpp"
#include "coplan/planner.hpp"

namespace coplan {

struct ScenarioDevice {
  planner::DeviceProfile profile;
  // Absent list: the device answers for any service.
  std::optional<std::set<std::string>> services;
  bool offers(const std::string& service) const {
    return !services || services->count(service) > 0;
  }
};

struct ScenarioObservation {
  std::string device;
  std::string service;
  double size_mb = 0.0;
  double time_s = 0.0;
  double energy_j = 0.0;
};

struct ScenarioOptions {
  bool use_transfer_augmentation = true;
  bool report_gain_vs_local = true;
  double reply_jitter_s = 0.0;  // extra uniform delay on inquiry replies
};

// One fully declared experiment: a fleet, the links between the initiator and
// everyone else, and exactly one of a divisible task or a pipeline. Profiler
// observations, scripted departures, the seed and the options are optional.
struct Scenario {
  std::uint64_t seed = 0;
  std::vector<ScenarioDevice> devices;
  std::map<std::string, netsim::LinkProfile> links;
  std::optional<planner::TaskSpec> task;
  std::optional<agents::PipelineSpec> pipeline;
  std::vector<ScenarioObservation> observations;
  std::vector<agents::DepartureEvent> departures;
  ScenarioOptions options;

  const ScenarioDevice& initiator() const;
  std::vector<planner::DeviceProfile> fleet() const;
  std::map<std::string, DeviceKind> device_kinds() const;
};

// Parses and validates the canonical JSON form. Validation failures carry the
// offending field path ("devices[2].link: ..."); observations for a device
// and the task's service override that device's declared rates through a line
// fit, with the intercepts landing in the per-delegation overheads.
Scenario load_scenario(const std::string& path);
Scenario parse_scenario(const nlohmann::json& root, const std::string& origin);

// Canonical serialisation; load(write(s)) reproduces s.
nlohmann::json to_json(const Scenario& scenario);

}  // namespace coplan
