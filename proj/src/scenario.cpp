#include "coplan/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "coplan/profiler.hpp"

namespace coplan {
namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& path, const std::string& what) {
  fail(ErrorCode::Config, path + ": " + what);
}

// Every object in the scenario format has a closed field set; a stray key is
// almost always a typo, so it is rejected with its path.
void expect_fields(const json& obj, const std::string& path,
                   std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    bool known = false;
    for (const char* name : allowed) known = known || key == name;
    if (!known) bad(path, "unknown field '" + key + "'");
  }
}

const json& require(const json& obj, const std::string& path,
                    const char* field) {
  auto it = obj.find(field);
  if (it == obj.end()) bad(path, std::string("missing field '") + field + "'");
  return *it;
}

double number(const json& v, const std::string& path, bool allow_inf = false) {
  if (v.is_number()) {
    const double d = v.get<double>();
    if (!std::isfinite(d)) bad(path, "must be a finite number");
    return d;
  }
  if (allow_inf && v.is_string() && v.get<std::string>() == "inf") {
    return kUnbounded;
  }
  bad(path, allow_inf ? "must be a number or \"inf\"" : "must be a number");
}

double number_field(const json& obj, const std::string& path, const char* field,
                    double fallback, bool allow_inf = false) {
  auto it = obj.find(field);
  if (it == obj.end()) return fallback;
  return number(*it, path + "." + field, allow_inf);
}

std::string string_field(const json& obj, const std::string& path,
                         const char* field, const std::string& fallback) {
  auto it = obj.find(field);
  if (it == obj.end()) return fallback;
  if (!it->is_string()) bad(path + "." + field, "must be a string");
  return it->get<std::string>();
}

bool bool_field(const json& obj, const std::string& path, const char* field,
                bool fallback) {
  auto it = obj.find(field);
  if (it == obj.end()) return fallback;
  if (!it->is_boolean()) bad(path + "." + field, "must be a boolean");
  return it->get<bool>();
}

ScenarioDevice parse_device(const json& obj, const std::string& path) {
  if (!obj.is_object()) bad(path, "must be an object");
  expect_fields(obj, path,
                {"id", "kind", "e", "f", "c", "b", "trusted", "link",
                 "services", "overhead_time", "overhead_energy"});
  ScenarioDevice device;
  planner::DeviceProfile& profile = device.profile;

  profile.id = require(obj, path, "id").is_string()
                   ? obj.at("id").get<std::string>()
                   : (bad(path + ".id", "must be a string"), "");
  if (profile.id.empty()) bad(path + ".id", "must not be empty");
  profile.kind = device_kind_from_string(
      require(obj, path, "kind").is_string()
          ? obj.at("kind").get<std::string>()
          : (bad(path + ".kind", "must be a string"), ""));
  profile.energy_per_mb = number(require(obj, path, "e"), path + ".e");
  if (profile.energy_per_mb < 0.0) bad(path + ".e", "must be >= 0");
  profile.time_per_mb = number(require(obj, path, "f"), path + ".f");
  if (!(profile.time_per_mb > 0.0)) bad(path + ".f", "must be > 0");
  profile.payment_per_mb = number_field(obj, path, "c", 0.0);
  if (profile.payment_per_mb < 0.0) bad(path + ".c", "must be >= 0");
  profile.energy_budget = number_field(obj, path, "b", kUnbounded, true);
  if (profile.energy_budget < 0.0) bad(path + ".b", "must be >= 0");
  profile.trusted = bool_field(obj, path, "trusted", true);
  profile.link = string_field(obj, path, "link", "");
  profile.overhead_time_s = number_field(obj, path, "overhead_time", 0.0);
  if (profile.overhead_time_s < 0.0) bad(path + ".overhead_time", "must be >= 0");
  profile.overhead_energy_j = number_field(obj, path, "overhead_energy", 0.0);
  if (profile.overhead_energy_j < 0.0) {
    bad(path + ".overhead_energy", "must be >= 0");
  }

  if (auto it = obj.find("services"); it != obj.end()) {
    if (!it->is_array()) bad(path + ".services", "must be an array of strings");
    std::set<std::string> services;
    for (const json& entry : *it) {
      if (!entry.is_string()) {
        bad(path + ".services", "must be an array of strings");
      }
      services.insert(entry.get<std::string>());
    }
    device.services = std::move(services);
  }
  return device;
}

netsim::LinkProfile parse_link(const json& obj, const std::string& path) {
  if (!obj.is_object()) bad(path, "must be an object");
  expect_fields(obj, path,
                {"id", "rate", "tx_power", "rx_power", "setup_latency"});
  netsim::LinkProfile link;
  link.id = require(obj, path, "id").is_string()
                ? obj.at("id").get<std::string>()
                : (bad(path + ".id", "must be a string"), "");
  if (link.id.empty()) bad(path + ".id", "must not be empty");
  link.rate_mbps = number(require(obj, path, "rate"), path + ".rate", true);
  if (!(link.rate_mbps > 0.0)) bad(path + ".rate", "must be > 0");
  link.tx_power_w = number_field(obj, path, "tx_power", 0.0);
  if (link.tx_power_w < 0.0) bad(path + ".tx_power", "must be >= 0");
  link.rx_power_w = number_field(obj, path, "rx_power", 0.0);
  if (link.rx_power_w < 0.0) bad(path + ".rx_power", "must be >= 0");
  link.setup_latency_s = number_field(obj, path, "setup_latency", 0.0);
  if (link.setup_latency_s < 0.0) bad(path + ".setup_latency", "must be >= 0");
  return link;
}

planner::TaskSpec parse_task(const json& obj, const std::string& path) {
  expect_fields(obj, path,
                {"service", "workload", "sensitive", "payment_budget", "gamma",
                 "mode", "result_payload"});
  planner::TaskSpec task;
  task.service = string_field(obj, path, "service", "default");
  task.workload_mb = number(require(obj, path, "workload"), path + ".workload");
  if (!(task.workload_mb > 0.0)) bad(path + ".workload", "must be > 0");
  task.sensitive_mb = number_field(obj, path, "sensitive", 0.0);
  if (task.sensitive_mb < 0.0 || task.sensitive_mb > task.workload_mb) {
    bad(path + ".sensitive", "must lie between 0 and the workload");
  }
  task.payment_budget =
      number_field(obj, path, "payment_budget", kUnbounded, true);
  if (task.payment_budget < 0.0) bad(path + ".payment_budget", "must be >= 0");
  task.gamma = number_field(obj, path, "gamma", 0.0, true);
  if (task.gamma < 0.0) bad(path + ".gamma", "must be >= 0");
  const std::string mode = string_field(obj, path, "mode", "energy_time");
  if (mode == "energy_time") {
    task.mode = planner::ObjectiveMode::EnergyTime;
  } else if (mode == "cost_time") {
    task.mode = planner::ObjectiveMode::CostTime;
  } else {
    bad(path + ".mode", "must be 'energy_time' or 'cost_time'");
  }
  task.result_payload_mb = number_field(obj, path, "result_payload", 0.0);
  if (task.result_payload_mb < 0.0) bad(path + ".result_payload", "must be >= 0");
  return task;
}

agents::PipelineSpec parse_pipeline(const json& obj, const std::string& path) {
  expect_fields(obj, path, {"stages", "gamma"});
  agents::PipelineSpec pipeline;
  const json& stages = require(obj, path, "stages");
  if (!stages.is_array() || stages.empty()) {
    bad(path + ".stages", "must be a non-empty array");
  }
  for (std::size_t k = 0; k < stages.size(); ++k) {
    const std::string stage_path = path + ".stages[" + std::to_string(k) + "]";
    const json& entry = stages[k];
    if (!entry.is_object()) bad(stage_path, "must be an object");
    expect_fields(entry, stage_path,
                  {"name", "costs", "output_payload", "conditional_probability"});
    agents::PipelineStage stage;
    stage.name = string_field(entry, stage_path, "name",
                              "stage" + std::to_string(k + 1));
    const json& costs = require(entry, stage_path, "costs");
    if (!costs.is_object()) bad(stage_path + ".costs", "must be an object");
    for (const auto& [device, cost] : costs.items()) {
      const std::string cost_path = stage_path + ".costs." + device;
      if (!cost.is_object()) bad(cost_path, "must be an object");
      expect_fields(cost, cost_path, {"time", "energy"});
      agents::StageCost parsed;
      parsed.time_s = number(require(cost, cost_path, "time"),
                             cost_path + ".time");
      parsed.energy_j = number(require(cost, cost_path, "energy"),
                               cost_path + ".energy");
      if (parsed.time_s < 0.0) bad(cost_path + ".time", "must be >= 0");
      if (parsed.energy_j < 0.0) bad(cost_path + ".energy", "must be >= 0");
      stage.costs[device] = parsed;
    }
    stage.output_payload_mb = number_field(entry, stage_path, "output_payload", 0.0);
    if (stage.output_payload_mb < 0.0) {
      bad(stage_path + ".output_payload", "must be >= 0");
    }
    stage.conditional_probability =
        number_field(entry, stage_path, "conditional_probability", 1.0);
    pipeline.stages.push_back(std::move(stage));
  }
  pipeline.gamma = number_field(obj, path, "gamma", 0.0);
  if (pipeline.gamma < 0.0) bad(path + ".gamma", "must be >= 0");
  return pipeline;
}

ScenarioObservation parse_observation(const json& obj, const std::string& path) {
  if (!obj.is_object()) bad(path, "must be an object");
  expect_fields(obj, path, {"device", "service", "size", "time", "energy"});
  ScenarioObservation obs;
  obs.device = require(obj, path, "device").is_string()
                   ? obj.at("device").get<std::string>()
                   : (bad(path + ".device", "must be a string"), "");
  obs.service = string_field(obj, path, "service", "default");
  obs.size_mb = number(require(obj, path, "size"), path + ".size");
  if (!(obs.size_mb > 0.0)) bad(path + ".size", "must be > 0");
  obs.time_s = number(require(obj, path, "time"), path + ".time");
  if (obs.time_s < 0.0) bad(path + ".time", "must be >= 0");
  obs.energy_j = number(require(obj, path, "energy"), path + ".energy");
  if (obs.energy_j < 0.0) bad(path + ".energy", "must be >= 0");
  return obs;
}

agents::DepartureEvent parse_departure(const json& obj, const std::string& path) {
  if (!obj.is_object()) bad(path, "must be an object");
  expect_fields(obj, path,
                {"device", "motion_onset", "detection_delay", "strategy"});
  agents::DepartureEvent event;
  event.device = require(obj, path, "device").is_string()
                     ? obj.at("device").get<std::string>()
                     : (bad(path + ".device", "must be a string"), "");
  event.motion_onset_s =
      number(require(obj, path, "motion_onset"), path + ".motion_onset");
  if (event.motion_onset_s < 0.0) bad(path + ".motion_onset", "must be >= 0");
  event.detection_delay_s =
      number(require(obj, path, "detection_delay"), path + ".detection_delay");
  if (event.detection_delay_s < 0.0) {
    bad(path + ".detection_delay", "must be >= 0");
  }
  const std::string strategy =
      string_field(obj, path, "strategy", "migrate_partial");
  if (strategy == "migrate_partial") {
    event.strategy = agents::RecoveryStrategy::MigratePartial;
  } else if (strategy == "reprocess_all") {
    event.strategy = agents::RecoveryStrategy::ReprocessAll;
  } else {
    bad(path + ".strategy", "must be 'migrate_partial' or 'reprocess_all'");
  }
  return event;
}

// Observations for (device, task service) replace that device's declared
// rates with fitted slopes; the intercepts land in the per-delegation
// overheads (clamped at zero so noise cannot produce negative setup costs).
void apply_observations(Scenario& scenario) {
  if (!scenario.task || scenario.observations.empty()) return;
  const std::string& service = scenario.task->service;
  for (ScenarioDevice& device : scenario.devices) {
    profiler::ObservationStore store;
    for (const ScenarioObservation& obs : scenario.observations) {
      if (obs.device != device.profile.id || obs.service != service) continue;
      store.record({obs.service, obs.size_mb, obs.time_s, obs.energy_j});
    }
    if (store.size() == 0) continue;
    profiler::ServiceModels models;
    try {
      models = profiler::fit(store, service);
    } catch (const Error& e) {
      fail(ErrorCode::Config,
           "observations for device '" + device.profile.id +
               "': " + e.what());
    }
    if (!(models.time.slope > 0.0)) {
      fail(ErrorCode::Config, "observations for device '" + device.profile.id +
                                  "': fitted time per MB is not positive");
    }
    if (models.energy.slope < 0.0) {
      fail(ErrorCode::Config, "observations for device '" + device.profile.id +
                                  "': fitted energy per MB is negative");
    }
    device.profile.time_per_mb = models.time.slope;
    device.profile.energy_per_mb = models.energy.slope;
    device.profile.overhead_time_s = std::max(0.0, models.time.intercept);
    device.profile.overhead_energy_j = std::max(0.0, models.energy.intercept);
  }
}

void cross_validate(Scenario& scenario) {
  if (scenario.devices.empty()) bad("devices", "must not be empty");
  std::set<std::string> ids;
  std::size_t initiators = 0;
  for (std::size_t i = 0; i < scenario.devices.size(); ++i) {
    const std::string path = "devices[" + std::to_string(i) + "]";
    const planner::DeviceProfile& profile = scenario.devices[i].profile;
    if (!ids.insert(profile.id).second) {
      bad(path + ".id", "duplicate device id '" + profile.id + "'");
    }
    if (profile.kind == DeviceKind::Initiator) {
      ++initiators;
    } else if (profile.link.empty()) {
      bad(path + ".link", "non-initiator devices need a link");
    }
    if (!profile.link.empty() && !scenario.links.count(profile.link)) {
      bad(path + ".link", "unknown link '" + profile.link + "'");
    }
  }
  if (initiators != 1) {
    bad("devices", "exactly one initiator required, found " +
                       std::to_string(initiators));
  }
  if (scenario.task && scenario.pipeline) {
    bad("task", "a scenario carries either a task or a pipeline, not both");
  }
  for (std::size_t i = 0; i < scenario.observations.size(); ++i) {
    const std::string path = "observations[" + std::to_string(i) + "]";
    if (!ids.count(scenario.observations[i].device)) {
      bad(path + ".device",
          "unknown device '" + scenario.observations[i].device + "'");
    }
  }
  for (std::size_t i = 0; i < scenario.departures.size(); ++i) {
    const std::string path = "departures[" + std::to_string(i) + "]";
    const agents::DepartureEvent& event = scenario.departures[i];
    if (!ids.count(event.device)) {
      bad(path + ".device", "unknown device '" + event.device + "'");
    }
    if (scenario.initiator().profile.id == event.device) {
      bad(path + ".device", "the initiator cannot depart");
    }
    if (!scenario.task) {
      bad(path, "departures need a divisible task scenario");
    }
  }
  if (scenario.pipeline) {
    // Full structural validation, including complete cost tables, lives in
    // the placement routine; running it here surfaces problems at load time.
    agents::place_pipeline(*scenario.pipeline, scenario.fleet(), scenario.links,
                           scenario.pipeline->gamma);
  }
}

json number_to_json(double v) {
  if (std::isinf(v)) return json("inf");
  return json(v);
}

}  // namespace

const char* to_string(DeviceKind kind) {
  switch (kind) {
    case DeviceKind::Initiator:
      return "initiator";
    case DeviceKind::Peer:
      return "peer";
    case DeviceKind::Cloudlet:
      return "cloudlet";
    case DeviceKind::Cloud:
      return "cloud";
  }
  return "unknown";
}

DeviceKind device_kind_from_string(const std::string& name) {
  if (name == "initiator") return DeviceKind::Initiator;
  if (name == "peer") return DeviceKind::Peer;
  if (name == "cloudlet") return DeviceKind::Cloudlet;
  if (name == "cloud") return DeviceKind::Cloud;
  fail(ErrorCode::Config, "unknown device kind '" + name + "'");
}

const ScenarioDevice& Scenario::initiator() const {
  for (const ScenarioDevice& device : devices) {
    if (device.profile.kind == DeviceKind::Initiator) return device;
  }
  fail(ErrorCode::Internal, "scenario has no initiator");
}

std::vector<planner::DeviceProfile> Scenario::fleet() const {
  std::vector<planner::DeviceProfile> profiles;
  profiles.reserve(devices.size());
  for (const ScenarioDevice& device : devices) profiles.push_back(device.profile);
  return profiles;
}

std::map<std::string, DeviceKind> Scenario::device_kinds() const {
  std::map<std::string, DeviceKind> kinds;
  for (const ScenarioDevice& device : devices) {
    kinds[device.profile.id] = device.profile.kind;
  }
  return kinds;
}

Scenario parse_scenario(const json& root, const std::string& origin) {
  if (!root.is_object()) bad(origin, "scenario must be a JSON object");
  expect_fields(root, origin,
                {"seed", "devices", "links", "task", "observations",
                 "departures", "options"});

  Scenario scenario;
  if (auto it = root.find("seed"); it != root.end()) {
    if (!it->is_number_unsigned()) bad("seed", "must be a non-negative integer");
    scenario.seed = it->get<std::uint64_t>();
  }

  const json& devices = require(root, origin, "devices");
  if (!devices.is_array()) bad("devices", "must be an array");
  for (std::size_t i = 0; i < devices.size(); ++i) {
    scenario.devices.push_back(
        parse_device(devices[i], "devices[" + std::to_string(i) + "]"));
  }

  if (auto it = root.find("links"); it != root.end()) {
    if (!it->is_array()) bad("links", "must be an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string path = "links[" + std::to_string(i) + "]";
      netsim::LinkProfile link = parse_link((*it)[i], path);
      if (!scenario.links.emplace(link.id, link).second) {
        bad(path + ".id", "duplicate link id '" + link.id + "'");
      }
    }
  }

  if (auto it = root.find("task"); it != root.end()) {
    if (!it->is_object()) bad("task", "must be an object");
    if (it->contains("stages")) {
      scenario.pipeline = parse_pipeline(*it, "task");
    } else {
      scenario.task = parse_task(*it, "task");
    }
  }

  if (auto it = root.find("observations"); it != root.end()) {
    if (!it->is_array()) bad("observations", "must be an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      scenario.observations.push_back(parse_observation(
          (*it)[i], "observations[" + std::to_string(i) + "]"));
    }
  }

  if (auto it = root.find("departures"); it != root.end()) {
    if (!it->is_array()) bad("departures", "must be an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      scenario.departures.push_back(
          parse_departure((*it)[i], "departures[" + std::to_string(i) + "]"));
    }
  }

  if (auto it = root.find("options"); it != root.end()) {
    if (!it->is_object()) bad("options", "must be an object");
    expect_fields(*it, "options",
                  {"use_transfer_augmentation", "report_gain_vs_local",
                   "reply_jitter"});
    scenario.options.use_transfer_augmentation =
        bool_field(*it, "options", "use_transfer_augmentation", true);
    scenario.options.report_gain_vs_local =
        bool_field(*it, "options", "report_gain_vs_local", true);
    scenario.options.reply_jitter_s =
        number_field(*it, "options", "reply_jitter", 0.0);
    if (scenario.options.reply_jitter_s < 0.0) {
      bad("options.reply_jitter", "must be >= 0");
    }
  }

  cross_validate(scenario);
  apply_observations(scenario);
  return scenario;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open scenario file '" + path + "'");
  json root;
  try {
    root = json::parse(in);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::Config, "scenario '" + path + "' is not valid JSON: " +
                                std::string(e.what()));
  }
  return parse_scenario(root, path);
}

json to_json(const Scenario& scenario) {
  json root = json::object();
  root["seed"] = scenario.seed;

  json devices = json::array();
  for (const ScenarioDevice& device : scenario.devices) {
    const planner::DeviceProfile& profile = device.profile;
    json entry = json::object();
    entry["id"] = profile.id;
    entry["kind"] = to_string(profile.kind);
    entry["e"] = profile.energy_per_mb;
    entry["f"] = profile.time_per_mb;
    entry["c"] = profile.payment_per_mb;
    entry["b"] = number_to_json(profile.energy_budget);
    entry["trusted"] = profile.trusted;
    if (!profile.link.empty()) entry["link"] = profile.link;
    entry["overhead_time"] = profile.overhead_time_s;
    entry["overhead_energy"] = profile.overhead_energy_j;
    if (device.services) {
      entry["services"] = json::array();
      for (const std::string& service : *device.services) {
        entry["services"].push_back(service);
      }
    }
    devices.push_back(std::move(entry));
  }
  root["devices"] = std::move(devices);

  json links = json::array();
  for (const auto& [id, link] : scenario.links) {
    (void)id;
    json entry = json::object();
    entry["id"] = link.id;
    entry["rate"] = number_to_json(link.rate_mbps);
    entry["tx_power"] = link.tx_power_w;
    entry["rx_power"] = link.rx_power_w;
    entry["setup_latency"] = link.setup_latency_s;
    links.push_back(std::move(entry));
  }
  root["links"] = std::move(links);

  if (scenario.task) {
    const planner::TaskSpec& task = *scenario.task;
    json entry = json::object();
    entry["service"] = task.service;
    entry["workload"] = task.workload_mb;
    entry["sensitive"] = task.sensitive_mb;
    entry["payment_budget"] = number_to_json(task.payment_budget);
    entry["gamma"] = number_to_json(task.gamma);
    entry["mode"] = planner::to_string(task.mode);
    entry["result_payload"] = task.result_payload_mb;
    root["task"] = std::move(entry);
  }
  if (scenario.pipeline) {
    json entry = json::object();
    entry["gamma"] = scenario.pipeline->gamma;
    entry["stages"] = json::array();
    for (const agents::PipelineStage& stage : scenario.pipeline->stages) {
      json stage_json = json::object();
      stage_json["name"] = stage.name;
      stage_json["costs"] = json::object();
      for (const auto& [device, cost] : stage.costs) {
        stage_json["costs"][device] = {{"time", cost.time_s},
                                       {"energy", cost.energy_j}};
      }
      stage_json["output_payload"] = stage.output_payload_mb;
      stage_json["conditional_probability"] = stage.conditional_probability;
      entry["stages"].push_back(std::move(stage_json));
    }
    root["task"] = std::move(entry);
  }

  if (!scenario.observations.empty()) {
    json observations = json::array();
    for (const ScenarioObservation& obs : scenario.observations) {
      observations.push_back({{"device", obs.device},
                              {"service", obs.service},
                              {"size", obs.size_mb},
                              {"time", obs.time_s},
                              {"energy", obs.energy_j}});
    }
    root["observations"] = std::move(observations);
  }

  if (!scenario.departures.empty()) {
    json departures = json::array();
    for (const agents::DepartureEvent& event : scenario.departures) {
      departures.push_back({{"device", event.device},
                            {"motion_onset", event.motion_onset_s},
                            {"detection_delay", event.detection_delay_s},
                            {"strategy", agents::to_string(event.strategy)}});
    }
    root["departures"] = std::move(departures);
  }

  json options = json::object();
  options["use_transfer_augmentation"] =
      scenario.options.use_transfer_augmentation;
  options["report_gain_vs_local"] = scenario.options.report_gain_vs_local;
  options["reply_jitter"] = scenario.options.reply_jitter_s;
  root["options"] = std::move(options);
  return root;
}

}  // namespace coplan
