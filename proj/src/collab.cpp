#include "coplan/collab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace coplan::agents {
namespace {

// Discovery inquiries and replies are tiny control messages; one kilobyte
// gives them a nonzero cost without rivalling the payload transfers.
constexpr double kControlMessageMb = 1.0 / 1024.0;
constexpr double kShareEpsilon = 1e-12;

struct Shared {
  const Scenario* scenario = nullptr;
  netsim::Engine* engine = nullptr;
  std::string initiator_id;
  std::string radio;  // the initiator's serialized radio resource
};

const netsim::LinkProfile& link_of(const Shared& ctx,
                                   const planner::DeviceProfile& device) {
  auto it = ctx.scenario->links.find(device.link);
  if (it == ctx.scenario->links.end()) {
    fail(ErrorCode::Config, "device '" + device.id + "': link '" +
                                device.link + "' is not in the link table");
  }
  return it->second;
}

void add_energy(netsim::Event& event, const std::string& device,
                double joules) {
  if (joules > 0.0) event.energy_j[device] += joules;
}

// Books a transfer on the initiator's radio and logs it. Returns the instant
// the payload is fully delivered.
double emit_transfer(Shared& ctx, netsim::EventKind kind,
                     const std::string& src, const std::string& dst,
                     double payload_mb, const netsim::LinkProfile& link,
                     double earliest, std::string note) {
  const netsim::TransferCost cost = netsim::transfer_cost(link, payload_mb);
  const double start = ctx.engine->reserve(ctx.radio, earliest, cost.time_s);
  netsim::Event event;
  event.timestamp = start;
  event.kind = kind;
  event.src = src;
  event.dst = dst;
  event.payload_mb = payload_mb;
  event.duration_s = cost.time_s;
  add_energy(event, src, cost.tx_energy_j);
  add_energy(event, dst, cost.rx_energy_j);
  event.note = std::move(note);
  ctx.engine->emit(std::move(event));
  return start + cost.time_s;
}

// Scan plus one inquiry/reply round per device, serialized on the initiator
// radio in device-id order. Devices that do not offer the service stay
// silent. Returns the ids that replied and the instant discovery wrapped up.
struct DiscoveryResult {
  std::set<std::string> responders;
  double end_time = 0.0;
};

DiscoveryResult discover(Shared& ctx, const std::string& service,
                         bool check_services) {
  DiscoveryResult discovery;
  std::vector<const ScenarioDevice*> peers;
  for (const ScenarioDevice& device : ctx.scenario->devices) {
    if (device.profile.kind != DeviceKind::Initiator) peers.push_back(&device);
  }
  if (peers.empty()) return discovery;
  std::sort(peers.begin(), peers.end(),
            [](const ScenarioDevice* a, const ScenarioDevice* b) {
              return a->profile.id < b->profile.id;
            });

  netsim::Event scan;
  scan.kind = netsim::EventKind::Scan;
  scan.src = ctx.initiator_id;
  scan.dst = ctx.initiator_id;
  scan.note = "neighbourhood scan";
  ctx.engine->emit(std::move(scan));

  const double jitter = ctx.scenario->options.reply_jitter_s;
  for (const ScenarioDevice* peer : peers) {
    const netsim::LinkProfile& link = link_of(ctx, peer->profile);
    const netsim::TransferCost inquiry_cost =
        netsim::transfer_cost(link, kControlMessageMb);
    const double inquiry_start = ctx.engine->reserve(
        ctx.radio, ctx.engine->available_at(ctx.radio), inquiry_cost.time_s);

    netsim::Event inquiry;
    inquiry.timestamp = inquiry_start;
    inquiry.kind = netsim::EventKind::Inquiry;
    inquiry.src = ctx.initiator_id;
    inquiry.dst = peer->profile.id;
    inquiry.payload_mb = kControlMessageMb;
    inquiry.duration_s = inquiry_cost.time_s;
    add_energy(inquiry, ctx.initiator_id, inquiry_cost.tx_energy_j);
    add_energy(inquiry, peer->profile.id, inquiry_cost.rx_energy_j);
    inquiry.note = service;

    CollaboratorState state;
    state.profile = peer->profile;
    if (check_services && peer->services) state.services = *peer->services;
    std::vector<netsim::Event> reaction = collaborator_step(state, inquiry);
    ctx.engine->emit(std::move(inquiry));

    for (netsim::Event& reply : reaction) {
      if (reply.kind != netsim::EventKind::InquiryReply) continue;
      double earliest = reply.timestamp;
      if (jitter > 0.0) earliest += ctx.engine->uniform(0.0, jitter);
      discovery.end_time =
          emit_transfer(ctx, netsim::EventKind::InquiryReply, peer->profile.id,
                        ctx.initiator_id, kControlMessageMb, link, earliest,
                        reply.note);
      discovery.responders.insert(peer->profile.id);
    }
  }
  discovery.end_time =
      std::max(discovery.end_time, ctx.engine->available_at(ctx.radio));
  return discovery;
}

double discovery_energy(const std::vector<netsim::Event>& events) {
  // finish() has not run yet, so walk the raw log.
  double total = 0.0;
  for (const netsim::Event& event : events) {
    switch (event.kind) {
      case netsim::EventKind::Scan:
      case netsim::EventKind::Inquiry:
      case netsim::EventKind::InquiryReply:
        for (const auto& [device, joules] : event.energy_j) {
          (void)device;
          total += joules;
        }
        break;
      default:
        break;
    }
  }
  return total;
}

struct Delegation {
  const ScenarioDevice* device = nullptr;
  double chunk_mb = 0.0;
  double arrival = 0.0;      // payload delivered at the collaborator
  double span = 0.0;         // overhead + compute time for the whole chunk
  double compute_end = 0.0;  // arrival + span
  // Departure bookkeeping, set when a departure interrupts this delegation.
  bool departed = false;
  double detection = 0.0;
  double completed_mb = 0.0;
  RecoveryStrategy strategy = RecoveryStrategy::MigratePartial;
};

// An outbound payload waiting for the initiator radio: a finished result or
// a migrated partial result.
struct RadioJob {
  double earliest = 0.0;
  std::string device;
  netsim::EventKind kind = netsim::EventKind::Result;
  double payload_mb = 0.0;
  std::string note;
};

void finalize_report(report::CollaborationReport& rep,
                     const netsim::Trace& trace,
                     const std::string& initiator_id) {
  const netsim::EnergyAccount account = netsim::account_energy(trace);
  rep.completion_time_s = trace.end_time;
  rep.per_device_energy_j = account.per_device;
  rep.mobile_energy_j = account.mobile_total;
  auto it = account.per_device.find(initiator_id);
  rep.initiator_energy_j = it == account.per_device.end() ? 0.0 : it->second;
}

SimOutcome run_divisible_task(const Scenario& scenario,
                              netsim::Engine& engine) {
  const planner::TaskSpec& task = *scenario.task;
  Shared ctx{&scenario, &engine, scenario.initiator().profile.id, ""};
  ctx.radio = "radio:" + ctx.initiator_id;

  report::CollaborationReport rep;
  rep.seed = scenario.seed;
  rep.used_transfer_augmentation = scenario.options.use_transfer_augmentation;

  DiscoveryResult discovery = discover(ctx, task.service, true);

  // The fleet the optimiser sees: the initiator plus every responder, in
  // scenario order.
  std::vector<planner::DeviceProfile> fleet;
  std::vector<const ScenarioDevice*> members;
  for (const ScenarioDevice& device : scenario.devices) {
    if (device.profile.kind == DeviceKind::Initiator ||
        discovery.responders.count(device.profile.id)) {
      fleet.push_back(device.profile);
      members.push_back(&device);
    }
  }
  planner::EffectiveFleet effective =
      scenario.options.use_transfer_augmentation
          ? planner::augment_with_transfer(fleet, scenario.links)
          : planner::lift_fleet(fleet);

  planner::AllocationPlan plan;
  try {
    plan = planner::plan(task, effective);
  } catch (const planner::InfeasibleError& e) {
    rep.status = "infeasible";
    rep.binding_constraint = e.cause_name();
    SimOutcome outcome;
    rep.discovery_energy_j = 0.0;
    outcome.trace = engine.finish(scenario.device_kinds());
    rep.discovery_energy_j = discovery_energy(outcome.trace.events);
    finalize_report(rep, outcome.trace, ctx.initiator_id);
    outcome.report = rep;
    return outcome;
  }
  rep.plan = plan;

  // Ship the chunks out, one serial transfer per collaborator in id order.
  std::vector<Delegation> delegations;
  std::vector<std::size_t> remote_order;
  for (std::size_t i = 0; i < members.size(); ++i) {
    if (members[i]->profile.kind != DeviceKind::Initiator) {
      remote_order.push_back(i);
    }
  }
  std::sort(remote_order.begin(), remote_order.end(),
            [&members](std::size_t a, std::size_t b) {
              return members[a]->profile.id < members[b]->profile.id;
            });

  double initiator_chunk = 0.0;
  double payment = 0.0;
  for (std::size_t i = 0; i < members.size(); ++i) {
    if (members[i]->profile.kind == DeviceKind::Initiator) {
      initiator_chunk = plan.shares[i] + plan.sensitive_shares[i];
    }
  }

  std::vector<RadioJob> radio_jobs;
  for (std::size_t index : remote_order) {
    const ScenarioDevice& device = *members[index];
    const double chunk = plan.shares[index] + plan.sensitive_shares[index];
    if (chunk <= kShareEpsilon) continue;
    const netsim::LinkProfile& link = link_of(ctx, device.profile);
    const double arrival = emit_transfer(
        ctx, netsim::EventKind::Delegate, ctx.initiator_id, device.profile.id,
        chunk, link, ctx.engine->available_at(ctx.radio), task.service);
    Delegation d;
    d.device = &device;
    d.chunk_mb = chunk;
    d.arrival = arrival;
    d.span = device.profile.overhead_time_s +
             device.profile.time_per_mb * chunk;
    d.compute_end = arrival + d.span;
    delegations.push_back(d);
  }

  // Declared departures interrupt the matching delegation at the detection
  // instant; everything the device completed in whole processing units by
  // then counts as done.
  std::vector<const DepartureEvent*> departures;
  for (const DepartureEvent& event : scenario.departures) {
    departures.push_back(&event);
  }
  std::sort(departures.begin(), departures.end(),
            [](const DepartureEvent* a, const DepartureEvent* b) {
              const double ta = a->motion_onset_s + a->detection_delay_s;
              const double tb = b->motion_onset_s + b->detection_delay_s;
              if (ta != tb) return ta < tb;
              return a->device < b->device;
            });
  for (const DepartureEvent* event : departures) {
    const double detection = event->motion_onset_s + event->detection_delay_s;
    Delegation* hit = nullptr;
    for (Delegation& d : delegations) {
      if (d.device->profile.id == event->device && !d.departed) hit = &d;
    }
    netsim::Event notice;
    notice.timestamp = detection;
    notice.kind = netsim::EventKind::DepartNotice;
    notice.src = event->device;
    notice.dst = ctx.initiator_id;
    if (hit == nullptr) {
      notice.note = "no active delegation; nothing to recover";
      engine.emit(std::move(notice));
      continue;
    }
    hit->departed = true;
    hit->detection = detection;
    hit->strategy = event->strategy;
    const planner::DeviceProfile& profile = hit->device->profile;
    const double processing_elapsed =
        detection - hit->arrival - profile.overhead_time_s;
    double raw_mb = processing_elapsed > 0.0
                        ? processing_elapsed / profile.time_per_mb
                        : 0.0;
    raw_mb = std::min(raw_mb, hit->chunk_mb);
    hit->completed_mb =
        std::min(std::floor(raw_mb / kProcessingUnitMb) * kProcessingUnitMb,
                 hit->chunk_mb);
    if (detection >= hit->compute_end) hit->completed_mb = hit->chunk_mb;
    notice.note = std::string(to_string(event->strategy)) + "; completed " +
                  std::to_string(hit->completed_mb) + " MB";
    engine.emit(std::move(notice));
  }

  // Collaborator computes. Intact delegations replay the collaborator
  // protocol verbatim; interrupted ones are truncated at the detection
  // instant and charged for the completed units only.
  const planner::DeviceProfile& initiator_profile =
      scenario.initiator().profile;
  const std::string cpu_initiator = "cpu:" + ctx.initiator_id;
  std::vector<std::pair<double, Delegation*>> recoveries;
  for (Delegation& d : delegations) {
    const planner::DeviceProfile& profile = d.device->profile;
    if (!d.departed) {
      netsim::Event delegate;
      delegate.timestamp = d.arrival;
      delegate.kind = netsim::EventKind::Delegate;
      delegate.src = ctx.initiator_id;
      delegate.dst = profile.id;
      delegate.payload_mb = d.chunk_mb;
      delegate.note = task.service;
      CollaboratorState state;
      state.profile = profile;
      if (d.device->services) state.services = *d.device->services;
      for (netsim::Event& event : collaborator_step(state, delegate)) {
        if (event.kind == netsim::EventKind::Result) {
          RadioJob job;
          job.earliest = event.timestamp;
          job.device = profile.id;
          job.payload_mb = task.workload_mb > 0.0
                               ? task.result_payload_mb * d.chunk_mb /
                                     task.workload_mb
                               : 0.0;
          job.note = "result of " + std::to_string(d.chunk_mb) + " MB";
          radio_jobs.push_back(std::move(job));
          continue;
        }
        if (event.kind == netsim::EventKind::ComputeEnd) {
          payment += profile.payment_per_mb * event.payload_mb;
        }
        engine.emit(std::move(event));
      }
      continue;
    }

    // Truncated compute on the departing device.
    const double busy_until = std::min(d.detection, d.compute_end);
    if (busy_until > d.arrival) {
      netsim::Event start;
      start.timestamp = d.arrival;
      start.kind = netsim::EventKind::ComputeStart;
      start.src = profile.id;
      start.dst = profile.id;
      start.payload_mb = d.chunk_mb;
      start.duration_s = busy_until - d.arrival;
      engine.emit(std::move(start));

      netsim::Event end;
      end.timestamp = busy_until;
      end.kind = netsim::EventKind::ComputeEnd;
      end.src = profile.id;
      end.dst = profile.id;
      end.payload_mb = d.completed_mb;
      add_energy(end, profile.id,
                 profile.energy_per_mb * d.completed_mb +
                     profile.overhead_energy_j);
      end.note = "interrupted by departure";
      engine.emit(std::move(end));
      payment += profile.payment_per_mb * d.completed_mb;
    }

    if (d.strategy == RecoveryStrategy::MigratePartial &&
        d.completed_mb > 0.0) {
      RadioJob job;
      job.earliest = d.detection;
      job.device = profile.id;
      job.kind = netsim::EventKind::PartialResult;
      job.payload_mb = task.workload_mb > 0.0
                           ? task.result_payload_mb * d.completed_mb /
                                 task.workload_mb
                           : 0.0;
      job.note = "partial result, " + std::to_string(d.completed_mb) + " MB";
      radio_jobs.push_back(std::move(job));
    }
    recoveries.emplace_back(d.detection, &d);
  }

  // The initiator's own share runs on its CPU as soon as planning is done;
  // the radio keeps shipping in parallel.
  if (initiator_chunk > kShareEpsilon) {
    const double span = initiator_profile.overhead_time_s +
                        initiator_profile.time_per_mb * initiator_chunk;
    const double start = engine.reserve(cpu_initiator, discovery.end_time, span);
    netsim::Event end;
    end.timestamp = start + span;
    end.kind = netsim::EventKind::ComputeEnd;
    end.src = ctx.initiator_id;
    end.dst = ctx.initiator_id;
    end.payload_mb = initiator_chunk;
    add_energy(end, ctx.initiator_id,
               initiator_profile.energy_per_mb * initiator_chunk +
                   initiator_profile.overhead_energy_j);
    end.note = "local share";
    engine.emit(std::move(end));
    payment += initiator_profile.payment_per_mb * initiator_chunk;
  }

  // Recovery computes queue on the initiator CPU in detection order.
  std::sort(recoveries.begin(), recoveries.end(),
            [](const auto& a, const auto& b) {
              if (a.first != b.first) return a.first < b.first;
              return a.second->device->profile.id < b.second->device->profile.id;
            });
  for (const auto& [detection, d] : recoveries) {
    const double remaining = d->strategy == RecoveryStrategy::MigratePartial
                                 ? d->chunk_mb - d->completed_mb
                                 : d->chunk_mb;
    if (remaining <= kShareEpsilon) continue;
    const double span = initiator_profile.overhead_time_s +
                        initiator_profile.time_per_mb * remaining;
    const double start = engine.reserve(cpu_initiator, detection, span);
    netsim::Event end;
    end.timestamp = start + span;
    end.kind = netsim::EventKind::ComputeEnd;
    end.src = ctx.initiator_id;
    end.dst = ctx.initiator_id;
    end.payload_mb = remaining;
    add_energy(end, ctx.initiator_id,
               initiator_profile.energy_per_mb * remaining +
                   initiator_profile.overhead_energy_j);
    end.note = "recovered from " + d->device->profile.id;
    engine.emit(std::move(end));
    payment += initiator_profile.payment_per_mb * remaining;
  }

  // Results and migrated partials share the initiator radio; grant it in
  // (ready instant, device id) order.
  std::sort(radio_jobs.begin(), radio_jobs.end(),
            [](const RadioJob& a, const RadioJob& b) {
              if (a.earliest != b.earliest) return a.earliest < b.earliest;
              return a.device < b.device;
            });
  for (const RadioJob& job : radio_jobs) {
    const ScenarioDevice* owner = nullptr;
    for (const ScenarioDevice& device : scenario.devices) {
      if (device.profile.id == job.device) owner = &device;
    }
    emit_transfer(ctx, job.kind, job.device, ctx.initiator_id, job.payload_mb,
                  link_of(ctx, owner->profile), job.earliest, job.note);
  }

  rep.total_payment = payment;
  SimOutcome outcome;
  outcome.trace = engine.finish(scenario.device_kinds());
  rep.discovery_energy_j = discovery_energy(outcome.trace.events);
  finalize_report(rep, outcome.trace, ctx.initiator_id);

  if (scenario.options.report_gain_vs_local) {
    const double local_time = initiator_profile.overhead_time_s +
                              initiator_profile.time_per_mb * task.workload_mb;
    const double local_energy =
        initiator_profile.overhead_energy_j +
        initiator_profile.energy_per_mb * task.workload_mb;
    if (local_time > 0.0 && local_energy > 0.0) {
      rep.gains = report::compute_gains(local_time, local_energy,
                                        rep.completion_time_s,
                                        rep.mobile_energy_j);
    }
  }
  outcome.report = std::move(rep);
  return outcome;
}

SimOutcome run_pipeline(const Scenario& scenario, netsim::Engine& engine) {
  const PipelineSpec& pipeline = *scenario.pipeline;
  Shared ctx{&scenario, &engine, scenario.initiator().profile.id, ""};
  ctx.radio = "radio:" + ctx.initiator_id;

  report::CollaborationReport rep;
  rep.seed = scenario.seed;
  rep.used_transfer_augmentation = scenario.options.use_transfer_augmentation;

  DiscoveryResult discovery = discover(ctx, "pipeline", false);

  std::vector<planner::DeviceProfile> fleet;
  for (const ScenarioDevice& device : scenario.devices) {
    if (device.profile.kind == DeviceKind::Initiator ||
        discovery.responders.count(device.profile.id)) {
      fleet.push_back(device.profile);
    }
  }
  PipelinePlacement placement =
      place_pipeline(pipeline, fleet, scenario.links, pipeline.gamma);
  rep.placement = placement;
  for (const planner::DeviceProfile& profile : fleet) {
    rep.placement_fleet_ids.push_back(profile.id);
  }

  auto profile_of = [&fleet](const std::string& id)
      -> const planner::DeviceProfile& {
    for (const planner::DeviceProfile& profile : fleet) {
      if (profile.id == id) return profile;
    }
    fail(ErrorCode::Internal, "placement names unknown device '" + id + "'");
  };

  // Realize one run of the pipeline: conditional stages flip the scenario's
  // seeded coin, payload hops between hosts ride the initiator radio (with a
  // relay when neither end is the initiator), and the last executed stage
  // ships its output home.
  double clock = discovery.end_time;
  std::string where = ctx.initiator_id;
  double carried_payload = 0.0;
  std::size_t last_executed = 0;
  for (std::size_t k = 0; k < pipeline.stages.size(); ++k) {
    const PipelineStage& stage = pipeline.stages[k];
    if (k > 0 && !engine.bernoulli(stage.conditional_probability)) break;
    const std::string& host = placement.stage_devices[k];
    const planner::DeviceProfile& host_profile = profile_of(host);

    if (host != where) {
      // Move the previous stage's output to the next host.
      if (where != ctx.initiator_id && host != ctx.initiator_id) {
        clock = emit_transfer(ctx, netsim::EventKind::Delegate, where,
                              ctx.initiator_id, carried_payload,
                              link_of(ctx, profile_of(where)), clock,
                              stage.name + " input (relay)");
        clock = emit_transfer(ctx, netsim::EventKind::Delegate,
                              ctx.initiator_id, host, carried_payload,
                              link_of(ctx, host_profile), clock,
                              stage.name + " input");
      } else {
        const planner::DeviceProfile& remote =
            host == ctx.initiator_id ? profile_of(where) : host_profile;
        clock = emit_transfer(ctx, netsim::EventKind::Delegate, where, host,
                              carried_payload, link_of(ctx, remote), clock,
                              stage.name + " input");
      }
      where = host;
    }

    const StageCost& cost = stage.costs.at(host);
    const double start =
        engine.reserve("cpu:" + host, clock, cost.time_s);
    netsim::Event begin;
    begin.timestamp = start;
    begin.kind = netsim::EventKind::ComputeStart;
    begin.src = host;
    begin.dst = host;
    begin.duration_s = cost.time_s;
    begin.note = stage.name;
    engine.emit(std::move(begin));

    netsim::Event end;
    end.timestamp = start + cost.time_s;
    end.kind = netsim::EventKind::ComputeEnd;
    end.src = host;
    end.dst = host;
    add_energy(end, host, cost.energy_j);
    end.note = stage.name;
    engine.emit(std::move(end));

    clock = start + cost.time_s;
    carried_payload = stage.output_payload_mb;
    last_executed = k;
  }

  if (where != ctx.initiator_id) {
    clock = emit_transfer(ctx, netsim::EventKind::Result, where,
                          ctx.initiator_id, carried_payload,
                          link_of(ctx, profile_of(where)), clock,
                          pipeline.stages[last_executed].name + " output");
  }

  SimOutcome outcome;
  outcome.trace = engine.finish(scenario.device_kinds());
  rep.discovery_energy_j = discovery_energy(outcome.trace.events);
  finalize_report(rep, outcome.trace, ctx.initiator_id);
  outcome.report = std::move(rep);
  return outcome;
}

}  // namespace

SimOutcome run_collaboration(const Scenario& scenario) {
  netsim::Engine engine(scenario.seed);
  if (scenario.task) return run_divisible_task(scenario, engine);
  if (scenario.pipeline) return run_pipeline(scenario, engine);

  // Nothing to do: an empty, well-formed trace.
  SimOutcome outcome;
  outcome.trace = engine.finish(scenario.device_kinds());
  outcome.report.seed = scenario.seed;
  outcome.report.used_transfer_augmentation =
      scenario.options.use_transfer_augmentation;
  return outcome;
}

}  // namespace coplan::agents

namespace coplan::netsim {

Trace run(const Scenario& scenario) {
  return agents::run_collaboration(scenario).trace;
}

}  // namespace coplan::netsim
