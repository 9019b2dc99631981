#include "coplan/agents.hpp"

#include <algorithm>
#include <cmath>

namespace coplan::agents {

ScanState adaptive_scan_step(const ScanState& state,
                             const std::set<std::string>& observed_peers) {
  if (!(state.min_interval_s > 0.0) ||
      state.max_interval_s < state.min_interval_s) {
    fail(ErrorCode::Usage, "scan intervals need 0 < min <= max");
  }
  ScanState next = state;
  next.last_peer_set = observed_peers;
  if (observed_peers != state.last_peer_set) {
    next.interval_s = state.min_interval_s;
  } else {
    next.interval_s =
        std::min(state.interval_s * 2.0, state.max_interval_s);
  }
  return next;
}

const char* to_string(RecoveryStrategy strategy) {
  return strategy == RecoveryStrategy::MigratePartial ? "migrate_partial"
                                                      : "reprocess_all";
}

std::vector<netsim::Event> collaborator_step(const CollaboratorState& state,
                                             const netsim::Event& incoming) {
  std::vector<netsim::Event> outgoing;
  const double arrival = incoming.timestamp + incoming.duration_s;
  const std::string& self = state.profile.id;

  switch (incoming.kind) {
    case netsim::EventKind::Inquiry: {
      if (!state.accepts(incoming.note)) break;  // silence
      netsim::Event reply;
      reply.timestamp = arrival;
      reply.kind = netsim::EventKind::InquiryReply;
      reply.src = self;
      reply.dst = incoming.src;
      reply.note = "profile of " + self;
      outgoing.push_back(std::move(reply));
      break;
    }
    case netsim::EventKind::Delegate: {
      if (!state.accepts(incoming.note)) {
        netsim::Event nack;
        nack.timestamp = arrival;
        nack.kind = netsim::EventKind::Nack;
        nack.src = self;
        nack.dst = incoming.src;
        nack.note = "service '" + incoming.note + "' not installed";
        outgoing.push_back(std::move(nack));
        break;
      }
      const double chunk = incoming.payload_mb;
      const double span =
          state.profile.overhead_time_s + state.profile.time_per_mb * chunk;

      // The start event spans the busy window; the end event marks the
      // completion instant and carries the energy, so summing either kind
      // alone never double-counts.
      netsim::Event start;
      start.timestamp = arrival;
      start.kind = netsim::EventKind::ComputeStart;
      start.src = self;
      start.dst = self;
      start.payload_mb = chunk;
      start.duration_s = span;
      outgoing.push_back(start);

      netsim::Event end;
      end.timestamp = arrival + span;
      end.kind = netsim::EventKind::ComputeEnd;
      end.src = self;
      end.dst = self;
      end.payload_mb = chunk;
      end.energy_j[self] = state.profile.energy_per_mb * chunk +
                           state.profile.overhead_energy_j;
      outgoing.push_back(end);

      netsim::Event result;
      result.timestamp = arrival + span;
      result.kind = netsim::EventKind::Result;
      result.src = self;
      result.dst = incoming.src;
      outgoing.push_back(result);
      break;
    }
    default:
      break;  // other kinds need no reaction from a collaborator
  }
  return outgoing;
}

namespace {

// Transfer between two fleet members. Hops that touch the initiator ride the
// remote side's link directly; peer-to-peer payloads relay through the
// initiator, paying the leg to it and the leg from it.
struct HopCost {
  double time_s = 0.0;
  std::map<std::string, double> energy_j;
};

const netsim::LinkProfile& link_of(
    const planner::DeviceProfile& device,
    const std::map<std::string, netsim::LinkProfile>& links) {
  auto it = links.find(device.link);
  if (it == links.end()) {
    fail(ErrorCode::Config, "device '" + device.id + "': link '" +
                                device.link + "' is not in the link table");
  }
  return it->second;
}

HopCost leg(const planner::DeviceProfile& from,
            const planner::DeviceProfile& to, double payload_mb,
            const std::map<std::string, netsim::LinkProfile>& links) {
  HopCost hop;
  if (from.id == to.id || payload_mb <= 0.0) return hop;
  const bool from_is_initiator = from.kind == DeviceKind::Initiator;
  const planner::DeviceProfile& remote = from_is_initiator ? to : from;
  const netsim::TransferCost cost =
      netsim::transfer_cost(link_of(remote, links), payload_mb);
  hop.time_s = cost.time_s;
  hop.energy_j[from.id] += cost.tx_energy_j;
  hop.energy_j[to.id] += cost.rx_energy_j;
  return hop;
}

HopCost route(const planner::DeviceProfile& from,
              const planner::DeviceProfile& to,
              const planner::DeviceProfile& initiator, double payload_mb,
              const std::map<std::string, netsim::LinkProfile>& links) {
  if (from.id == to.id || payload_mb <= 0.0) return HopCost{};
  if (from.kind == DeviceKind::Initiator || to.kind == DeviceKind::Initiator) {
    return leg(from, to, payload_mb, links);
  }
  HopCost first = leg(from, initiator, payload_mb, links);
  HopCost second = leg(initiator, to, payload_mb, links);
  first.time_s += second.time_s;
  for (const auto& [device, joules] : second.energy_j) {
    first.energy_j[device] += joules;
  }
  return first;
}

void charge(PlacementEval& eval, const std::map<std::string, double>& energy,
            const std::vector<planner::DeviceProfile>& fleet, double weight) {
  for (const auto& [device, joules] : energy) {
    for (const planner::DeviceProfile& member : fleet) {
      if (member.id != device) continue;
      if (is_mobile(member.kind)) eval.mobile_energy_j += weight * joules;
      if (member.kind == DeviceKind::Initiator) {
        eval.initiator_energy_j += weight * joules;
      }
      break;
    }
  }
}

}  // namespace

PipelinePlacement place_pipeline(
    const PipelineSpec& pipeline,
    const std::vector<planner::DeviceProfile>& fleet,
    const std::map<std::string, netsim::LinkProfile>& links, double gamma) {
  if (pipeline.stages.empty()) {
    fail(ErrorCode::Config, "pipeline needs at least one stage");
  }
  if (!(gamma >= 0.0) || std::isinf(gamma)) {
    fail(ErrorCode::Usage, "pipeline placement needs a finite gamma >= 0");
  }
  std::size_t initiator_pos = fleet.size();
  for (std::size_t i = 0; i < fleet.size(); ++i) {
    if (fleet[i].kind == DeviceKind::Initiator) {
      if (initiator_pos != fleet.size()) {
        fail(ErrorCode::Config, "pipeline fleet has two initiators");
      }
      initiator_pos = i;
    }
  }
  if (initiator_pos == fleet.size()) {
    fail(ErrorCode::Config, "pipeline fleet has no initiator");
  }
  const planner::DeviceProfile& initiator = fleet[initiator_pos];

  const std::size_t stage_count = pipeline.stages.size();
  for (std::size_t k = 0; k < stage_count; ++k) {
    const PipelineStage& stage = pipeline.stages[k];
    const double p = stage.conditional_probability;
    if (!(p >= 0.0 && p <= 1.0)) {
      fail(ErrorCode::Config,
           "stage '" + stage.name + "': probability must lie in [0, 1]");
    }
    if (k == 0 && p != 1.0) {
      fail(ErrorCode::Config,
           "stage '" + stage.name + "': the first stage always runs; its "
                                    "probability must be 1");
    }
    if (stage.output_payload_mb < 0.0) {
      fail(ErrorCode::Config,
           "stage '" + stage.name + "': negative output payload");
    }
    for (const auto& [device, cost] : stage.costs) {
      bool known = false;
      for (const planner::DeviceProfile& member : fleet) {
        known = known || member.id == device;
      }
      if (!known) {
        fail(ErrorCode::Config, "stage '" + stage.name +
                                    "': cost entry for unknown device '" +
                                    device + "'");
      }
      if (cost.time_s < 0.0 || cost.energy_j < 0.0) {
        fail(ErrorCode::Config,
             "stage '" + stage.name + "': negative cost for '" + device + "'");
      }
    }
    // Stage one only ever runs on the initiator; later stages must be
    // costed for every device the enumeration may pick.
    if (k == 0) {
      if (!stage.costs.count(initiator.id)) {
        fail(ErrorCode::Config, "stage '" + stage.name +
                                    "': missing cost entry for the initiator");
      }
    } else {
      for (const planner::DeviceProfile& member : fleet) {
        if (!stage.costs.count(member.id)) {
          fail(ErrorCode::Config, "stage '" + stage.name +
                                      "': missing cost entry for device '" +
                                      member.id + "'");
        }
      }
    }
  }

  // Marginal execution weight of stage k is the product of the conditional
  // probabilities up to k; stage k is the last to execute with probability
  // weight(k) - weight(k+1).
  std::vector<double> weight(stage_count, 1.0);
  for (std::size_t k = 1; k < stage_count; ++k) {
    weight[k] = weight[k - 1] * pipeline.stages[k].conditional_probability;
  }

  auto evaluate = [&](const std::vector<std::size_t>& assignment) {
    PlacementEval eval;
    eval.assignment = assignment;
    for (std::size_t k = 0; k < stage_count; ++k) {
      const planner::DeviceProfile& host = fleet[assignment[k]];
      const StageCost& cost = pipeline.stages[k].costs.at(host.id);
      eval.expected_time_s += weight[k] * cost.time_s;
      charge(eval, {{host.id, cost.energy_j}}, fleet, weight[k]);
      if (k > 0) {
        const planner::DeviceProfile& previous = fleet[assignment[k - 1]];
        HopCost hop = route(previous, host, initiator,
                            pipeline.stages[k - 1].output_payload_mb, links);
        eval.expected_time_s += weight[k] * hop.time_s;
        charge(eval, hop.energy_j, fleet, weight[k]);
      }
      // Return leg: if this stage ends the run away from the initiator, its
      // output still has to come home.
      const double last_here =
          weight[k] - (k + 1 < stage_count ? weight[k + 1] : 0.0);
      if (last_here > 0.0) {
        HopCost home = route(host, initiator, initiator,
                             pipeline.stages[k].output_payload_mb, links);
        eval.expected_time_s += last_here * home.time_s;
        charge(eval, home.energy_j, fleet, last_here);
      }
    }
    eval.objective = eval.mobile_energy_j + gamma * eval.expected_time_s;
    return eval;
  };

  PipelinePlacement placement;
  std::vector<std::size_t> assignment(stage_count, 0);
  assignment[0] = initiator_pos;
  bool have_choice = false;
  while (true) {
    PlacementEval eval = evaluate(assignment);
    if (!have_choice || eval.objective < placement.chosen.objective) {
      placement.chosen = eval;
      have_choice = true;
    }
    placement.table.push_back(std::move(eval));

    // Advance the mixed-radix counter over stages 2..K (stage 1 is pinned).
    std::size_t k = stage_count;
    while (k-- > 1) {
      if (++assignment[k] < fleet.size()) break;
      assignment[k] = 0;
    }
    if (k == 0 || stage_count == 1) break;
  }

  for (std::size_t pos : placement.chosen.assignment) {
    placement.stage_devices.push_back(fleet[pos].id);
  }
  return placement;
}

}  // namespace coplan::agents
