#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "coplan/netsim.hpp"
#include "coplan/planner.hpp"

namespace coplan::agents {

// ---------------------------------------------------------------------------
// Opportunity discovery

// Adaptive scan schedule: a change in the visible peer set snaps the interval
// back to the minimum; a quiet neighbourhood doubles it up to the cap.
struct ScanState {
  double interval_s = 1.0;
  double min_interval_s = 1.0;
  double max_interval_s = 16.0;
  std::set<std::string> last_peer_set;
};

ScanState adaptive_scan_step(const ScanState& state,
                             const std::set<std::string>& observed_peers);

// ---------------------------------------------------------------------------
// Collaborator protocol

struct CollaboratorState {
  planner::DeviceProfile profile;
  // Empty set means the device answers for any service.
  std::set<std::string> services;
  bool accepts(const std::string& service) const {
    return services.empty() || services.count(service) > 0;
  }
};

// Wire-level reaction of a collaborator to one incoming event:
//  - inquiry for an installed service  -> inquiry_reply carrying the profile
//  - inquiry for a missing service     -> silence
//  - delegation of an installed service-> compute_start/compute_end/result
//  - delegation of a missing service   -> nack
// Outgoing events are stamped relative to the incoming event's completion;
// the simulation driver re-times radio-bound legs for contention.
std::vector<netsim::Event> collaborator_step(const CollaboratorState& state,
                                             const netsim::Event& incoming);

// ---------------------------------------------------------------------------
// Mobility

enum class RecoveryStrategy { MigratePartial, ReprocessAll };

const char* to_string(RecoveryStrategy strategy);

struct DepartureEvent {
  std::string device;
  double motion_onset_s = 0.0;     // when the device starts moving
  double detection_delay_s = 0.0;  // how long until the move is noticed
  RecoveryStrategy strategy = RecoveryStrategy::MigratePartial;
};

// Delegated files are processed in units of this many MB, so "work completed
// by the time a departure is detected" is always well defined.
inline constexpr double kProcessingUnitMb = 0.5;

// ---------------------------------------------------------------------------
// Pipelines

struct StageCost {
  double time_s = 0.0;
  double energy_j = 0.0;
};

struct PipelineStage {
  std::string name;
  std::map<std::string, StageCost> costs;  // device id -> compute cost
  double output_payload_mb = 0.0;
  double conditional_probability = 1.0;  // chance this stage runs given the
                                         // previous one ran
};

struct PipelineSpec {
  std::vector<PipelineStage> stages;
  double gamma = 0.0;
};

struct PlacementEval {
  std::vector<std::size_t> assignment;  // stage -> fleet index
  double expected_time_s = 0.0;
  double mobile_energy_j = 0.0;
  double initiator_energy_j = 0.0;
  double objective = 0.0;  // mobile energy + gamma * expected time
};

struct PipelinePlacement {
  std::vector<std::string> stage_devices;  // chosen device id per stage
  PlacementEval chosen;
  std::vector<PlacementEval> table;  // full enumeration, lexicographic order
};

// Exhaustively enumerates every assignment of stages 2..K over the fleet
// (stage 1 stays on the initiator) and picks the lowest objective; the first
// assignment in lexicographic order wins ties. Expected values weight stage k
// by the product of conditional probabilities up to k; payload hops between
// devices route through the initiator's radio, and the last executed stage's
// output always travels back to the initiator.
PipelinePlacement place_pipeline(
    const PipelineSpec& pipeline, const std::vector<planner::DeviceProfile>& fleet,
    const std::map<std::string, netsim::LinkProfile>& links, double gamma);

}  // namespace coplan::agents
