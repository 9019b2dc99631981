#pragma once

#include <cstdint>
#include <map>
#include <ostream>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "coplan/errors.hpp"
#include "coplan/types.hpp"

namespace coplan {
struct Scenario;  // defined in coplan/scenario.hpp
}

namespace coplan::netsim {

// A point-to-point radio or network link. Rates are megabits per second;
// payload sizes everywhere are megabytes, hence the factor eight below. An
// unbounded rate models a free local hop.
struct LinkProfile {
  std::string id;
  double rate_mbps = kUnbounded;
  double tx_power_w = 0.0;
  double rx_power_w = 0.0;
  double setup_latency_s = 0.0;
};

struct TransferCost {
  double time_s = 0.0;
  double tx_energy_j = 0.0;  // spent by the sender
  double rx_energy_j = 0.0;  // spent by the receiver
};

// time = setup + 8 * size / rate; each side pays its radio power for the
// whole transfer window, setup included.
TransferCost transfer_cost(const LinkProfile& link, double size_mb);

enum class EventKind {
  Scan,
  Inquiry,
  InquiryReply,
  Delegate,
  ComputeStart,
  ComputeEnd,
  Result,
  DepartNotice,
  PartialResult,
  Nack,
};

const char* to_string(EventKind kind);

struct Event {
  std::uint64_t seq = 0;     // total order among events with equal timestamps
  double timestamp = 0.0;    // activity start, seconds from scenario start
  EventKind kind = EventKind::Scan;
  std::string src;
  std::string dst;
  double payload_mb = 0.0;
  double duration_s = 0.0;
  std::map<std::string, double> energy_j;  // joules per device for this event
  std::string note;  // free text (service names, recovery notes); not exported
};

struct Trace {
  std::vector<Event> events;  // sorted by (timestamp, seq)
  double end_time = 0.0;      // max over events of timestamp + duration
  std::map<std::string, DeviceKind> device_kinds;
};

struct EnergyAccount {
  std::map<std::string, double> per_device;
  double mobile_total = 0.0;  // cloudlet and cloud devices excluded
  double grand_total = 0.0;
};

EnergyAccount account_energy(const Trace& trace);

// Columns: seq,timestamp,kind,src,dst,payload_mb,duration_s,energy_json.
// Floats carry nine significant digits; the per-device energy map is a JSON
// object quoted as a single CSV field.
void write_trace_csv(const Trace& trace, std::ostream& out);
void write_trace_csv_file(const Trace& trace, const std::string& path);

// Bookkeeping substrate for the deterministic simulation: an event log with a
// global sequence, serially reservable resources (radios, CPUs) and a seeded
// generator for the few scenario knobs that ask for randomness. All ties in
// the final ordering break on the sequence number, never on address or hash
// order, so a scenario and seed always reproduce the same trace.
class Engine {
 public:
  explicit Engine(std::uint64_t seed) : rng_(seed) {}

  // Earliest slot of length `duration` on `resource` starting at or after
  // `earliest`; advances the resource cursor and returns the start time.
  double reserve(const std::string& resource, double earliest, double duration);

  // Current cursor of a resource without reserving anything.
  double available_at(const std::string& resource) const;

  // Appends the event, assigning the next sequence number.
  void emit(Event event);

  double uniform(double lo, double hi);
  bool bernoulli(double p);

  // Sorts by (timestamp, seq), computes end_time and hands the log over.
  Trace finish(std::map<std::string, DeviceKind> device_kinds);

 private:
  std::uint64_t next_seq_ = 0;
  std::vector<Event> events_;
  std::map<std::string, double> resource_free_;
  std::mt19937_64 rng_;
};

// Runs the whole collaboration described by the scenario (discovery,
// planning, delegation, compute, result gathering, recovery) and returns the
// trace. Defined alongside the agent behaviours; declared here because the
// trace is this module's artefact.
Trace run(const Scenario& scenario);

}  // namespace coplan::netsim
