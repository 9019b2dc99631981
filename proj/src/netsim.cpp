#include "coplan/netsim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "coplan/format.hpp"

namespace coplan::netsim {
namespace {

std::string csv_quote(const std::string& field) {
  std::string quoted = "\"";
  for (char c : field) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  quoted += '"';
  return quoted;
}

}  // namespace

TransferCost transfer_cost(const LinkProfile& link, double size_mb) {
  if (!(link.rate_mbps > 0.0)) {
    fail(ErrorCode::Config, "link '" + link.id + "': rate must be positive");
  }
  if (size_mb < 0.0 || !std::isfinite(size_mb)) {
    fail(ErrorCode::Usage, "transfer size must be a finite non-negative MB");
  }
  TransferCost cost;
  cost.time_s = link.setup_latency_s + 8.0 * size_mb / link.rate_mbps;
  cost.tx_energy_j = link.tx_power_w * cost.time_s;
  cost.rx_energy_j = link.rx_power_w * cost.time_s;
  return cost;
}

const char* to_string(EventKind kind) {
  switch (kind) {
    case EventKind::Scan:
      return "scan";
    case EventKind::Inquiry:
      return "inquiry";
    case EventKind::InquiryReply:
      return "inquiry_reply";
    case EventKind::Delegate:
      return "delegate";
    case EventKind::ComputeStart:
      return "compute_start";
    case EventKind::ComputeEnd:
      return "compute_end";
    case EventKind::Result:
      return "result";
    case EventKind::DepartNotice:
      return "depart_notice";
    case EventKind::PartialResult:
      return "partial_result";
    case EventKind::Nack:
      return "nack";
  }
  return "unknown";
}

EnergyAccount account_energy(const Trace& trace) {
  EnergyAccount account;
  for (const Event& event : trace.events) {
    for (const auto& [device, joules] : event.energy_j) {
      account.per_device[device] += joules;
    }
  }
  for (const auto& [device, joules] : account.per_device) {
    account.grand_total += joules;
    auto kind = trace.device_kinds.find(device);
    const bool mobile =
        kind == trace.device_kinds.end() || is_mobile(kind->second);
    if (mobile) account.mobile_total += joules;
  }
  return account;
}

void write_trace_csv(const Trace& trace, std::ostream& out) {
  out << "seq,timestamp,kind,src,dst,payload_mb,duration_s,energy_json\n";
  for (const Event& event : trace.events) {
    std::string energy = "{";
    bool first = true;
    for (const auto& [device, joules] : event.energy_j) {
      if (!first) energy += ",";
      first = false;
      energy += "\"" + device + "\":" + format_sig9(joules);
    }
    energy += "}";
    out << event.seq << ',' << format_sig9(event.timestamp) << ','
        << to_string(event.kind) << ',' << event.src << ',' << event.dst << ','
        << format_sig9(event.payload_mb) << ',' << format_sig9(event.duration_s) << ','
        << csv_quote(energy) << '\n';
  }
}

void write_trace_csv_file(const Trace& trace, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot open '" + path + "' for writing");
  write_trace_csv(trace, out);
  if (!out.good()) fail(ErrorCode::Io, "failed while writing '" + path + "'");
}

double Engine::reserve(const std::string& resource, double earliest,
                       double duration) {
  double& cursor = resource_free_[resource];
  const double start = std::max(cursor, earliest);
  cursor = start + duration;
  return start;
}

double Engine::available_at(const std::string& resource) const {
  auto it = resource_free_.find(resource);
  return it == resource_free_.end() ? 0.0 : it->second;
}

void Engine::emit(Event event) {
  event.seq = next_seq_++;
  events_.push_back(std::move(event));
}

double Engine::uniform(double lo, double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  return dist(rng_);
}

bool Engine::bernoulli(double p) {
  if (p >= 1.0) return true;
  if (p <= 0.0) return false;
  return uniform(0.0, 1.0) < p;
}

Trace Engine::finish(std::map<std::string, DeviceKind> device_kinds) {
  Trace trace;
  trace.events = std::move(events_);
  std::stable_sort(trace.events.begin(), trace.events.end(),
                   [](const Event& a, const Event& b) {
                     if (a.timestamp != b.timestamp) {
                       return a.timestamp < b.timestamp;
                     }
                     return a.seq < b.seq;
                   });
  for (const Event& event : trace.events) {
    trace.end_time =
        std::max(trace.end_time, event.timestamp + event.duration_s);
  }
  trace.device_kinds = std::move(device_kinds);
  events_.clear();
  next_seq_ = 0;
  return trace;
}

}  // namespace coplan::netsim
