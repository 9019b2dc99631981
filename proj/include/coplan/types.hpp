#pragma once

#include <limits>
#include <string>

namespace coplan {

// Sentinel for "no limit" on budgets, rates and similar non-negative knobs.
inline constexpr double kUnbounded = std::numeric_limits<double>::infinity();

enum class DeviceKind { Initiator, Peer, Cloudlet, Cloud };

// Cloudlet and cloud devices run on wall power, so their compute energy never
// counts toward the mobile energy totals the planner and the reports track.
inline bool is_mobile(DeviceKind kind) {
  return kind == DeviceKind::Initiator || kind == DeviceKind::Peer;
}

const char* to_string(DeviceKind kind);

// Throws Error(Config) for an unknown name.
DeviceKind device_kind_from_string(const std::string& name);

}  // namespace coplan
