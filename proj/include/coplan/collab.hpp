#pragma once

#include "coplan/netsim.hpp"
#include "coplan/report.hpp"
#include "coplan/scenario.hpp"

namespace coplan::agents {

struct SimOutcome {
  netsim::Trace trace;
  report::CollaborationReport report;
};

// Plays out the whole collaboration from the initiator's side: scan and
// inquire, plan (or place the pipeline), delegate, let collaborators compute,
// gather results over the serialized initiator radio, and recover from any
// declared departures. Planning failures do not throw; they come back as a
// report carrying the binding constraint, with the discovery prefix of the
// trace intact. Identical scenario and seed always produce identical output.
SimOutcome run_collaboration(const Scenario& scenario);

}  // namespace coplan::agents
