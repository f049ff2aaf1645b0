#pragma once

// Single-threaded discrete-event execution of a Scenario. Events at equal
// timestamps run in insertion order, so a (scenario, seed) pair always
// produces the same log.

#include <vector>

#include "nrsim/events.hpp"
#include "nrsim/metrics.hpp"
#include "nrsim/scenario.hpp"
#include "nrsim/ue.hpp"

namespace nrsim {

struct RunResult {
  EventLog log;
  Metrics metrics;                 // compute_metrics(log)
  std::vector<ue::UeContext> ues;  // final UE state, power accrued to the end
};

// Throws ConfigInvalid if the scenario does not validate.
RunResult run_scenario(const Scenario& scenario);

}  // namespace nrsim
