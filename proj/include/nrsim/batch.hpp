#pragma once

// Independent scenario runs. The parallel path must produce exactly what
// the serial reference produces, element for element.

#include <span>
#include <vector>

#include "nrsim/engine.hpp"
#include "nrsim/scenario.hpp"

namespace nrsim {

std::vector<RunResult> run_batch_serial(std::span<const Scenario> scenarios);

// jobs <= 0 uses the OpenMP default thread count.
std::vector<RunResult> run_batch_parallel(std::span<const Scenario> scenarios, int jobs = 0);

// Copies of `base` with the first TA_DELTA attack set to each delta in turn.
// Throws ConfigInvalid when `base` carries no ta_delta attack.
std::vector<Scenario> ta_delta_sweep(const Scenario& base, std::span<const int> deltas);

}  // namespace nrsim
