#pragma once

// Scenario model and the sectioned key/value scenario file format.
//
//   # comment
//   [scenario]
//   name = ta_delta_30
//   duration_ms = 3600000
//   [timing]
//   cp_tolerance_units = 14
//   [cell]            # cells[0]
//   id = 1
//   ...
//   [cell]            # cells[1]
//   clone_of = 1      # harvest cells with id 1, then apply the keys below
//   [attack]          # attaches to the most recent [cell]
//   kind = ta_delta
//   delta_units = 30
//   [ue]              # ues[0]
//   position_m = 100
//   [detectors]
//   ta_rsrp = on
//
// Syntax errors carry line/column; semantic errors carry a field path such
// as `cells[1].attack.delta_units` or `duration_ms`.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nrsim/gnb.hpp"
#include "nrsim/radio.hpp"
#include "nrsim/timing.hpp"
#include "nrsim/types.hpp"
#include "nrsim/ue.hpp"

namespace nrsim {

struct UeSpec {
  UeId id{};
  double positionM = 0.0;
  ue::UePolicy policy;
  unsigned n310 = 10;
  unsigned n311 = 1;
  SimTime t310{30000};
  SimTime syncEval{1000};
  SimTime pagingCycle{1280};
  SimTime pagingWake{4};
  SimTime siAcqActive{320};
  std::optional<SimTime> connectAt;
  SimTime siCheckPeriod{1280};  // 0 disables on-demand SI checks
  bool blacklistOnRlf = false;
  ue::RachTimers rach;
  SimTime reconnectDelay{1000};
};

struct DetectorConfig {
  bool taRsrp = true;
  double taRsrpTolFactor = 3.0;
  bool valueTagRate = true;
  SimTime valueTagWindow{120000};
  unsigned valueTagMaxUpdates = 2;
};

struct Scenario {
  std::string name = "scenario";
  SimTime duration{0};
  std::uint64_t seed = 1;
  timing::TimingConfig timing;
  timing::Numerology numerology;
  radio::PathlossModel pathloss;
  double rsrpFloorDbm = radio::kDefaultRsrpFloorDbm;
  std::vector<gnb::CellConfig> cells;
  std::vector<UeSpec> ues;
  DetectorConfig detectors;
};

// Parses and validates. Throws ConfigInvalid.
Scenario parse_scenario(std::string_view text);
Scenario load_scenario(const std::filesystem::path& path);

// Structural and invariant checks on an already-built Scenario (used after
// programmatic edits too). Throws ConfigInvalid with a field path.
void validate(const Scenario& s);

}  // namespace nrsim
