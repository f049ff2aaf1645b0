#pragma once

// Passive defence-side monitors: TA vs RSRP distance consistency and
// valueTag update-rate anomaly detection.

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <span>
#include <string>

#include "nrsim/radio.hpp"
#include "nrsim/timing.hpp"
#include "nrsim/types.hpp"

namespace nrsim::detect {

struct TaRsrpSample {
  unsigned taCommand = 0;
  double rsrpDbm = 0.0;
  CellId cellId{};
  SimTime time{0};
};

struct DetectorVerdict {
  bool flagged = false;
  double score = 0.0;
  std::string reason;
};

struct TaRsrpParams {
  radio::PathlossModel pathloss;
  timing::Numerology numerology;
  double baseQuantumUs = timing::kDefaultBaseQuantumUs;
  double tolFactor = 3.0;
};

// Both distance estimates are floored at max(1 m, half a TA unit of
// range): below that the TA command carries no distance information, so a
// near-zero command next to a strong cell is not an inconsistency.
double ta_distance_floor_m(const TaRsrpParams& params);

// Flags when the TA-implied and RSRP-implied distances disagree by more
// than tolFactor in either direction. UnknownCell when the sample's cell
// has no known transmit power.
DetectorVerdict ta_rsrp_check(const TaRsrpSample& sample, const std::map<CellId, double>& txPowerDbm,
                              const TaRsrpParams& params = {});

struct ValueTagObservation {
  SimTime time{0};
  std::uint8_t valueTag = 0;
};

// Counts value changes whose timestamp falls in the trailing window ending
// at the last observation; flagged iff count > maxUpdates.
DetectorVerdict valuetag_rate_check(std::span<const ValueTagObservation> history,
                                    SimTime window = SimTime{120000}, unsigned maxUpdates = 2);

// Streaming wrapper around valuetag_rate_check. Keeps only change points,
// and reports a verdict only on the not-flagged -> flagged edge.
class ValueTagRateMonitor {
 public:
  ValueTagRateMonitor(SimTime window, unsigned maxUpdates) : window_(window), maxUpdates_(maxUpdates) {}

  std::optional<DetectorVerdict> observe(SimTime time, std::uint8_t valueTag);

 private:
  SimTime window_;
  unsigned maxUpdates_;
  std::deque<ValueTagObservation> changes_;
  bool flagged_ = false;
};

}  // namespace nrsim::detect
