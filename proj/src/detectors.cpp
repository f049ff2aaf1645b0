#include "nrsim/detectors.hpp"

#include <algorithm>
#include <vector>

#include <fmt/format.h>

#include "nrsim/errors.hpp"

namespace nrsim::detect {

double ta_distance_floor_m(const TaRsrpParams& params) {
  const auto unit = timing::ta_unit_duration(params.numerology, params.baseQuantumUs);
  // One TA unit is a round trip, so half of it one way, and half a unit of rounding.
  const double halfUnitRange = 0.5 * (unit.count() / 2.0) * kSpeedOfLightMPerUs;
  return std::max(1.0, halfUnitRange);
}

DetectorVerdict ta_rsrp_check(const TaRsrpSample& sample, const std::map<CellId, double>& txPowerDbm,
                              const TaRsrpParams& params) {
  const auto it = txPowerDbm.find(sample.cellId);
  if (it == txPowerDbm.end()) {
    throw UnknownCell("no transmit power known for " + subject_of(sample.cellId));
  }
  const double floor = ta_distance_floor_m(params);
  const auto ta = timing::ta_to_time(sample.taCommand, params.numerology, params.baseQuantumUs);
  const double dTa = std::max(floor, ta.count() / 2.0 * kSpeedOfLightMPerUs);
  const double dRsrp = std::max(floor, radio::distance_for_pathloss(it->second - sample.rsrpDbm, params.pathloss));
  const double ratio = std::max(dTa / dRsrp, dRsrp / dTa);

  DetectorVerdict v;
  v.score = ratio;
  v.flagged = ratio > params.tolFactor;
  v.reason = fmt::format("ta_distance_m={:.1f},rsrp_distance_m={:.1f}", dTa, dRsrp);
  return v;
}

DetectorVerdict valuetag_rate_check(std::span<const ValueTagObservation> history, SimTime window,
                                    unsigned maxUpdates) {
  DetectorVerdict v;
  if (history.size() < 2) {
    v.reason = "transitions=0";
    return v;
  }
  const SimTime end = history.back().time;
  unsigned transitions = 0;
  for (std::size_t i = 1; i < history.size(); ++i) {
    if (history[i].valueTag != history[i - 1].valueTag && history[i].time > end - window) ++transitions;
  }
  v.score = transitions;
  v.flagged = transitions > maxUpdates;
  v.reason = fmt::format("transitions={},window_ms={}", transitions, window.count());
  return v;
}

std::optional<DetectorVerdict> ValueTagRateMonitor::observe(SimTime time, std::uint8_t valueTag) {
  if (changes_.empty() || changes_.back().valueTag != valueTag) changes_.push_back({time, valueTag});
  // Keep one observation older than the window as the predecessor of the first in-window change.
  while (changes_.size() > 1 && changes_[1].time <= time - window_) changes_.pop_front();

  std::vector<ValueTagObservation> history(changes_.begin(), changes_.end());
  history.push_back({time, valueTag});
  auto verdict = valuetag_rate_check(history, window_, maxUpdates_);
  const bool rising = verdict.flagged && !flagged_;
  flagged_ = verdict.flagged;
  if (rising) return verdict;
  return std::nullopt;
}

}  // namespace nrsim::detect
