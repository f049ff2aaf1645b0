#pragma once

// Metrics are a pure function of an EventLog. The engine, the report
// command and the tests all go through compute_metrics, so a log read back
// from disk reproduces the run's numbers exactly.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nrsim/events.hpp"
#include "nrsim/types.hpp"

namespace nrsim {

struct Metrics {
  std::uint64_t rlfCount = 0;
  std::uint64_t reestablishAttempts = 0;
  std::uint64_t siReacquisitions = 0;
  std::uint64_t registrationRequests = 0;
  std::uint64_t missedSiWindows = 0;
  std::uint64_t tacMismatches = 0;
  std::uint64_t detectorAlerts = 0;
  std::optional<double> meanTimeToRlfMs;
  double dutyCycle = 0.0;
  double connectedUptimeFraction = 0.0;

  friend bool operator==(const Metrics&, const Metrics&) = default;
};

// Per-UE reconstruction of the receiver/connection timeline.
struct UeTimeline {
  UeId id{};
  SimTime activeRx{0};
  SimTime stableConnected{0};  // CONNECTED with the latest uplink decoded
  SimTime longestStableInterval{0};
  double dutyCycle = 0.0;
  double connectedUptimeFraction = 0.0;
  std::vector<SimTime> connectionTimes;
  std::vector<SimTime> rlfTimes;
  std::vector<SimTime> reacquisitionTimes;
  std::vector<SimTime> timeToRlf;
};

std::vector<UeTimeline> reconstruct_timelines(const EventLog& log);

Metrics compute_metrics(const EventLog& log);

// Fixed header line plus one data row, newline terminated.
std::string metrics_csv(const Metrics& m);
inline constexpr const char* kMetricsCsvHeader =
    "rlf_count,reestablish_attempts,si_reacquisitions,registration_requests,missed_si_windows,"
    "tac_mismatches,detector_alerts,mean_time_to_rlf_ms,duty_cycle,connected_uptime_fraction";

}  // namespace nrsim
