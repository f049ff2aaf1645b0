#pragma once

// Typed simulation events and the line-delimited events.log format.
//
//   # nrsim-events v1
//   # scenario=<name> seed=<n> duration_ms=<n>
//   # ue id=<n> paging_cycle_ms=<n> paging_wake_ms=<n> si_acq_active_ms=<n>
//   <time_ms> <KIND> <subject> key=value ...
//   ...
//   # end events=<count>
//
// Payload keys keep insertion order so serialized logs are byte-stable.
// The trailer line lets readers tell a complete log from a truncated one.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nrsim/types.hpp"

namespace nrsim {

enum class EventKind {
  Broadcast,
  SiReacquisition,
  TacMismatchObserved,
  RegistrationRequest,
  MissedSi,
  RachAttempt,
  PrachDetected,
  RarSent,
  Msg3Sent,
  UlDecode,
  RachFailure,
  T310Started,
  T310Stopped,
  Rlf,
  ReestablishReq,
  ConnectionEstablished,
  DetectorAlert,
};

std::string_view to_string(EventKind kind) noexcept;
std::optional<EventKind> parse_event_kind(std::string_view text) noexcept;

using Payload = std::vector<std::pair<std::string, std::string>>;

struct SimEvent {
  SimTime time{0};
  EventKind kind = EventKind::Broadcast;
  std::string subject;
  Payload payload;

  // Empty view when the key is absent.
  std::string_view get(std::string_view key) const noexcept;
  friend bool operator==(const SimEvent&, const SimEvent&) = default;
};

struct UeLogInfo {
  UeId id{};
  SimTime pagingCycle{1280};
  SimTime pagingWake{4};
  SimTime siAcqActive{320};

  friend bool operator==(const UeLogInfo&, const UeLogInfo&) = default;
};

struct LogHeader {
  std::string scenario;
  std::uint64_t seed = 0;
  SimTime duration{0};
  std::vector<UeLogInfo> ues;

  friend bool operator==(const LogHeader&, const LogHeader&) = default;
};

struct EventLog {
  LogHeader header;
  std::vector<SimEvent> events;

  friend bool operator==(const EventLog&, const EventLog&) = default;
};

std::string format_event(const SimEvent& e);
std::string serialize(const EventLog& log);
void write_event_log(const EventLog& log, std::ostream& out);

// Throws LogFormatError with the offending line number.
EventLog parse_event_log(std::string_view text);

}  // namespace nrsim
