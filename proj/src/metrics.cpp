#include "nrsim/metrics.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include <fmt/format.h>

#include "nrsim/ue.hpp"

namespace nrsim {

namespace {

struct TimelineBuilder {
  UeTimeline out;
  UeLogInfo info;
  bool active = false;
  bool connected = false;
  bool inSync = false;
  SimTime idleSince{0};
  SimTime activeSince{0};
  SimTime stableSince{0};
  std::optional<SimTime> lastConnection;

  bool stable() const { return connected && inSync; }

  void set_stable(bool before, SimTime t) {
    const bool after = stable();
    if (!before && after) stableSince = t;
    if (before && !after) close_stable(t);
  }

  void close_stable(SimTime t) {
    const SimTime len = t - stableSince;
    out.stableConnected += len;
    out.longestStableInterval = std::max(out.longestStableInterval, len);
  }

  void go_active(SimTime t) {
    if (active) return;
    out.activeRx += info.pagingWake * ue::paging_occasions_between(idleSince, t, info.pagingCycle);
    active = true;
    activeSince = t;
  }

  void go_idle(SimTime t) {
    if (!active) return;
    out.activeRx += t - activeSince;
    active = false;
    idleSince = t;
  }

  void finish(SimTime end) {
    if (stable()) close_stable(end);
    if (active) {
      out.activeRx += end - activeSince;
    } else {
      out.activeRx += info.pagingWake * ue::paging_occasions_between(idleSince, end, info.pagingCycle);
    }
    out.activeRx = std::min(out.activeRx, end);
    if (end.count() > 0) {
      out.dutyCycle = static_cast<double>(out.activeRx.count()) / static_cast<double>(end.count());
      out.connectedUptimeFraction =
          static_cast<double>(out.stableConnected.count()) / static_cast<double>(end.count());
    }
  }
};

std::optional<std::uint32_t> ue_of(const SimEvent& e) {
  std::string_view digits;
  if (e.subject.starts_with("ue")) {
    digits = std::string_view(e.subject).substr(2);
  } else {
    digits = e.get("ue");
  }
  if (digits.empty()) return std::nullopt;
  std::uint32_t v = 0;
  for (char c : digits) {
    if (c < '0' || c > '9') return std::nullopt;
    v = v * 10 + static_cast<std::uint32_t>(c - '0');
  }
  return v;
}

}  // namespace

std::vector<UeTimeline> reconstruct_timelines(const EventLog& log) {
  std::map<std::uint32_t, TimelineBuilder> builders;
  for (const auto& info : log.header.ues) {
    auto& b = builders[to_underlying(info.id)];
    b.info = info;
    b.out.id = info.id;
  }

  for (const auto& e : log.events) {
    const auto id = ue_of(e);
    if (!id) continue;
    const auto it = builders.find(*id);
    if (it == builders.end()) continue;
    auto& b = it->second;
    const bool wasStable = b.stable();
    switch (e.kind) {
      case EventKind::RachAttempt:
        b.go_active(e.time);
        break;
      case EventKind::ConnectionEstablished:
        b.connected = true;
        b.lastConnection = e.time;
        b.out.connectionTimes.push_back(e.time);
        b.set_stable(wasStable, e.time);
        break;
      case EventKind::UlDecode:
        b.inSync = e.get("ok") == "1";
        b.set_stable(wasStable, e.time);
        break;
      case EventKind::Rlf:
        b.connected = false;
        b.set_stable(wasStable, e.time);
        b.go_idle(e.time);
        b.out.rlfTimes.push_back(e.time);
        if (b.lastConnection) b.out.timeToRlf.push_back(e.time - *b.lastConnection);
        break;
      case EventKind::RachFailure:
        if (e.get("final") == "1") b.go_idle(e.time);
        break;
      case EventKind::SiReacquisition:
        b.out.activeRx += b.info.siAcqActive;
        b.out.reacquisitionTimes.push_back(e.time);
        break;
      default:
        break;
    }
  }

  std::vector<UeTimeline> out;
  out.reserve(builders.size());
  for (auto& [id, b] : builders) {
    b.finish(log.header.duration);
    out.push_back(std::move(b.out));
  }
  return out;
}

Metrics compute_metrics(const EventLog& log) {
  Metrics m;
  for (const auto& e : log.events) {
    switch (e.kind) {
      case EventKind::Rlf: ++m.rlfCount; break;
      case EventKind::ReestablishReq: ++m.reestablishAttempts; break;
      case EventKind::SiReacquisition: ++m.siReacquisitions; break;
      case EventKind::RegistrationRequest: ++m.registrationRequests; break;
      case EventKind::MissedSi: ++m.missedSiWindows; break;
      case EventKind::TacMismatchObserved: ++m.tacMismatches; break;
      case EventKind::DetectorAlert: ++m.detectorAlerts; break;
      default: break;
    }
  }

  const auto timelines = reconstruct_timelines(log);
  std::vector<SimTime> ttr;
  double duty = 0.0;
  double uptime = 0.0;
  for (const auto& t : timelines) {
    ttr.insert(ttr.end(), t.timeToRlf.begin(), t.timeToRlf.end());
    duty += t.dutyCycle;
    uptime += t.connectedUptimeFraction;
  }
  if (!timelines.empty()) {
    m.dutyCycle = duty / static_cast<double>(timelines.size());
    m.connectedUptimeFraction = uptime / static_cast<double>(timelines.size());
  }
  if (!ttr.empty()) {
    const auto sum = std::accumulate(ttr.begin(), ttr.end(), SimTime{0});
    m.meanTimeToRlfMs = static_cast<double>(sum.count()) / static_cast<double>(ttr.size());
  }
  return m;
}

std::string metrics_csv(const Metrics& m) {
  const std::string ttr = m.meanTimeToRlfMs ? fmt::format("{:.3f}", *m.meanTimeToRlfMs) : "";
  return fmt::format("{}\n{},{},{},{},{},{},{},{},{:.9f},{:.9f}\n", kMetricsCsvHeader, m.rlfCount,
                     m.reestablishAttempts, m.siReacquisitions, m.registrationRequests,
                     m.missedSiWindows, m.tacMismatches, m.detectorAlerts, ttr, m.dutyCycle,
                     m.connectedUptimeFraction);
}

}  // namespace nrsim
