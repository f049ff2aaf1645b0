#include "nrsim/events.hpp"

#include <array>
#include <charconv>
#include <ostream>

#include <fmt/format.h>

#include "nrsim/errors.hpp"

namespace nrsim {

namespace {

constexpr std::array<std::pair<EventKind, std::string_view>, 17> kKindNames{{
    {EventKind::Broadcast, "BROADCAST"},
    {EventKind::SiReacquisition, "SI_REACQUISITION"},
    {EventKind::TacMismatchObserved, "TAC_MISMATCH_OBSERVED"},
    {EventKind::RegistrationRequest, "REGISTRATION_REQUEST"},
    {EventKind::MissedSi, "MISSED_SI"},
    {EventKind::RachAttempt, "RACH_ATTEMPT"},
    {EventKind::PrachDetected, "PRACH_DETECTED"},
    {EventKind::RarSent, "RAR_SENT"},
    {EventKind::Msg3Sent, "MSG3_SENT"},
    {EventKind::UlDecode, "UL_DECODE"},
    {EventKind::RachFailure, "RACH_FAILURE"},
    {EventKind::T310Started, "T310_STARTED"},
    {EventKind::T310Stopped, "T310_STOPPED"},
    {EventKind::Rlf, "RLF"},
    {EventKind::ReestablishReq, "REESTABLISH_REQ"},
    {EventKind::ConnectionEstablished, "CONNECTION_ESTABLISHED"},
    {EventKind::DetectorAlert, "DETECTOR_ALERT"},
}};

constexpr std::string_view kMagic = "# nrsim-events v1";

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      break;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

template <typename Int>
std::optional<Int> parse_int(std::string_view s) {
  Int v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

// Parses `key=value` tokens into ordered pairs; nullopt on a bad token.
std::optional<Payload> parse_pairs(const std::vector<std::string_view>& tokens, std::size_t from) {
  Payload out;
  for (std::size_t i = from; i < tokens.size(); ++i) {
    const auto eq = tokens[i].find('=');
    if (eq == std::string_view::npos || eq == 0) return std::nullopt;
    out.emplace_back(std::string(tokens[i].substr(0, eq)), std::string(tokens[i].substr(eq + 1)));
  }
  return out;
}

std::string_view lookup(const Payload& p, std::string_view key) {
  for (const auto& [k, v] : p) {
    if (k == key) return v;
  }
  return {};
}

}  // namespace

std::string_view to_string(EventKind kind) noexcept {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "UNKNOWN";
}

std::optional<EventKind> parse_event_kind(std::string_view text) noexcept {
  for (const auto& [k, name] : kKindNames) {
    if (name == text) return k;
  }
  return std::nullopt;
}

std::string_view SimEvent::get(std::string_view key) const noexcept { return lookup(payload, key); }

std::string format_event(const SimEvent& e) {
  std::string line = fmt::format("{} {} {}", e.time.count(), to_string(e.kind), e.subject);
  for (const auto& [k, v] : e.payload) {
    line += ' ';
    line += k;
    line += '=';
    line += v;
  }
  return line;
}

std::string serialize(const EventLog& log) {
  std::string out;
  out.reserve(64 * (log.events.size() + 4));
  out += kMagic;
  out += '\n';
  out += fmt::format("# scenario={} seed={} duration_ms={}\n", log.header.scenario, log.header.seed,
                     log.header.duration.count());
  for (const auto& u : log.header.ues) {
    out += fmt::format("# ue id={} paging_cycle_ms={} paging_wake_ms={} si_acq_active_ms={}\n",
                       to_underlying(u.id), u.pagingCycle.count(), u.pagingWake.count(),
                       u.siAcqActive.count());
  }
  for (const auto& e : log.events) {
    out += format_event(e);
    out += '\n';
  }
  out += fmt::format("# end events={}\n", log.events.size());
  return out;
}

void write_event_log(const EventLog& log, std::ostream& out) { out << serialize(log); }

EventLog parse_event_log(std::string_view text) {
  EventLog log;
  auto lines = split(text, '\n');
  const bool endsWithNewline = !text.empty() && text.back() == '\n';
  if (endsWithNewline) lines.pop_back();

  std::size_t lastGood = 0;
  bool sawEnd = false;
  auto fail = [&](std::size_t lineNo, const std::string& msg) -> LogFormatError {
    return LogFormatError(lineNo, lastGood, msg);
  };

  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t lineNo = i + 1;
    const std::string_view line = lines[i];
    if (sawEnd) throw fail(lineNo, "content after end trailer");
    if (i + 1 == lines.size() && !endsWithNewline) throw fail(lineNo, "truncated line (no newline)");

    if (lineNo == 1) {
      if (line != kMagic) throw fail(lineNo, "missing '# nrsim-events v1' header");
      lastGood = lineNo;
      continue;
    }
    if (line.starts_with('#')) {
      const auto tokens = split(line, ' ');
      const std::string_view tag = tokens.size() > 1 ? tokens[1] : std::string_view{};
      if (tag == "ue") {
        const auto pairs = parse_pairs(tokens, 2);
        if (!pairs) throw fail(lineNo, "bad ue header");
        const auto id = parse_int<std::uint32_t>(lookup(*pairs, "id"));
        const auto cycle = parse_int<std::int64_t>(lookup(*pairs, "paging_cycle_ms"));
        const auto wake = parse_int<std::int64_t>(lookup(*pairs, "paging_wake_ms"));
        const auto acq = parse_int<std::int64_t>(lookup(*pairs, "si_acq_active_ms"));
        if (!id || !cycle || !wake || !acq || *cycle <= 0) throw fail(lineNo, "bad ue header");
        log.header.ues.push_back(UeLogInfo{UeId{*id}, SimTime{*cycle}, SimTime{*wake}, SimTime{*acq}});
      } else if (tag == "end") {
        const auto pairs = parse_pairs(tokens, 2);
        const auto n = pairs ? parse_int<std::size_t>(lookup(*pairs, "events")) : std::nullopt;
        if (!n || *n != log.events.size()) throw fail(lineNo, "end trailer event count mismatch");
        sawEnd = true;
      } else if (tag.starts_with("scenario=")) {
        const auto pairs = parse_pairs(tokens, 1);
        const auto seed = pairs ? parse_int<std::uint64_t>(lookup(*pairs, "seed")) : std::nullopt;
        const auto dur = pairs ? parse_int<std::int64_t>(lookup(*pairs, "duration_ms")) : std::nullopt;
        if (!seed || !dur) throw fail(lineNo, "bad scenario header");
        log.header.scenario = std::string(lookup(*pairs, "scenario"));
        log.header.seed = *seed;
        log.header.duration = SimTime{*dur};
      }
      // Other comment lines are ignored.
      lastGood = lineNo;
      continue;
    }

    const auto tokens = split(line, ' ');
    if (tokens.size() < 3) throw fail(lineNo, "expected '<time_ms> <KIND> <subject> key=value...'");
    const auto t = parse_int<std::int64_t>(tokens[0]);
    if (!t || *t < 0) throw fail(lineNo, "bad timestamp");
    const auto kind = parse_event_kind(tokens[1]);
    if (!kind) throw fail(lineNo, fmt::format("unknown event kind '{}'", tokens[1]));
    if (tokens[2].empty()) throw fail(lineNo, "empty subject");
    auto payload = parse_pairs(tokens, 3);
    if (!payload) throw fail(lineNo, "bad key=value token");
    if (!log.events.empty() && SimTime{*t} < log.events.back().time) {
      throw fail(lineNo, "timestamp goes backwards");
    }
    log.events.push_back(SimEvent{SimTime{*t}, *kind, std::string(tokens[2]), std::move(*payload)});
    lastGood = lineNo;
  }
  if (!sawEnd) throw LogFormatError(lines.size() + 1, lastGood, "truncated log: missing end trailer");
  return log;
}

}  // namespace nrsim
