#include "nrsim/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "nrsim/codec.hpp"
#include "nrsim/errors.hpp"

namespace nrsim {

namespace {

struct RawEntry {
  std::string key;
  std::string value;
  int line = 0;
};

struct RawSection {
  std::string name;
  int line = 0;
  std::vector<RawEntry> entries;
};

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

const std::set<std::string, std::less<>> kSections{"scenario", "timing", "cell", "attack", "ue", "detectors"};

std::vector<RawSection> tokenize(std::string_view text) {
  std::vector<RawSection> sections;
  int lineNo = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++lineNo;

    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const auto firstCol = static_cast<int>(line.find_first_not_of(" \t\r")) + 1;
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigInvalid(lineNo, firstCol + static_cast<int>(line.size()), "expected ']' to close section header");
      }
      const std::string name(trim(line.substr(1, line.size() - 2)));
      if (!kSections.contains(name)) {
        throw ConfigInvalid(lineNo, firstCol + 1, fmt::format("unknown section '[{}]'", name));
      }
      if (name == "attack" && (sections.empty() || (sections.back().name != "cell"))) {
        throw ConfigInvalid(lineNo, firstCol, "[attack] must directly follow a [cell] section");
      }
      sections.push_back({name, lineNo, {}});
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigInvalid(lineNo, firstCol, "expected 'key = value'");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigInvalid(lineNo, firstCol, "missing key before '='");
    if (value.empty()) throw ConfigInvalid(lineNo, firstCol + static_cast<int>(eq) + 1, "missing value after '='");
    if (sections.empty()) throw ConfigInvalid(lineNo, firstCol, "key outside of any section");
    sections.back().entries.push_back({std::string(key), std::string(value), lineNo});
  }
  return sections;
}

// Typed access to one section's keys; every key must be consumed.
class KeyReader {
 public:
  KeyReader(const RawSection& sec, std::string prefix) : prefix_(std::move(prefix)) {
    for (const auto& e : sec.entries) {
      if (!values_.emplace(e.key, e.value).second) throw ConfigInvalid(path(e.key), "duplicate key");
    }
  }

  std::string path(std::string_view key) const {
    return prefix_.empty() ? std::string(key) : prefix_ + "." + std::string(key);
  }

  bool has(std::string_view key) const { return values_.contains(std::string(key)); }

  std::optional<std::string> str(std::string_view key) {
    const auto it = values_.find(std::string(key));
    if (it == values_.end()) return std::nullopt;
    used_.insert(it->first);
    return it->second;
  }

  std::optional<std::int64_t> integer(std::string_view key) {
    const auto s = str(key);
    if (!s) return std::nullopt;
    std::int64_t v = 0;
    const int base = s->starts_with("0x") ? 16 : 10;
    const char* begin = s->data() + (base == 16 ? 2 : 0);
    const auto [p, ec] = std::from_chars(begin, s->data() + s->size(), v, base);
    if (ec != std::errc{} || p != s->data() + s->size()) throw ConfigInvalid(path(key), "expected an integer");
    return v;
  }

  std::optional<std::int64_t> integer_in(std::string_view key, std::int64_t lo, std::int64_t hi) {
    const auto v = integer(key);
    if (v && (*v < lo || *v > hi)) throw ConfigInvalid(path(key), fmt::format("must be in {}..{}", lo, hi));
    return v;
  }

  std::optional<double> number(std::string_view key) {
    const auto s = str(key);
    if (!s) return std::nullopt;
    try {
      std::size_t idx = 0;
      const double v = std::stod(*s, &idx);
      if (idx != s->size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      throw ConfigInvalid(path(key), "expected a number");
    }
  }

  std::optional<bool> boolean(std::string_view key) {
    const auto s = str(key);
    if (!s) return std::nullopt;
    if (*s == "true" || *s == "on" || *s == "yes" || *s == "1") return true;
    if (*s == "false" || *s == "off" || *s == "no" || *s == "0") return false;
    throw ConfigInvalid(path(key), "expected a boolean (true/false/on/off)");
  }

  std::optional<std::vector<std::string>> list(std::string_view key) {
    const auto s = str(key);
    if (!s) return std::nullopt;
    std::vector<std::string> out;
    std::stringstream ss(*s);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto t = trim(item);
      if (t.empty()) throw ConfigInvalid(path(key), "empty list element");
      out.emplace_back(t);
    }
    return out;
  }

  std::optional<SimTime> millis(std::string_view key, std::int64_t lo = 0) {
    const auto v = integer_in(key, lo, std::int64_t{1} << 40);
    if (!v) return std::nullopt;
    return SimTime{*v};
  }

  void finish() const {
    for (const auto& [k, v] : values_) {
      if (!used_.contains(k)) throw ConfigInvalid(path(k), "unknown key");
    }
  }

 private:
  std::string prefix_;
  std::map<std::string, std::string> values_;
  std::set<std::string> used_;
};

std::int64_t parse_list_int(const std::string& item, const std::string& path) {
  std::int64_t v = 0;
  const int base = item.starts_with("0x") ? 16 : 10;
  const char* begin = item.data() + (base == 16 ? 2 : 0);
  const auto [p, ec] = std::from_chars(begin, item.data() + item.size(), v, base);
  if (ec != std::errc{} || p != item.data() + item.size()) throw ConfigInvalid(path, "expected integers");
  return v;
}

codec::PlmnId parse_plmn(const std::string& item, const std::string& path) {
  const auto dash = item.find('-');
  if (dash == std::string::npos || dash != 3) throw ConfigInvalid(path, "PLMN must look like 001-01");
  const std::string mcc = item.substr(0, dash);
  const std::string mnc = item.substr(dash + 1);
  if (mnc.size() != 2 && mnc.size() != 3) throw ConfigInvalid(path, "MNC must have 2 or 3 digits");
  codec::PlmnId p;
  p.mcc = static_cast<std::uint16_t>(parse_list_int(mcc, path));
  p.mnc = static_cast<std::uint16_t>(parse_list_int(mnc, path));
  p.mncLength = static_cast<std::uint8_t>(mnc.size());
  return p;
}

void read_scenario_section(KeyReader& r, Scenario& s) {
  if (auto v = r.str("name")) s.name = *v;
  if (auto v = r.millis("duration_ms")) s.duration = *v;
  if (auto v = r.integer_in("seed", 0, std::numeric_limits<std::int64_t>::max())) s.seed = static_cast<std::uint64_t>(*v);
  if (auto v = r.number("pathloss_exponent")) s.pathloss.exponent = *v;
  if (auto v = r.number("pathloss_ref_db")) s.pathloss.refLossDb = *v;
  if (auto v = r.number("rsrp_floor_dbm")) s.rsrpFloorDbm = *v;
  r.finish();
}

void read_timing_section(KeyReader& r, Scenario& s) {
  if (auto v = r.number("base_quantum_us")) s.timing.baseQuantumUs = *v;
  if (auto v = r.number("cp_tolerance_units")) s.timing.cpToleranceUnits = *v;
  if (auto v = r.integer_in("numerology", 0, 4)) s.numerology = timing::Numerology::of(static_cast<unsigned>(*v));
  r.finish();
}

gnb::CellConfig read_cell_section(KeyReader& r, const std::vector<gnb::CellConfig>& earlier, std::size_t index) {
  gnb::CellConfig c;
  c.id = CellId{static_cast<std::uint32_t>(index + 1)};
  c.sib1.cellIdentity = index + 1;

  if (auto target = r.integer("clone_of")) {
    const auto it = std::find_if(earlier.begin(), earlier.end(),
                                 [&](const auto& e) { return to_underlying(e.id) == *target; });
    if (it == earlier.end()) throw ConfigInvalid(r.path("clone_of"), "no earlier cell with that id");
    const double offset = r.number("tx_power_offset_db").value_or(gnb::kDefaultRogueTxOffsetDb);
    c = gnb::harvest_cell_config(*it, c.id, offset);
  }
  if (auto v = r.integer_in("id", 0, 0xFFFFFFFF)) {
    c.id = CellId{static_cast<std::uint32_t>(*v)};
    if (!r.has("clone_of") && !r.has("cell_identity")) c.sib1.cellIdentity = static_cast<std::uint64_t>(*v);
  }
  if (auto v = r.integer_in("pci", 0, 1007)) c.pci = static_cast<std::uint16_t>(*v);
  if (auto v = r.number("tx_power_dbm")) c.txPowerDbm = *v;
  if (auto v = r.number("position_m")) c.positionM = *v;
  if (auto v = r.boolean("rogue")) c.isRogue = *v;
  if (auto v = r.millis("active_from_ms")) c.activeFrom = *v;
  if (auto v = r.millis("active_until_ms")) c.activeUntil = *v;

  auto& m = c.sib1;
  if (auto v = r.integer_in("value_tag", 0, codec::kValueTagMax)) m.valueTag = static_cast<std::uint8_t>(*v);
  if (auto v = r.integer_in("tac", 0, codec::kTacMax)) m.trackingAreaCode = static_cast<std::uint32_t>(*v);
  if (auto v = r.integer("si_window_ms")) {
    try {
      m.siWindowLength = codec::si_window_from_ms(*v);
    } catch (const InvariantViolation& e) {
      throw ConfigInvalid(r.path("si_window_ms"), e.what());
    }
  }
  if (auto v = r.list("plmn")) {
    m.plmnList.clear();
    for (const auto& item : *v) m.plmnList.push_back(parse_plmn(item, r.path("plmn")));
  }
  if (auto v = r.integer_in("cell_identity", 0, static_cast<std::int64_t>(codec::kCellIdentityMax))) {
    m.cellIdentity = static_cast<std::uint64_t>(*v);
  }
  if (auto v = r.boolean("barred")) m.cellBarred = *v;
  if (auto v = r.millis("sib1_periodicity_ms", 1)) m.sib1Periodicity = *v;
  if (auto v = r.millis("ra_response_window_ms", 1)) m.rachConfig.raResponseWindow = *v;
  if (auto v = r.millis("prach_periodicity_ms", 1)) m.rachConfig.prachPeriodicity = *v;
  if (auto v = r.integer_in("preamble_format", 0, 255)) m.rachConfig.preambleFormatId = static_cast<std::uint8_t>(*v);
  if (auto v = r.integer_in("power_ramping_step_db", 0, 255)) m.rachConfig.powerRampingStepDb = static_cast<std::uint8_t>(*v);
  if (auto v = r.integer_in("preamble_target_power_dbm", -32768, 32767)) {
    m.rachConfig.preambleTargetPowerDbm = static_cast<std::int16_t>(*v);
  }
  if (auto v = r.integer_in("msg3_freq_assign", 0, (1 << 14) - 1)) c.msg3Grant.freqAssign = static_cast<std::uint16_t>(*v);
  if (auto v = r.integer_in("msg3_time_assign", 0, 15)) c.msg3Grant.timeAssign = static_cast<std::uint8_t>(*v);
  if (auto v = r.integer_in("msg3_mcs", 0, 15)) c.msg3Grant.mcs = static_cast<std::uint8_t>(*v);
  r.str("tx_power_offset_db");  // consumed above when cloning
  r.finish();
  return c;
}

gnb::AttackProfile read_attack_section(KeyReader& r) {
  const auto kind = r.str("kind");
  if (!kind) throw ConfigInvalid(r.path("kind"), "required");
  gnb::AttackProfile a;
  if (*kind == "none") {
    a = gnb::AttackProfile::none();
  } else if (*kind == "value_tag_increment") {
    a = gnb::AttackProfile::value_tag_increment();
    if (auto v = r.millis("period_ms", 1)) a.period = *v;
  } else if (*kind == "tac_cycle") {
    const auto tacs = r.list("tac_list");
    if (!tacs) throw ConfigInvalid(r.path("tac_list"), "required for tac_cycle");
    std::vector<std::uint32_t> list;
    for (const auto& t : *tacs) {
      const auto v = parse_list_int(t, r.path("tac_list"));
      if (v < 0 || v > codec::kTacMax) throw ConfigInvalid(r.path("tac_list"), "TAC exceeds 24 bits");
      list.push_back(static_cast<std::uint32_t>(v));
    }
    a = gnb::AttackProfile::tac_cycle(std::move(list));
    if (auto v = r.millis("period_ms", 1)) a.period = *v;
  } else if (*kind == "si_window_toggle") {
    a = gnb::AttackProfile::si_window_toggle();
    if (auto seq = r.list("sequence")) {
      a.sequence.clear();
      for (const auto& item : *seq) {
        try {
          a.sequence.push_back(codec::si_window_from_ms(parse_list_int(item, r.path("sequence"))));
        } catch (const InvariantViolation& e) {
          throw ConfigInvalid(r.path("sequence"), e.what());
        }
      }
    }
  } else if (*kind == "ta_delta") {
    const auto d = r.integer("delta_units");
    if (!d) throw ConfigInvalid(r.path("delta_units"), "required for ta_delta");
    if (*d < -static_cast<std::int64_t>(timing::kTaCommandMax) || *d > timing::kTaCommandMax) {
      throw ConfigInvalid(r.path("delta_units"), "|delta_units| must not exceed 3846");
    }
    a = gnb::AttackProfile::ta_delta(static_cast<int>(*d));
  } else {
    throw ConfigInvalid(r.path("kind"), fmt::format("unknown attack kind '{}'", *kind));
  }
  r.finish();
  return a;
}

UeSpec read_ue_section(KeyReader& r, std::size_t index) {
  UeSpec u;
  u.id = UeId{static_cast<std::uint32_t>(index)};
  if (auto v = r.integer_in("id", 0, 0xFFFFFFFF)) u.id = UeId{static_cast<std::uint32_t>(*v)};
  if (auto v = r.number("position_m")) u.positionM = *v;
  if (auto v = r.str("registration_policy")) {
    if (*v == "eager") u.policy.registrationPolicy = ue::RegistrationPolicy::Eager;
    else if (*v == "deferred") u.policy.registrationPolicy = ue::RegistrationPolicy::Deferred;
    else throw ConfigInvalid(r.path("registration_policy"), "expected eager or deferred");
  }
  if (auto v = r.str("si_cache_policy")) {
    if (*v == "refresh_before_use") u.policy.siCachePolicy = ue::SiCachePolicy::RefreshBeforeUse;
    else if (*v == "stale_cache") u.policy.siCachePolicy = ue::SiCachePolicy::StaleCache;
    else throw ConfigInvalid(r.path("si_cache_policy"), "expected refresh_before_use or stale_cache");
  }
  if (auto v = r.millis("connect_at_ms")) u.connectAt = *v;
  if (auto v = r.integer_in("n310", 1, 1000)) u.n310 = static_cast<unsigned>(*v);
  if (auto v = r.integer_in("n311", 1, 1000)) u.n311 = static_cast<unsigned>(*v);
  if (auto v = r.millis("t310_ms")) u.t310 = *v;
  if (auto v = r.millis("sync_eval_ms", 1)) u.syncEval = *v;
  if (auto v = r.millis("paging_cycle_ms", 1)) u.pagingCycle = *v;
  if (auto v = r.millis("paging_wake_ms")) u.pagingWake = *v;
  if (auto v = r.millis("si_acq_active_ms")) u.siAcqActive = *v;
  if (auto v = r.millis("si_check_period_ms")) u.siCheckPeriod = *v;
  if (auto v = r.boolean("blacklist_on_rlf")) u.blacklistOnRlf = *v;
  if (auto v = r.millis("contention_timer_ms", 1)) u.rach.contentionTimer = *v;
  if (auto v = r.millis("rach_backoff_ms", 1)) u.rach.backoff = *v;
  if (auto v = r.integer_in("preamble_trans_max", 1, 200)) u.rach.preambleTransMax = static_cast<unsigned>(*v);
  if (auto v = r.millis("reconnect_delay_ms", 1)) u.reconnectDelay = *v;
  r.finish();
  return u;
}

void read_detectors_section(KeyReader& r, DetectorConfig& d) {
  if (auto v = r.boolean("ta_rsrp")) d.taRsrp = *v;
  if (auto v = r.number("ta_rsrp_tol_factor")) d.taRsrpTolFactor = *v;
  if (auto v = r.boolean("valuetag_rate")) d.valueTagRate = *v;
  if (auto v = r.millis("valuetag_window_ms", 1)) d.valueTagWindow = *v;
  if (auto v = r.integer_in("valuetag_max_updates", 0, 1000)) d.valueTagMaxUpdates = static_cast<unsigned>(*v);
  r.finish();
}

}  // namespace

Scenario parse_scenario(std::string_view text) {
  const auto sections = tokenize(text);
  Scenario s;
  bool sawDuration = false;
  std::size_t cellIndex = 0;
  std::size_t ueIndex = 0;
  std::set<std::string> singletons;

  for (const auto& sec : sections) {
    if (sec.name == "scenario" || sec.name == "timing" || sec.name == "detectors") {
      if (!singletons.insert(sec.name).second) {
        throw ConfigInvalid(sec.line, 1, fmt::format("[{}] may appear only once", sec.name));
      }
    }
    if (sec.name == "scenario") {
      KeyReader r(sec, "");
      sawDuration = r.has("duration_ms");
      read_scenario_section(r, s);
    } else if (sec.name == "timing") {
      KeyReader r(sec, "timing");
      read_timing_section(r, s);
    } else if (sec.name == "cell") {
      KeyReader r(sec, fmt::format("cells[{}]", cellIndex));
      s.cells.push_back(read_cell_section(r, s.cells, cellIndex));
      ++cellIndex;
    } else if (sec.name == "attack") {
      KeyReader r(sec, fmt::format("cells[{}].attack", cellIndex - 1));
      s.cells.back().attack = read_attack_section(r);
    } else if (sec.name == "ue") {
      KeyReader r(sec, fmt::format("ues[{}]", ueIndex));
      s.ues.push_back(read_ue_section(r, ueIndex));
      ++ueIndex;
    } else if (sec.name == "detectors") {
      KeyReader r(sec, "detectors");
      read_detectors_section(r, s.detectors);
    }
  }
  if (!sawDuration) throw ConfigInvalid("duration_ms", "required");
  validate(s);
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read scenario file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

void validate(const Scenario& s) {
  if (s.name.empty() || s.name.find_first_of(" \t=") != std::string::npos) {
    throw ConfigInvalid("name", "must be non-empty without spaces or '='");
  }
  if (s.duration.count() <= 0) throw ConfigInvalid("duration_ms", "must be > 0");
  if (s.pathloss.exponent <= 0) throw ConfigInvalid("pathloss_exponent", "must be > 0");
  if (s.timing.baseQuantumUs <= 0) throw ConfigInvalid("timing.base_quantum_us", "must be > 0");
  if (s.timing.cpToleranceUnits <= 0) throw ConfigInvalid("timing.cp_tolerance_units", "must be > 0");
  if (s.numerology.mu > 4) throw ConfigInvalid("timing.numerology", "must be 0..4");
  if (s.cells.empty()) throw ConfigInvalid("cells", "at least one [cell] is required");
  if (s.ues.empty()) throw ConfigInvalid("ues", "at least one [ue] is required");
  if (s.detectors.taRsrpTolFactor < 1.0) throw ConfigInvalid("detectors.ta_rsrp_tol_factor", "must be >= 1");

  std::set<std::uint32_t> cellIds;
  for (std::size_t i = 0; i < s.cells.size(); ++i) {
    const auto& c = s.cells[i];
    const std::string p = fmt::format("cells[{}]", i);
    if (!cellIds.insert(to_underlying(c.id)).second) throw ConfigInvalid(p + ".id", "duplicate cell id");
    if (c.positionM < 0) throw ConfigInvalid(p + ".position_m", "must be >= 0");
    if (!c.isRogue && c.attack.kind != gnb::AttackKind::None) {
      throw ConfigInvalid(p + ".attack.kind", "legitimate cells cannot carry an attack");
    }
    if (c.attack.kind == gnb::AttackKind::TaDelta &&
        std::abs(c.attack.deltaUnits) > static_cast<int>(timing::kTaCommandMax)) {
      throw ConfigInvalid(p + ".attack.delta_units", "|delta_units| must not exceed 3846");
    }
    try {
      gnb::validate(c);
    } catch (const InvariantViolation& e) {
      throw ConfigInvalid(p, e.what());
    }
  }
  std::set<std::uint32_t> ueIds;
  for (std::size_t i = 0; i < s.ues.size(); ++i) {
    const auto& u = s.ues[i];
    const std::string p = fmt::format("ues[{}]", i);
    if (!ueIds.insert(to_underlying(u.id)).second) throw ConfigInvalid(p + ".id", "duplicate ue id");
    if (u.positionM < 0) throw ConfigInvalid(p + ".position_m", "must be >= 0");
    if (u.pagingCycle.count() <= 0) throw ConfigInvalid(p + ".paging_cycle_ms", "must be > 0");
    if (u.syncEval.count() <= 0) throw ConfigInvalid(p + ".sync_eval_ms", "must be > 0");
  }
}

}  // namespace nrsim
