#include "nrsim/engine.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <queue>

#include <fmt/format.h>

#include "nrsim/codec.hpp"
#include "nrsim/detectors.hpp"
#include "nrsim/errors.hpp"
#include "nrsim/gnb.hpp"
#include "nrsim/radio.hpp"

namespace nrsim {

namespace {

struct Scheduled {
  SimTime time;
  std::uint64_t seq;
  std::function<void()> fn;
};

struct Later {
  bool operator()(const Scheduled& a, const Scheduled& b) const {
    return a.time != b.time ? a.time > b.time : a.seq > b.seq;
  }
};

struct UeSlot {
  ue::UeContext ctx;
  UeSpec spec;
  bool wantsAccess = false;  // access requested, waiting for SI
  bool wantsReestablish = false;
  std::uint64_t accessSerial = 0;
  std::uint64_t connSerial = 0;
  std::map<CellId, detect::ValueTagRateMonitor> tagMonitors;
};

std::string num(double v, int decimals = 3) { return fmt::format("{:.{}f}", v, decimals); }
std::string str(std::uint64_t v) { return std::to_string(v); }
std::string str(CellId c) { return std::to_string(to_underlying(c)); }
std::string str(UeId u) { return std::to_string(to_underlying(u)); }

class Engine {
 public:
  explicit Engine(const Scenario& s) : s_(s), tol_(timing::default_tolerance(s.numerology, s.timing)) {
    for (const auto& c : s.cells) {
      cellIndex_[c.id] = cells_.size();
      cells_.push_back(gnb::CellRuntime{c});
      currentSib1_.push_back(gnb::next_sib1(c, SimTime{0}));
      txPower_[c.id] = c.txPowerDbm;
    }
    for (std::size_t i = 0; i < s.ues.size(); ++i) {
      const auto& spec = s.ues[i];
      // Per-UE stream derived from the scenario seed and UE id.
      std::seed_seq seq{static_cast<std::uint32_t>(s.seed), static_cast<std::uint32_t>(s.seed >> 32),
                        to_underlying(spec.id)};
      std::array<std::uint64_t, 1> derived{};
      seq.generate(derived.begin(), derived.end());
      UeSlot slot{ue::make_ue(spec.id, spec.positionM, derived[0]), spec};
      auto& ctx = slot.ctx;
      ctx.policy = spec.policy;
      ctx.sync.n310Threshold = spec.n310;
      ctx.sync.n311Threshold = spec.n311;
      ctx.sync.t310Duration = spec.t310;
      ctx.sync.syncEvalPeriod = spec.syncEval;
      ctx.power.pagingCycleMs = spec.pagingCycle;
      ctx.power.pagingWakeMs = spec.pagingWake;
      ctx.power.siAcqActiveMs = spec.siAcqActive;
      ctx.rachTimers = spec.rach;
      ctx.blacklistOnRlf = spec.blacklistOnRlf;
      ctx.rsrpFloorDbm = s.rsrpFloorDbm;
      ctx.baseQuantumUs = s.timing.baseQuantumUs;
      ctx.taState.numerology = s.numerology;
      ues_.push_back(std::move(slot));
    }

    log_.header.scenario = s.name;
    log_.header.seed = s.seed;
    log_.header.duration = s.duration;
    for (const auto& u : s.ues) {
      log_.header.ues.push_back(UeLogInfo{u.id, u.pagingCycle, u.pagingWake, u.siAcqActive});
    }
  }

  RunResult run() {
    for (std::size_t i = 0; i < ues_.size(); ++i) at(SimTime{0}, [this, i] { power_on(i); });
    for (std::size_t c = 0; c < cells_.size(); ++c) {
      const auto& cfg = cells_[c].config;
      at(SimTime{0}, [this, c] { broadcast(c, SimTime{0}); });
      if (cfg.activeFrom.count() > 0) at(cfg.activeFrom, [this] { reselect_idle(); });
      if (cfg.activeUntil) at(*cfg.activeUntil, [this] { reselect_idle(); });
    }
    for (std::size_t i = 0; i < ues_.size(); ++i) {
      const auto& spec = ues_[i].spec;
      if (spec.connectAt) at(*spec.connectAt, [this, i] { request_access(i, false); });
      if (spec.siCheckPeriod.count() > 0) at(spec.siCheckPeriod, [this, i] { si_check(i); });
    }

    while (!queue_.empty()) {
      Scheduled next = queue_.top();
      if (next.time >= s_.duration) break;
      queue_.pop();
      now_ = next.time;
      next.fn();
    }

    RunResult out;
    for (auto& slot : ues_) {
      ue::account_power(slot.ctx, s_.duration);
      out.ues.push_back(std::move(slot.ctx));
    }
    out.metrics = compute_metrics(log_);
    out.log = std::move(log_);
    return out;
  }

 private:
  void at(SimTime t, std::function<void()> fn) {
    if (t < now_) throw InvariantViolation("event scheduled in the past");
    queue_.push(Scheduled{t, seq_++, std::move(fn)});
  }

  void emit(EventKind kind, std::string subject, Payload payload) {
    log_.events.push_back(SimEvent{now_, kind, std::move(subject), std::move(payload)});
  }

  gnb::CellRuntime& cell(CellId id) { return cells_.at(cellIndex_.at(id)); }

  double distance(const ue::UeContext& ctx, const gnb::CellConfig& c) const {
    return std::abs(ctx.positionM - c.positionM);
  }

  double rsrp(const ue::UeContext& ctx, const gnb::CellConfig& c) const {
    return radio::rsrp_dbm(c.txPowerDbm, distance(ctx, c), s_.pathloss);
  }

  ue::Measurements measure(const ue::UeContext& ctx) const {
    ue::Measurements m;
    for (const auto& c : cells_) {
      if (c.config.active_at(now_) && !c.config.sib1.cellBarred) m[c.config.id] = rsrp(ctx, c.config);
    }
    return m;
  }

  bool idle_listener(const UeSlot& slot) const {
    return slot.ctx.rrcState != ue::RrcState::Connected && !slot.ctx.in_access();
  }

  void camp(UeSlot& slot) {
    auto& ctx = slot.ctx;
    const auto m = measure(ctx);
    std::optional<CellId> chosen;
    if (!m.empty()) {
      try {
        chosen = ue::select_cell(m, ctx.rsrpFloorDbm);
      } catch (const NoCellAvailable&) {
      }
    }
    if (chosen != ctx.servingCell) {
      ue::accrue_power(ctx, now_);
      ctx.servingCell = chosen;
      ctx.cachedSi.reset();
    }
  }

  void power_on(std::size_t i) { camp(ues_[i]); }

  void reselect_idle() {
    for (auto& slot : ues_) {
      if (idle_listener(slot)) camp(slot);
    }
  }

  void broadcast(std::size_t c, SimTime t) {
    auto& runtime = cells_[c];
    const auto& cfg = runtime.config;
    const auto period = cfg.sib1.sib1Periodicity;
    at(t + period, [this, c, t, period] { broadcast(c, t + period); });
    if (!cfg.active_at(now_)) return;

    const auto sib1 = gnb::next_sib1(cfg, now_);
    currentSib1_[c] = sib1;
    const auto bytes = codec::encode_sib1(sib1);
    emit(EventKind::Broadcast, subject_of(cfg.id),
         {{"value_tag", str(sib1.valueTag)},
          {"tac", str(sib1.trackingAreaCode)},
          {"si_window_ms", str(codec::to_duration(sib1.siWindowLength).count())}});

    for (std::size_t i = 0; i < ues_.size(); ++i) {
      auto& slot = ues_[i];
      if (!idle_listener(slot) || slot.ctx.servingCell != cfg.id) continue;
      deliver_sib1(i, codec::decode_sib1(bytes), bytes);
    }
  }

  void deliver_sib1(std::size_t i, const codec::Sib1Message& sib1, const Bytes& bytes) {
    auto& slot = ues_[i];
    auto& ctx = slot.ctx;
    const CellId cellId = *ctx.servingCell;
    const auto actions = ue::handle_sib1(ctx, sib1, now_);
    const std::string me = subject_of(ctx.id);
    bool acquired = false;
    for (const auto& a : actions) {
      switch (a.kind) {
        case ue::ActionKind::InitialSiAcquired:
          acquired = true;
          break;
        case ue::ActionKind::SiReacquisition:
          emit(EventKind::SiReacquisition, me,
               {{"cell", str(cellId)}, {"from", str(a.from)}, {"to", str(a.to)}, {"sib1", codec::to_hex(bytes)}});
          break;
        case ue::ActionKind::TacMismatchObserved:
          emit(EventKind::TacMismatchObserved, me, {{"cell", str(cellId)}, {"from", str(a.from)}, {"to", str(a.to)}});
          break;
        case ue::ActionKind::RegistrationRequest:
          emit(EventKind::RegistrationRequest, me, {{"cell", str(cellId)}, {"tac", str(a.to)}});
          break;
        default:
          break;
      }
    }

    if (s_.detectors.valueTagRate) {
      auto [it, inserted] = slot.tagMonitors.try_emplace(
          cellId, s_.detectors.valueTagWindow, s_.detectors.valueTagMaxUpdates);
      if (const auto verdict = it->second.observe(now_, sib1.valueTag)) {
        emit(EventKind::DetectorAlert, me,
             {{"detector", "valuetag_rate"}, {"score", num(verdict->score)}, {"reason", verdict->reason},
              {"cell", str(cellId)}});
      }
    }

    if (acquired && slot.wantsAccess) start_access(i);
  }

  void si_check(std::size_t i) {
    auto& slot = ues_[i];
    at(now_ + slot.spec.siCheckPeriod, [this, i] { si_check(i); });
    auto& ctx = slot.ctx;
    if (!idle_listener(slot) || !ctx.servingCell || !ctx.cachedSi) return;
    const auto c = cellIndex_.at(*ctx.servingCell);
    if (!cells_[c].config.active_at(now_)) return;
    if (const auto missed = ue::check_si_schedule(ctx, currentSib1_[c], now_)) {
      emit(EventKind::MissedSi, subject_of(ctx.id),
           {{"cell", str(*ctx.servingCell)},
            {"expected_window_ms", str(missed->from)},
            {"actual_window_ms", str(missed->to)}});
    }
  }

  void request_access(std::size_t i, bool reestablishment) {
    auto& slot = ues_[i];
    if (slot.ctx.rrcState == ue::RrcState::Connected || slot.ctx.in_access()) return;
    slot.wantsAccess = true;
    slot.wantsReestablish = reestablishment;
    if (!slot.ctx.servingCell) camp(slot);
    if (slot.ctx.servingCell && slot.ctx.cachedSi) start_access(i);
  }

  void start_access(std::size_t i) {
    auto& slot = ues_[i];
    auto& ctx = slot.ctx;
    slot.wantsAccess = false;
    const codec::RachOccasion occ{static_cast<std::uint32_t>(now_.count() % 10), 0,
                                  static_cast<std::uint32_t>((now_.count() / 10) % 1024)};
    const Msg1 msg1 = ue::rach_initiate(ctx, occ, now_, slot.wantsReestablish);
    const std::uint64_t serial = ++slot.accessSerial;
    const CellId cellId = *ctx.servingCell;
    emit(EventKind::RachAttempt, subject_of(ctx.id),
         {{"cell", str(cellId)},
          {"attempt", str(ctx.rach.attempt)},
          {"preamble", str(msg1.preambleIndex)},
          {"power_dbm", num(msg1.txPowerDbm, 1)},
          {"cause", ctx.rach.reestablishment ? "reestablishment" : "setup"}});

    auto& runtime = cell(cellId);
    if (runtime.config.active_at(now_)) {
      const auto oneWay = radio::propagation_delay(distance(ctx, runtime.config));
      const auto rar = gnb::handle_prach(runtime, msg1, 2.0 * oneWay, s_.numerology, s_.timing.baseQuantumUs);
      emit(EventKind::PrachDetected, subject_of(cellId), {{"ue", str(ctx.id)}, {"preamble", str(msg1.preambleIndex)}});
      emit(EventKind::RarSent, subject_of(cellId),
           {{"ue", str(ctx.id)},
            {"ra_rnti", str(rar.raRnti)},
            {"rapid", str(rar.pdu.rapid)},
            {"ta", str(rar.pdu.taCommand)},
            {"tc_rnti", str(rar.pdu.tcRnti)}});
      const auto bytes = codec::encode_rar(rar.pdu);
      at(now_ + kRarDelay, [this, i, serial, cellId, bytes] { deliver_rar(i, serial, cellId, bytes); });
    }
    at(ctx.rach.windowEnd, [this, i, serial] {
      auto& sl = ues_[i];
      if (sl.accessSerial != serial) return;
      handle_retry(i, ue::on_rar_window_expiry(sl.ctx, now_), "rar_window");
    });
  }

  void deliver_rar(std::size_t i, std::uint64_t serial, CellId cellId, const Bytes& bytes) {
    auto& slot = ues_[i];
    if (slot.accessSerial != serial) return;
    auto& ctx = slot.ctx;
    const auto rar = codec::decode_rar(bytes);
    const auto msg3 = ue::handle_rar(ctx, rar, now_);
    if (!msg3) return;
    const std::string me = subject_of(ctx.id);

    if (s_.detectors.taRsrp) {
      const detect::TaRsrpSample sample{rar.taCommand, rsrp(ctx, cell(cellId).config), cellId, now_};
      const detect::TaRsrpParams params{s_.pathloss, s_.numerology, s_.timing.baseQuantumUs,
                                        s_.detectors.taRsrpTolFactor};
      const auto verdict = detect::ta_rsrp_check(sample, txPower_, params);
      if (verdict.flagged) {
        emit(EventKind::DetectorAlert, me,
             {{"detector", "ta_rsrp"}, {"score", num(verdict.score)}, {"reason", verdict.reason}, {"cell", str(cellId)}});
      }
    }

    emit(EventKind::Msg3Sent, me,
         {{"cell", str(cellId)},
          {"ta", str(rar.taCommand)},
          {"tc_rnti", str(msg3->tcRnti)},
          {"kind", msg3->kind == Msg3Kind::ReestablishmentRequest ? "reestablishment" : "setup"}});

    const Msg3 m3 = *msg3;
    at(m3.txTime, [this, i, serial, cellId, m3] { receive_msg3(i, serial, cellId, m3); });
    at(ctx.rach.contentionDeadline, [this, i, serial] {
      auto& sl = ues_[i];
      if (sl.accessSerial != serial) return;
      handle_retry(i, ue::on_contention_timer_expiry(sl.ctx, now_), "contention_timer");
    });
  }

  void receive_msg3(std::size_t i, std::uint64_t serial, CellId cellId, const Msg3& msg3) {
    auto& slot = ues_[i];
    if (slot.accessSerial != serial) return;
    const auto& cfg = cell(cellId).config;
    if (!cfg.active_at(now_)) return;
    const bool ok = uplink(slot.ctx, cfg, "msg3");
    if (const auto msg4 = gnb::resolve_contention(cfg, msg3, ok)) {
      const Msg4 m4 = *msg4;
      at(now_ + kMsg4Delay, [this, i, serial, cellId, m4] { deliver_msg4(i, serial, cellId, m4); });
    }
  }

  // Emits UL_DECODE for the UE's current TA against its true delay.
  bool uplink(const ue::UeContext& ctx, const gnb::CellConfig& cfg, std::string_view channel) {
    const auto offset = timing::uplink_arrival_offset(ctx.taState, radio::propagation_delay(distance(ctx, cfg)));
    const bool ok = cfg.active_at(now_) && gnb::ul_receive(cfg, offset, tol_);
    emit(EventKind::UlDecode, subject_of(cfg.id),
         {{"ue", str(ctx.id)}, {"channel", std::string(channel)}, {"offset_us", num(offset.count())}, {"ok", ok ? "1" : "0"}});
    return ok;
  }

  void deliver_msg4(std::size_t i, std::uint64_t serial, CellId cellId, const Msg4& msg4) {
    auto& slot = ues_[i];
    if (slot.accessSerial != serial) return;
    auto& ctx = slot.ctx;
    if (ctx.rach.phase != ue::AccessPhase::AwaitingMsg4) return;
    const bool reest = ctx.rach.reestablishment;
    try {
      ue::handle_contention_resolution(ctx, msg4, now_);
    } catch (const ContentionLost&) {
      handle_retry(i, ctx.in_access() ? ue::RetryDecision::Retry : ue::RetryDecision::GiveUp, "contention_lost");
      return;
    }
    ++slot.accessSerial;
    const std::uint64_t conn = ++slot.connSerial;
    emit(EventKind::ConnectionEstablished, subject_of(ctx.id),
         {{"cell", str(cellId)}, {"c_rnti", str(*ctx.cRnti)}, {"cause", reest ? "reestablishment" : "setup"}});
    at(now_ + ctx.sync.syncEvalPeriod, [this, i, conn] { sync_eval(i, conn); });
  }

  void handle_retry(std::size_t i, ue::RetryDecision d, std::string_view reason) {
    if (d == ue::RetryDecision::NotApplicable) return;
    auto& slot = ues_[i];
    auto& ctx = slot.ctx;
    const bool give_up = d == ue::RetryDecision::GiveUp;
    emit(EventKind::RachFailure, subject_of(ctx.id),
         {{"cell", ctx.servingCell ? str(*ctx.servingCell) : std::string("none")},
          {"reason", std::string(reason)},
          {"attempt", str(give_up ? ctx.rachTimers.preambleTransMax : ctx.rach.attempt)},
          {"final", give_up ? "1" : "0"}});
    const std::uint64_t serial = ++slot.accessSerial;
    if (give_up) {
      const bool reest = slot.wantsReestablish;
      at(now_ + slot.spec.reconnectDelay, [this, i, reest] { request_access(i, reest); });
      return;
    }
    at(now_ + ctx.rachTimers.backoff, [this, i, serial] {
      auto& sl = ues_[i];
      if (sl.accessSerial != serial || sl.ctx.rach.phase != ue::AccessPhase::Backoff) return;
      start_access(i);
    });
  }

  void sync_eval(std::size_t i, std::uint64_t conn) {
    auto& slot = ues_[i];
    if (slot.connSerial != conn) return;
    auto& ctx = slot.ctx;
    if (ctx.rrcState != ue::RrcState::Connected) return;
    at(now_ + ctx.sync.syncEvalPeriod, [this, i, conn] { sync_eval(i, conn); });

    const CellId cellId = *ctx.servingCell;
    const bool ok = uplink(ctx, cell(cellId).config, "pusch");
    const std::string me = subject_of(ctx.id);
    for (const auto& a : ue::on_sync_indication(ctx, ok, now_)) {
      if (a.kind == ue::ActionKind::T310Started) {
        emit(EventKind::T310Started, me, {{"cell", str(cellId)}, {"n310", str(a.from)}, {"expires_ms", str(a.to)}});
        at(*ctx.sync.t310Deadline, [this, i, conn] { t310_expiry(i, conn); });
      } else if (a.kind == ue::ActionKind::T310Stopped) {
        emit(EventKind::T310Stopped, me, {{"cell", str(cellId)}});
      }
    }
  }

  void t310_expiry(std::size_t i, std::uint64_t conn) {
    auto& slot = ues_[i];
    if (slot.connSerial != conn) return;
    auto& ctx = slot.ctx;
    const auto actions = ue::on_t310_expiry(ctx, now_, measure(ctx));
    if (actions.empty()) return;  // T310 was stopped and restarted since
    ++slot.connSerial;
    const std::string me = subject_of(ctx.id);
    for (const auto& a : actions) {
      if (a.kind == ue::ActionKind::RadioLinkFailure) {
        emit(EventKind::Rlf, me, {{"cell", a.cell ? str(*a.cell) : std::string("none")}});
      } else if (a.kind == ue::ActionKind::ReestablishRequest) {
        emit(EventKind::ReestablishReq, me, {{"cell", str(*a.cell)}});
        request_access(i, true);
      }
    }
  }

  static constexpr SimTime kRarDelay{4};
  static constexpr SimTime kMsg4Delay{4};

  const Scenario& s_;
  timing::CpTolerance tol_;
  std::vector<gnb::CellRuntime> cells_;
  std::vector<codec::Sib1Message> currentSib1_;
  std::map<CellId, std::size_t> cellIndex_;
  std::map<CellId, double> txPower_;
  std::vector<UeSlot> ues_;
  EventLog log_;
  SimTime now_{0};
  std::uint64_t seq_ = 0;
  std::priority_queue<Scheduled, std::vector<Scheduled>, Later> queue_;
};

}  // namespace

RunResult run_scenario(const Scenario& scenario) {
  validate(scenario);
  return Engine(scenario).run();
}

}  // namespace nrsim
