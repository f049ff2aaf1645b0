#include "nrsim/ue.hpp"

#include <algorithm>
#include <limits>

#include "nrsim/errors.hpp"

namespace nrsim::ue {

namespace {

// Shared failure path for RAR-window and contention-timer expiry.
RetryDecision fail_attempt(UeContext& ctx) {
  if (ctx.rach.attempt >= ctx.rachTimers.preambleTransMax) {
    ctx.rach = RachProcedure{};
    ctx.rrcState = RrcState::Idle;
    return RetryDecision::GiveUp;
  }
  ctx.rach.phase = AccessPhase::Backoff;
  return RetryDecision::Retry;
}

}  // namespace

CachedSi cache_from(const codec::Sib1Message& sib1, SimTime now) {
  return CachedSi{sib1.valueTag, sib1.trackingAreaCode, sib1.siWindowLength, sib1.rachConfig, now};
}

UeContext make_ue(UeId id, double positionM, std::uint64_t seed) {
  UeContext ctx;
  ctx.id = id;
  ctx.positionM = positionM;
  ctx.rng.seed(seed);
  // 48-bit identity carried in Msg3 and echoed by Msg4.
  ctx.contentionIdentity = ctx.rng() & ((std::uint64_t{1} << 48) - 1);
  return ctx;
}

CellId select_cell(const Measurements& measurements, double floorDbm) {
  if (measurements.empty()) throw PreconditionViolated("select_cell: no measurements");
  std::optional<std::pair<CellId, double>> best;
  // std::map iterates in ascending id order, so strict > keeps the lowest id on ties.
  for (const auto& [cell, rsrp] : measurements) {
    if (rsrp < floorDbm) continue;
    if (!best || rsrp > best->second) best = {cell, rsrp};
  }
  if (!best) throw NoCellAvailable("no cell above the RSRP floor");
  return best->first;
}

Actions handle_sib1(UeContext& ctx, const codec::Sib1Message& sib1, SimTime now) {
  if (!ctx.camped()) throw NotCamped("SIB1 received while not camped on any cell");
  if (ctx.rrcState == RrcState::Connected) {
    throw PreconditionViolated("SIB1 monitoring is an idle/inactive procedure");
  }
  accrue_power(ctx, now);

  if (!ctx.cachedSi) {
    ctx.cachedSi = cache_from(sib1, now);
    return {Action{ActionKind::InitialSiAcquired}};
  }

  Actions actions;
  CachedSi& cached = *ctx.cachedSi;
  // Any difference counts, so 31 -> 0 is a change like any other.
  if (cached.valueTag != sib1.valueTag) {
    actions.push_back({ActionKind::SiReacquisition, cached.valueTag, sib1.valueTag});
    const auto oldTac = cached.trackingAreaCode;
    cached = cache_from(sib1, now);
    cached.trackingAreaCode = oldTac;  // TAC comparison below still sees the old value
    ctx.power.activeRxMs += ctx.power.siAcqActiveMs;
  }
  if (cached.trackingAreaCode != sib1.trackingAreaCode) {
    actions.push_back({ActionKind::TacMismatchObserved, cached.trackingAreaCode, sib1.trackingAreaCode});
    if (ctx.policy.registrationPolicy == RegistrationPolicy::Eager) {
      actions.push_back({ActionKind::RegistrationRequest, cached.trackingAreaCode, sib1.trackingAreaCode});
    }
    cached.trackingAreaCode = sib1.trackingAreaCode;
  }
  if (ctx.policy.siCachePolicy == SiCachePolicy::RefreshBeforeUse) {
    cached.siWindowLength = sib1.siWindowLength;
    cached.rachConfig = sib1.rachConfig;
  }
  return actions;
}

std::vector<SiWindow> compute_si_monitoring_occasions(const CachedSi& si, SimTime periodStart,
                                                      unsigned count) {
  if (count == 0) throw PreconditionViolated("count must be >= 1");
  const SimTime w = codec::to_duration(si.siWindowLength);
  std::vector<SiWindow> out;
  out.reserve(count);
  for (unsigned k = 0; k < count; ++k) {
    out.push_back({periodStart + k * w, periodStart + (k + 1) * w});
  }
  return out;
}

std::optional<Action> check_si_schedule(UeContext& ctx, const codec::Sib1Message& currentSib1,
                                        SimTime periodStart, unsigned siIndex) {
  if (!ctx.cachedSi) throw NotCamped("SI schedule check without cached SI");
  if (ctx.policy.siCachePolicy == SiCachePolicy::RefreshBeforeUse) {
    ctx.cachedSi->siWindowLength = currentSib1.siWindowLength;
  }
  CachedSi actual = *ctx.cachedSi;
  actual.siWindowLength = currentSib1.siWindowLength;

  const auto expected = compute_si_monitoring_occasions(*ctx.cachedSi, periodStart, siIndex + 1);
  const auto truth = compute_si_monitoring_occasions(actual, periodStart, siIndex + 1);
  if (expected[siIndex] == truth[siIndex]) return std::nullopt;
  return Action{ActionKind::MissedSi,
                static_cast<std::uint64_t>(codec::to_duration(ctx.cachedSi->siWindowLength).count()),
                static_cast<std::uint64_t>(codec::to_duration(currentSib1.siWindowLength).count())};
}

Msg1 rach_initiate(UeContext& ctx, const codec::RachOccasion& occ, SimTime now, bool reestablishment) {
  if (!ctx.camped() || !ctx.cachedSi) throw NotCamped("RACH requires a camped cell with SI");
  if (ctx.rach.phase == AccessPhase::AwaitingRar || ctx.rach.phase == AccessPhase::AwaitingMsg4) {
    throw PreconditionViolated("RACH already in progress");
  }
  accrue_power(ctx, now);

  if (ctx.rach.phase == AccessPhase::None) {
    ctx.rach = RachProcedure{};
    ctx.rach.reestablishment = reestablishment;
  }
  ctx.rach.attempt += 1;
  ctx.rach.phase = AccessPhase::AwaitingRar;
  ctx.rach.preambleIndex = static_cast<std::uint8_t>(ctx.rng() % 64);
  ctx.rach.occasion = occ;
  ctx.rach.windowEnd = now + ctx.cachedSi->rachConfig.raResponseWindow;

  const auto& rc = ctx.cachedSi->rachConfig;
  const double power = rc.preambleTargetPowerDbm +
                       static_cast<double>(rc.powerRampingStepDb) * (ctx.rach.attempt - 1);
  return Msg1{ctx.rach.preambleIndex, occ, power};
}

std::optional<Msg3> handle_rar(UeContext& ctx, const codec::RarPdu& rar, SimTime now) {
  if (ctx.rach.phase != AccessPhase::AwaitingRar || now > ctx.rach.windowEnd) return std::nullopt;
  if (rar.rapid != ctx.rach.preambleIndex) return std::nullopt;

  ctx.taState = timing::apply_rar_ta(ctx.taState, rar.taCommand, ctx.baseQuantumUs);
  ctx.rach.tcRnti = rar.tcRnti;
  ctx.rach.phase = AccessPhase::AwaitingMsg4;

  Msg3 msg3;
  msg3.contentionIdentity = ctx.contentionIdentity;
  msg3.tcRnti = rar.tcRnti;
  msg3.kind = ctx.rach.reestablishment ? Msg3Kind::ReestablishmentRequest : Msg3Kind::SetupRequest;
  msg3.txTime = now + SimTime{1 + rar.msg3Grant.timeAssign};
  ctx.rach.contentionDeadline = msg3.txTime + ctx.rachTimers.contentionTimer;
  return msg3;
}

RetryDecision on_rar_window_expiry(UeContext& ctx, SimTime now) {
  if (ctx.rach.phase != AccessPhase::AwaitingRar || now < ctx.rach.windowEnd) {
    return RetryDecision::NotApplicable;
  }
  accrue_power(ctx, now);
  return fail_attempt(ctx);
}

RetryDecision on_contention_timer_expiry(UeContext& ctx, SimTime now) {
  if (ctx.rach.phase != AccessPhase::AwaitingMsg4 || now < ctx.rach.contentionDeadline) {
    return RetryDecision::NotApplicable;
  }
  accrue_power(ctx, now);
  return fail_attempt(ctx);
}

void handle_contention_resolution(UeContext& ctx, const Msg4& msg4, SimTime now) {
  if (ctx.rach.phase != AccessPhase::AwaitingMsg4) {
    throw PreconditionViolated("Msg4 outside contention resolution");
  }
  accrue_power(ctx, now);
  if (msg4.contentionIdentity != ctx.contentionIdentity) {
    fail_attempt(ctx);
    throw ContentionLost("Msg4 carries another UE's contention identity");
  }
  ctx.rrcState = RrcState::Connected;
  ctx.cRnti = ctx.rach.tcRnti;
  ctx.rach = RachProcedure{};
  const auto thresholds = ctx.sync;
  ctx.sync = SyncMonitor{};
  ctx.sync.n310Threshold = thresholds.n310Threshold;
  ctx.sync.n311Threshold = thresholds.n311Threshold;
  ctx.sync.t310Duration = thresholds.t310Duration;
  ctx.sync.syncEvalPeriod = thresholds.syncEvalPeriod;
}

Actions on_sync_indication(UeContext& ctx, bool inSync, SimTime now) {
  if (ctx.rrcState != RrcState::Connected) throw PreconditionViolated("sync indication while not connected");
  auto& s = ctx.sync;
  Actions actions;
  if (!inSync) {
    s.n311Count = 0;
    if (!s.t310_running()) {
      s.n310Count += 1;
      if (s.n310Count >= s.n310Threshold) {
        s.t310Deadline = now + s.t310Duration;
        actions.push_back({ActionKind::T310Started, s.n310Count, static_cast<std::uint64_t>(s.t310Deadline->count())});
      }
    }
    return actions;
  }
  if (s.t310_running()) {
    s.n311Count += 1;
    if (s.n311Count >= s.n311Threshold) {
      s.t310Deadline.reset();
      s.n310Count = 0;
      s.n311Count = 0;
      actions.push_back({ActionKind::T310Stopped});
    }
  } else {
    s.n310Count = 0;
  }
  return actions;
}

Actions on_t310_expiry(UeContext& ctx, SimTime now, const Measurements& measurements) {
  if (ctx.rrcState != RrcState::Connected || !ctx.sync.t310Deadline || now < *ctx.sync.t310Deadline) {
    return {};
  }
  accrue_power(ctx, now);
  Actions actions{{ActionKind::RadioLinkFailure, 0, 0, ctx.servingCell}};

  ctx.rrcState = RrcState::Idle;
  ctx.cRnti.reset();
  ctx.sync.t310Deadline.reset();
  ctx.sync.n310Count = 0;
  ctx.sync.n311Count = 0;
  if (ctx.blacklistOnRlf && ctx.servingCell) ctx.excludedCells.insert(*ctx.servingCell);

  Measurements candidates;
  for (const auto& [cell, rsrp] : measurements) {
    if (!ctx.excludedCells.contains(cell)) candidates.emplace(cell, rsrp);
  }
  try {
    if (candidates.empty()) throw NoCellAvailable("no candidate cells");
    const CellId chosen = select_cell(candidates, ctx.rsrpFloorDbm);
    if (ctx.servingCell != chosen) ctx.cachedSi.reset();
    ctx.servingCell = chosen;
    actions.push_back({ActionKind::ReestablishRequest, 0, 0, chosen});
  } catch (const NoCellAvailable&) {
    ctx.servingCell.reset();
    ctx.cachedSi.reset();
    actions.push_back({ActionKind::NoCellAvailable});
  }
  return actions;
}

std::int64_t paging_occasions_between(SimTime from, SimTime to, SimTime cycle) {
  if (to <= from) return 0;
  auto ceil_div = [](std::int64_t a, std::int64_t b) { return (a + b - 1) / b; };
  return ceil_div(to.count(), cycle.count()) - ceil_div(from.count(), cycle.count());
}

void accrue_power(UeContext& ctx, SimTime now) {
  if (now <= ctx.accountedUntil) return;
  auto& p = ctx.power;
  if (ctx.receiver_active()) {
    p.activeRxMs += now - ctx.accountedUntil;
  } else {
    p.activeRxMs += p.pagingWakeMs * paging_occasions_between(ctx.accountedUntil, now, p.pagingCycleMs);
  }
  p.totalMs += now - ctx.accountedUntil;
  ctx.accountedUntil = now;
}

double account_power(UeContext& ctx, SimTime now) {
  accrue_power(ctx, now);
  if (ctx.power.totalMs.count() <= 0) throw PreconditionViolated("no elapsed time to account");
  const auto active = std::min(ctx.power.activeRxMs, ctx.power.totalMs);
  return static_cast<double>(active.count()) / static_cast<double>(ctx.power.totalMs.count());
}

}  // namespace nrsim::ue
