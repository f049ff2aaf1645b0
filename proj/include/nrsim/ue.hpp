#pragma once

// Victim UE: cell selection, SI monitoring, RACH, TA application,
// out-of-sync/T310/RLF handling, re-establishment, and receiver-activity
// accounting. Every operation mutates a UeContext in place; the event loop
// owns scheduling and turns returned actions into log events.

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <vector>

#include "nrsim/codec.hpp"
#include "nrsim/messages.hpp"
#include "nrsim/timing.hpp"
#include "nrsim/types.hpp"

namespace nrsim::ue {

enum class RrcState { Idle, Inactive, Connected };

struct CachedSi {
  std::uint8_t valueTag = 0;
  std::uint32_t trackingAreaCode = 0;
  codec::SiWindowLength siWindowLength = codec::SiWindowLength::MS10;
  codec::RachConfigCommon rachConfig;
  SimTime acquiredAt{0};
};

CachedSi cache_from(const codec::Sib1Message& sib1, SimTime now);

struct SyncMonitor {
  unsigned n310Count = 0;
  unsigned n311Count = 0;
  std::optional<SimTime> t310Deadline;
  unsigned n310Threshold = 10;
  unsigned n311Threshold = 1;
  SimTime t310Duration{30000};
  SimTime syncEvalPeriod{1000};

  bool t310_running() const noexcept { return t310Deadline.has_value(); }
};

struct PowerAccumulator {
  SimTime activeRxMs{0};
  SimTime totalMs{0};
  SimTime pagingCycleMs{1280};
  SimTime pagingWakeMs{4};
  SimTime siAcqActiveMs{320};
};

enum class RegistrationPolicy { Eager, Deferred };
enum class SiCachePolicy { RefreshBeforeUse, StaleCache };

struct UePolicy {
  RegistrationPolicy registrationPolicy = RegistrationPolicy::Deferred;
  SiCachePolicy siCachePolicy = SiCachePolicy::RefreshBeforeUse;
};

enum class AccessPhase { None, AwaitingRar, AwaitingMsg4, Backoff };

struct RachProcedure {
  AccessPhase phase = AccessPhase::None;
  bool reestablishment = false;
  std::uint8_t preambleIndex = 0;
  codec::RachOccasion occasion;
  SimTime windowEnd{0};
  SimTime contentionDeadline{0};
  unsigned attempt = 0;
  std::uint16_t tcRnti = 0;
};

struct RachTimers {
  SimTime contentionTimer{64};
  SimTime backoff{20};
  unsigned preambleTransMax = 10;
};

struct UeContext {
  UeId id{};
  RrcState rrcState = RrcState::Idle;
  std::optional<CellId> servingCell;
  std::optional<CachedSi> cachedSi;
  timing::TaState taState;
  SyncMonitor sync;
  UePolicy policy;
  PowerAccumulator power;
  double positionM = 0.0;

  RachProcedure rach;
  RachTimers rachTimers;
  std::optional<std::uint16_t> cRnti;
  std::uint64_t contentionIdentity = 0;
  std::set<CellId> excludedCells;
  bool blacklistOnRlf = false;
  double rsrpFloorDbm = -120.0;
  double baseQuantumUs = timing::kDefaultBaseQuantumUs;
  std::mt19937_64 rng;
  // Power bookkeeping cursor; see accrue_power.
  SimTime accountedUntil{0};

  bool in_access() const noexcept { return rach.phase != AccessPhase::None; }
  bool receiver_active() const noexcept { return rrcState == RrcState::Connected || in_access(); }
  bool camped() const noexcept { return servingCell.has_value(); }
};

UeContext make_ue(UeId id, double positionM, std::uint64_t seed);

enum class ActionKind {
  InitialSiAcquired,
  SiReacquisition,
  TacMismatchObserved,
  RegistrationRequest,
  MissedSi,
  T310Started,
  T310Stopped,
  RadioLinkFailure,
  ReestablishRequest,
  NoCellAvailable,
};

struct Action {
  ActionKind kind;
  std::uint64_t from = 0;
  std::uint64_t to = 0;
  std::optional<CellId> cell;
};

using Actions = std::vector<Action>;

using Measurements = std::map<CellId, double>;

// Strongest RSRP wins; ties go to the lowest cell id. Throws
// NoCellAvailable when nothing clears `floorDbm`, PreconditionViolated on
// an empty map.
CellId select_cell(const Measurements& measurements, double floorDbm = -120.0);

Actions handle_sib1(UeContext& ctx, const codec::Sib1Message& sib1, SimTime now);

struct SiWindow {
  SimTime start;
  SimTime end;  // exclusive

  friend bool operator==(const SiWindow&, const SiWindow&) = default;
};

// Consecutive windows of the cached si-WindowLength starting at periodStart.
std::vector<SiWindow> compute_si_monitoring_occasions(const CachedSi& si, SimTime periodStart,
                                                      unsigned count);

// On-demand SI lookup for the message scheduled in window `siIndex`.
// Returns MissedSi when the UE's computed window differs from the one the
// cell actually uses. REFRESH_BEFORE_USE re-reads `currentSib1` first.
std::optional<Action> check_si_schedule(UeContext& ctx, const codec::Sib1Message& currentSib1,
                                        SimTime periodStart, unsigned siIndex = 1);

// Starts (or retries) random access towards the serving cell.
Msg1 rach_initiate(UeContext& ctx, const codec::RachOccasion& occ, SimTime now,
                   bool reestablishment = false);

std::optional<Msg3> handle_rar(UeContext& ctx, const codec::RarPdu& rar, SimTime now);

enum class RetryDecision { Retry, GiveUp, NotApplicable };

// RAR window / contention timer expiry. On Retry the caller re-invokes
// rach_initiate after rachTimers.backoff.
RetryDecision on_rar_window_expiry(UeContext& ctx, SimTime now);
RetryDecision on_contention_timer_expiry(UeContext& ctx, SimTime now);

// Throws ContentionLost on identity mismatch, leaving the UE in backoff.
void handle_contention_resolution(UeContext& ctx, const Msg4& msg4, SimTime now);

Actions on_sync_indication(UeContext& ctx, bool inSync, SimTime now);

// RLF + re-establishment cell selection. `measurements` are the UE's
// current RSRPs; the selected cell (if any) is reported in a
// ReestablishRequest action and becomes the serving cell.
Actions on_t310_expiry(UeContext& ctx, SimTime now, const Measurements& measurements);

// Brings the power accumulator up to `now`.
void accrue_power(UeContext& ctx, SimTime now);

// activeRx / total after accruing to `now`. PreconditionViolated when no
// time has elapsed.
double account_power(UeContext& ctx, SimTime now);

// Paging occasions k * cycle falling in [from, to).
std::int64_t paging_occasions_between(SimTime from, SimTime to, SimTime cycle);

}  // namespace nrsim::ue
