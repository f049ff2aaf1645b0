#include <doctest.h>

#include "nrsim/errors.hpp"
#include "nrsim/radio.hpp"
#include "nrsim/ue.hpp"

using namespace nrsim;
using namespace nrsim::ue;

namespace {

const CellId kLegit{1};
const CellId kRogue{2};

UeContext camped_ue(std::uint8_t tag = 3, std::uint32_t tac = 1) {
  auto ctx = make_ue(UeId{1}, 100.0, 42);
  ctx.servingCell = kLegit;
  codec::Sib1Message sib1;
  sib1.valueTag = tag;
  sib1.trackingAreaCode = tac;
  handle_sib1(ctx, sib1, SimTime{0});
  return ctx;
}

codec::Sib1Message sib1_with(std::uint8_t tag, std::uint32_t tac) {
  codec::Sib1Message m;
  m.valueTag = tag;
  m.trackingAreaCode = tac;
  return m;
}

std::vector<ActionKind> kinds(const Actions& a) {
  std::vector<ActionKind> out;
  for (const auto& x : a) out.push_back(x.kind);
  return out;
}

// Drives a UE through a successful access with the given TA command.
void connect(UeContext& ctx, unsigned ta, SimTime now) {
  const auto msg1 = rach_initiate(ctx, {}, now);
  codec::RarPdu rar{msg1.preambleIndex, static_cast<std::uint16_t>(ta), {12, 3, 4}, 0x0100};
  const auto msg3 = handle_rar(ctx, rar, now + SimTime{4});
  REQUIRE(msg3);
  handle_contention_resolution(ctx, Msg4{msg3->contentionIdentity}, now + SimTime{12});
}

}  // namespace

TEST_CASE("select_cell") {
  CHECK(select_cell({{kLegit, -80}, {kRogue, -75}}) == kRogue);
  CHECK(select_cell({{kLegit, -80}}) == kLegit);
  CHECK(select_cell({{CellId{7}, -90}, {CellId{3}, -90}}) == CellId{3});
  CHECK_THROWS_AS(select_cell({{kLegit, -130}}), NoCellAvailable);
  CHECK_THROWS_AS(select_cell({}), PreconditionViolated);
}

TEST_CASE("handle_sib1 reacquisition and TAC policies") {
  auto ctx = camped_ue(3, 1);
  CHECK(kinds(handle_sib1(ctx, sib1_with(4, 1), SimTime{160})) == std::vector{ActionKind::SiReacquisition});
  CHECK(ctx.cachedSi->valueTag == 4);
  CHECK(ctx.power.activeRxMs >= SimTime{320});

  CHECK(handle_sib1(ctx, sib1_with(4, 1), SimTime{320}).empty());

  ctx.policy.registrationPolicy = RegistrationPolicy::Deferred;
  CHECK(kinds(handle_sib1(ctx, sib1_with(4, 2), SimTime{480})) == std::vector{ActionKind::TacMismatchObserved});

  ctx.policy.registrationPolicy = RegistrationPolicy::Eager;
  const auto eager = kinds(handle_sib1(ctx, sib1_with(4, 3), SimTime{640}));
  CHECK(std::count(eager.begin(), eager.end(), ActionKind::RegistrationRequest) == 1);
}

TEST_CASE("valueTag wraparound counts as a change") {
  auto ctx = camped_ue(31);
  CHECK(kinds(handle_sib1(ctx, sib1_with(0, 1), SimTime{160})) == std::vector{ActionKind::SiReacquisition});
}

TEST_CASE("handle_sib1 preconditions") {
  auto ctx = make_ue(UeId{1}, 0, 1);
  CHECK_THROWS_AS(handle_sib1(ctx, {}, SimTime{0}), NotCamped);
  auto connected = camped_ue();
  connect(connected, 0, SimTime{100});
  CHECK_THROWS_AS(handle_sib1(connected, {}, SimTime{200}), PreconditionViolated);
}

TEST_CASE("duty cycle never decreases when reacquisitions are added") {
  auto quiet = camped_ue();
  auto busy = camped_ue();
  for (int k = 1; k <= 60; ++k) {
    handle_sib1(quiet, sib1_with(3, 1), SimTime{k * 10000});
    handle_sib1(busy, sib1_with(static_cast<std::uint8_t>((3 + k) % 32), 1), SimTime{k * 10000});
  }
  CHECK(account_power(busy, SimTime{600000}) > account_power(quiet, SimTime{600000}));
}

TEST_CASE("SI monitoring windows") {
  CachedSi si;
  si.siWindowLength = codec::SiWindowLength::MS10;
  const auto w = compute_si_monitoring_occasions(si, SimTime{0}, 3);
  REQUIRE(w.size() == 3);
  CHECK(w[0] == SiWindow{SimTime{0}, SimTime{10}});
  CHECK(w[1] == SiWindow{SimTime{10}, SimTime{20}});
  CHECK(w[2] == SiWindow{SimTime{20}, SimTime{30}});
  CHECK(compute_si_monitoring_occasions(si, SimTime{500}, 1) == std::vector{SiWindow{SimTime{500}, SimTime{510}}});
  CHECK_THROWS_AS(compute_si_monitoring_occasions(si, SimTime{0}, 0), PreconditionViolated);
}

TEST_CASE("stale si-WindowLength produces MISSED_SI; refresh does not") {
  auto stale = camped_ue();
  stale.policy.siCachePolicy = SiCachePolicy::StaleCache;
  stale.cachedSi->siWindowLength = codec::SiWindowLength::MS10;
  auto current = sib1_with(3, 1);
  current.siWindowLength = codec::SiWindowLength::MS20;
  const auto missed = check_si_schedule(stale, current, SimTime{0});
  REQUIRE(missed);
  CHECK(missed->kind == ActionKind::MissedSi);
  CHECK(missed->from == 10);
  CHECK(missed->to == 20);

  auto fresh = camped_ue();
  fresh.policy.siCachePolicy = SiCachePolicy::RefreshBeforeUse;
  CHECK_FALSE(check_si_schedule(fresh, current, SimTime{0}));
}

TEST_CASE("rach_initiate") {
  auto a = camped_ue();
  auto b = camped_ue();
  const auto m1 = rach_initiate(a, {}, SimTime{10});
  CHECK(m1.preambleIndex < 64);
  CHECK(rach_initiate(b, {}, SimTime{10}).preambleIndex == m1.preambleIndex);
  CHECK(a.rach.windowEnd == SimTime{20});
  CHECK_THROWS_AS(rach_initiate(a, {}, SimTime{11}), PreconditionViolated);

  auto lost = make_ue(UeId{9}, 0, 1);
  CHECK_THROWS_AS(rach_initiate(lost, {}, SimTime{0}), NotCamped);
}

TEST_CASE("RAR window expiry ramps power on retry and gives up at preambleTransMax") {
  auto ctx = camped_ue();
  ctx.rachTimers.preambleTransMax = 3;
  SimTime t{0};
  double lastPower = -1000;
  for (unsigned attempt = 1; attempt <= 3; ++attempt) {
    const auto m = rach_initiate(ctx, {}, t);
    CHECK(m.txPowerDbm > lastPower);
    lastPower = m.txPowerDbm;
    t = ctx.rach.windowEnd;
    const auto d = on_rar_window_expiry(ctx, t);
    CHECK(d == (attempt < 3 ? RetryDecision::Retry : RetryDecision::GiveUp));
  }
  CHECK_FALSE(ctx.in_access());
}

TEST_CASE("handle_rar applies TA only on RAPID match") {
  auto ctx = camped_ue();
  const auto m1 = rach_initiate(ctx, {}, SimTime{0});
  codec::RarPdu other{static_cast<std::uint8_t>((m1.preambleIndex + 1) % 64), 40, {}, 1};
  CHECK_FALSE(handle_rar(ctx, other, SimTime{4}));
  CHECK(ctx.rach.phase == AccessPhase::AwaitingRar);

  codec::RarPdu mine{m1.preambleIndex, 40, {12, 3, 4}, 0x0101};
  const auto msg3 = handle_rar(ctx, mine, SimTime{4});
  REQUIRE(msg3);
  CHECK(msg3->tcRnti == 0x0101);
  CHECK(msg3->txTime == SimTime{8});
  CHECK(ctx.taState.nta.count() == doctest::Approx(40 * 0.5208));
}

TEST_CASE("poisoned Msg3 offset") {
  const auto oneWay = radio::propagation_delay(20.0);
  const unsigned legit = timing::quantize_ta(2.0 * oneWay, timing::Numerology{});
  auto ctx = camped_ue();
  connect(ctx, legit, SimTime{0});
  CHECK(std::abs(timing::uplink_arrival_offset(ctx.taState, oneWay).count()) < 0.5208);
  auto poisoned = camped_ue();
  connect(poisoned, legit + 30, SimTime{0});
  const auto off = timing::uplink_arrival_offset(poisoned.taState, oneWay);
  CHECK(off.count() == doctest::Approx(15.624 - 2 * oneWay.count()));
  CHECK_FALSE(timing::is_uplink_decodable(off, timing::default_tolerance(timing::Numerology{})));
}

TEST_CASE("contention resolution") {
  auto ctx = camped_ue();
  connect(ctx, 5, SimTime{0});
  CHECK(ctx.rrcState == RrcState::Connected);
  CHECK(ctx.cRnti == 0x0100);

  auto loser = camped_ue();
  const auto m1 = rach_initiate(loser, {}, SimTime{0});
  handle_rar(loser, {m1.preambleIndex, 5, {}, 7}, SimTime{4});
  CHECK_THROWS_AS(handle_contention_resolution(loser, Msg4{loser.contentionIdentity ^ 1}, SimTime{10}), ContentionLost);
  CHECK(loser.rach.phase == AccessPhase::Backoff);

  auto silent = camped_ue();
  const auto m2 = rach_initiate(silent, {}, SimTime{0});
  handle_rar(silent, {m2.preambleIndex, 5, {}, 7}, SimTime{4});
  CHECK(on_contention_timer_expiry(silent, silent.rach.contentionDeadline) == RetryDecision::Retry);
}

TEST_CASE("sync indications drive T310") {
  auto ctx = camped_ue();
  connect(ctx, 0, SimTime{0});
  SimTime t{1000};
  for (int i = 0; i < 9; ++i, t += SimTime{1000}) CHECK(on_sync_indication(ctx, false, t).empty());
  CHECK(kinds(on_sync_indication(ctx, false, t)) == std::vector{ActionKind::T310Started});
  CHECK(ctx.sync.t310Deadline == t + SimTime{30000});
  CHECK(kinds(on_sync_indication(ctx, true, t + SimTime{1000})) == std::vector{ActionKind::T310Stopped});
  CHECK_FALSE(ctx.sync.t310_running());

  auto reset = camped_ue();
  connect(reset, 0, SimTime{0});
  for (int i = 0; i < 9; ++i) on_sync_indication(reset, false, SimTime{1000 * (i + 1)});
  on_sync_indication(reset, true, SimTime{10000});
  CHECK(reset.sync.n310Count == 0);
  CHECK(on_sync_indication(reset, false, SimTime{11000}).empty());
}

TEST_CASE("T310 expiry reselects the strongest cell") {
  auto ctx = camped_ue();
  ctx.servingCell = kRogue;
  connect(ctx, 30, SimTime{0});
  for (int i = 1; i <= 10; ++i) on_sync_indication(ctx, false, SimTime{1000 * i});
  const auto deadline = *ctx.sync.t310Deadline;
  CHECK(on_t310_expiry(ctx, deadline - SimTime{1}, {{kLegit, -80}, {kRogue, -40}}).empty());
  const auto a = on_t310_expiry(ctx, deadline, {{kLegit, -80}, {kRogue, -40}});
  REQUIRE(a.size() == 2);
  CHECK(a[0].kind == ActionKind::RadioLinkFailure);
  CHECK(a[1].kind == ActionKind::ReestablishRequest);
  CHECK(a[1].cell == kRogue);
  CHECK(ctx.rrcState == RrcState::Idle);

  auto escaped = camped_ue();
  escaped.servingCell = kRogue;
  connect(escaped, 30, SimTime{0});
  for (int i = 1; i <= 10; ++i) on_sync_indication(escaped, false, SimTime{1000 * i});
  const auto b = on_t310_expiry(escaped, *escaped.sync.t310Deadline, {{kLegit, -80}});
  CHECK(b.back().cell == kLegit);
  CHECK_FALSE(escaped.cachedSi);

  auto blacklisting = camped_ue();
  blacklisting.servingCell = kRogue;
  blacklisting.blacklistOnRlf = true;
  connect(blacklisting, 30, SimTime{0});
  for (int i = 1; i <= 10; ++i) on_sync_indication(blacklisting, false, SimTime{1000 * i});
  const auto c = on_t310_expiry(blacklisting, *blacklisting.sync.t310Deadline, {{kLegit, -80}, {kRogue, -40}});
  CHECK(c.back().cell == kLegit);
}

TEST_CASE("account_power") {
  auto idle = camped_ue();
  CHECK(account_power(idle, SimTime{1280 * 100}) == doctest::Approx(4.0 / 1280.0));
  CHECK(account_power(idle, SimTime{1280 * 100}) < 0.01);

  auto fresh = make_ue(UeId{1}, 0, 1);
  CHECK_THROWS_AS(account_power(fresh, SimTime{0}), PreconditionViolated);

  auto connected = camped_ue();
  connect(connected, 0, SimTime{0});
  CHECK(account_power(connected, SimTime{10000}) == doctest::Approx(1.0));
}

TEST_CASE("paging occasions") {
  CHECK(paging_occasions_between(SimTime{0}, SimTime{1280}, SimTime{1280}) == 1);
  CHECK(paging_occasions_between(SimTime{1}, SimTime{1280}, SimTime{1280}) == 0);
  CHECK(paging_occasions_between(SimTime{0}, SimTime{1281}, SimTime{1280}) == 2);
  // Additive over any split point.
  for (int mid = 0; mid <= 5000; mid += 97) {
    CHECK(paging_occasions_between(SimTime{0}, SimTime{mid}, SimTime{1280}) +
              paging_occasions_between(SimTime{mid}, SimTime{5000}, SimTime{1280}) ==
          paging_occasions_between(SimTime{0}, SimTime{5000}, SimTime{1280}));
  }
}
