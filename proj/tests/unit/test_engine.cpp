#include <doctest.h>

#include <array>
#include <map>
#include <set>

#include "nrsim/batch.hpp"
#include "nrsim/engine.hpp"
#include "nrsim/errors.hpp"
#include "test_support.hpp"

using namespace nrsim;

namespace {

Scenario shortened(const std::string& name, long long ms) {
  auto s = test::shipped(name);
  s.duration = SimTime{ms};
  return s;
}

std::size_t count(const EventLog& log, EventKind k) {
  std::size_t n = 0;
  for (const auto& e : log.events) n += e.kind == k;
  return n;
}

}  // namespace

TEST_CASE("same scenario and seed give byte-identical logs") {
  for (const char* name : {"ta_delta_30", "valuetag_10s", "si_window_toggle"}) {
    const auto s = shortened(name, 300000);
    CHECK(serialize(run_scenario(s).log) == serialize(run_scenario(s).log));
  }
}

TEST_CASE("seed changes the preamble draws") {
  auto a = shortened("ta_delta_30", 120000);
  auto b = a;
  b.seed = 99;
  CHECK(serialize(run_scenario(a).log) != serialize(run_scenario(b).log));
}

TEST_CASE("metrics recomputed from the parsed log match") {
  const auto r = run_scenario(shortened("ta_delta_30", 600000));
  const auto back = parse_event_log(serialize(r.log));
  CHECK(compute_metrics(back) == r.metrics);
  CHECK(metrics_csv(compute_metrics(back)) == metrics_csv(r.metrics));
}

TEST_CASE("causality and monotonicity") {
  for (const char* name : {"ta_delta_30", "connected_baseline", "valuetag_10s"}) {
    const auto r = run_scenario(shortened(name, 600000));
    bool t310 = false;
    bool rlf = false;
    bool rach = false;
    bool rar = false;
    bool msg3 = false;
    SimTime last{0};
    for (const auto& e : r.log.events) {
      REQUIRE(e.time >= last);
      last = e.time;
      switch (e.kind) {
        case EventKind::T310Started: t310 = true; break;
        case EventKind::Rlf:
          REQUIRE(t310);
          t310 = false;
          rlf = true;
          break;
        case EventKind::ReestablishReq:
          REQUIRE(rlf);
          rlf = false;
          break;
        case EventKind::RachAttempt: rach = true; break;
        case EventKind::RarSent: rar = rach; break;
        case EventKind::Msg3Sent: msg3 = rar; break;
        case EventKind::ConnectionEstablished:
          REQUIRE(msg3);
          rach = rar = msg3 = false;
          break;
        default: break;
      }
    }
  }
}

TEST_CASE("detectors are pure observers") {
  for (const char* name : {"ta_delta_30", "valuetag_10s"}) {
    auto on = shortened(name, 300000);
    auto off = on;
    off.detectors.taRsrp = false;
    off.detectors.valueTagRate = false;
    const auto withDetectors = run_scenario(on).log;
    auto filtered = withDetectors;
    std::erase_if(filtered.events, [](const SimEvent& e) { return e.kind == EventKind::DetectorAlert; });
    CHECK(count(withDetectors, EventKind::DetectorAlert) > 0);
    CHECK(serialize(filtered) == serialize(run_scenario(off).log));
  }
}

TEST_CASE("delta 0 behaves exactly like no attack") {
  auto zero = shortened("ta_delta_5", 120000);
  zero.cells[1].attack = gnb::AttackProfile::ta_delta(0);
  auto none = zero;
  none.cells[1].attack = gnb::AttackProfile::none();
  CHECK(serialize(run_scenario(zero).log) == serialize(run_scenario(none).log));
}

TEST_CASE("injected TA is constant across the reconnection loop") {
  const auto r = run_scenario(shortened("ta_delta_30", 600000));
  std::set<std::string> tas;
  for (const auto& e : r.log.events) {
    if (e.kind == EventKind::RarSent) tas.insert(std::string(e.get("ta")));
  }
  CHECK(tas == std::set<std::string>{"30"});
}

TEST_CASE("connection never outlasts the RLF budget under attack") {
  const auto r = run_scenario(shortened("ta_delta_30", 900000));
  const auto tl = reconstruct_timelines(r.log).at(0);
  REQUIRE(tl.connectionTimes.size() >= tl.rlfTimes.size());
  // n310 * syncEval + t310 + slack
  for (auto ttr : tl.timeToRlf) CHECK(ttr <= SimTime{10 * 1000 + 30000 + 1000});
}

TEST_CASE("removing the rogue lets re-establishment escape to the legitimate cell") {
  auto s = shortened("ta_delta_30", 300000);
  s.cells[1].activeUntil = SimTime{30000};
  const auto r = run_scenario(s);
  CHECK(r.metrics.rlfCount == 1);
  const auto& last = r.ues.at(0);
  CHECK(last.rrcState == ue::RrcState::Connected);
  CHECK(last.servingCell == CellId{1});
}

TEST_CASE("rogue appearing later is selected by idle UEs") {
  auto s = shortened("valuetag_10s", 120000);
  s.cells[1].activeFrom = SimTime{40000};
  const auto r = run_scenario(s);
  std::size_t reacq = 0;
  for (const auto& e : r.log.events) {
    if (e.kind == EventKind::SiReacquisition) {
      CHECK(e.time > SimTime{40000});
      ++reacq;
    }
  }
  CHECK(reacq >= 6);
}

TEST_CASE("STALE_CACHE and EAGER counterfactuals") {
  auto stale = shortened("si_window_toggle", 60000);
  stale.ues[0].policy.siCachePolicy = ue::SiCachePolicy::StaleCache;
  CHECK(run_scenario(stale).metrics.missedSiWindows >= 1);

  auto eager = shortened("tac_cycle_30s", 120000);
  eager.ues[0].policy.registrationPolicy = ue::RegistrationPolicy::Eager;
  const auto m = run_scenario(eager).metrics;
  CHECK(m.registrationRequests >= 1);
  CHECK(m.registrationRequests == m.tacMismatches);
}

TEST_CASE("invalid scenarios are rejected before running") {
  auto s = shortened("baseline", 1000);
  s.ues.clear();
  CHECK_THROWS_AS(run_scenario(s), ConfigInvalid);
}

TEST_CASE("parallel batch matches the serial reference") {
  const auto base = shortened("ta_delta_30", 240000);
  const std::array<int, 7> deltas{5, 10, 20, 30, 40, 50, 60};
  const auto batch = ta_delta_sweep(base, deltas);
  const auto serial = run_batch_serial(batch);
  for (int jobs : {1, 2, 4}) {
    const auto parallel = run_batch_parallel(batch, jobs);
    REQUIRE(parallel.size() == serial.size());
    for (std::size_t i = 0; i < serial.size(); ++i) {
      CHECK(serialize(parallel[i].log) == serialize(serial[i].log));
      CHECK(parallel[i].metrics == serial[i].metrics);
    }
  }
  CHECK_THROWS_AS(ta_delta_sweep(test::shipped("baseline"), deltas), ConfigInvalid);
}

TEST_CASE("parallel batch propagates failures") {
  std::vector<Scenario> batch{shortened("baseline", 1000), shortened("baseline", 1000)};
  batch[1].ues.clear();
  CHECK_THROWS_AS(run_batch_parallel(batch, 2), ConfigInvalid);
}
