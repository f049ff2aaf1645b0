#include <doctest.h>

#include <cmath>

#include "nrsim/errors.hpp"
#include "nrsim/radio.hpp"
#include "nrsim/timing.hpp"

using namespace nrsim;
using namespace nrsim::timing;

namespace {
const Numerology mu0 = Numerology::of(0);
}

TEST_CASE("TA unit per numerology") {
  CHECK(ta_unit_duration(mu0).count() == doctest::Approx(0.5208));
  CHECK(ta_unit_duration(Numerology::of(1)).count() == doctest::Approx(0.2604));
  CHECK(ta_unit_duration(mu0) / ta_unit_duration(Numerology::of(4)) == doctest::Approx(16.0));
  for (unsigned mu = 0; mu < 4; ++mu) {
    CHECK(ta_unit_duration(Numerology::of(mu)) / ta_unit_duration(Numerology::of(mu + 1)) == doctest::Approx(2.0));
  }
  CHECK_THROWS_AS(Numerology::of(5), InvariantViolation);
}

TEST_CASE("ta_to_time") {
  CHECK(ta_to_time(0, mu0).count() == 0.0);
  CHECK(ta_to_time(3846, mu0).count() == doctest::Approx(2002.9968));
  CHECK(ta_to_time(20, mu0).count() == doctest::Approx(2.0 * ta_to_time(10, mu0).count()));
  CHECK_THROWS_AS(ta_to_time(3847, mu0), InvariantViolation);
}

TEST_CASE("quantize_ta") {
  CHECK(quantize_ta(Micros{0.0}, mu0) == 0);
  CHECK(quantize_ta(Micros{5.208}, mu0) == 10);
  CHECK(quantize_ta(Micros{1e6}, mu0) == 3846);
  CHECK_THROWS_AS(quantize_ta(Micros{-1.0}, mu0), PreconditionViolated);
}

TEST_CASE("quantization error within half a unit over a dense grid") {
  for (unsigned mu = 0; mu <= 4; ++mu) {
    const auto n = Numerology::of(mu);
    const double unit = ta_unit_duration(n).count();
    const double maxUnclamped = 3846.0 * unit;
    for (int i = 0; i < 10000; ++i) {
      const Micros d{maxUnclamped * i / 10000.0};
      const double err = std::abs(ta_to_time(quantize_ta(d, n), n).count() - d.count());
      REQUIRE(err <= 0.5 * unit + 1e-9);
    }
  }
}

TEST_CASE("linearity of ta_to_time") {
  for (unsigned a = 0; a <= 3846; a += 37) {
    for (unsigned b = 0; a + b <= 3846; b += 101) {
      REQUIRE(ta_to_time(a + b, mu0).count() ==
              doctest::Approx(ta_to_time(a, mu0).count() + ta_to_time(b, mu0).count()));
    }
  }
}

TEST_CASE("apply_rar_ta is absolute and idempotent") {
  TaState s{Micros{123.0}, mu0};
  CHECK(apply_rar_ta(s, 0).nta.count() == 0.0);
  CHECK(apply_rar_ta(s, 20).nta.count() == doctest::Approx(10.416));
  CHECK(apply_rar_ta(apply_rar_ta(s, 20), 20).nta.count() == apply_rar_ta(s, 20).nta.count());
}

TEST_CASE("arrival offset sign convention") {
  CHECK(uplink_arrival_offset(TaState{Micros{10.0}, mu0}, Micros{5.0}).count() == 0.0);
  CHECK(uplink_arrival_offset(TaState{Micros{0.0}, mu0}, Micros{5.0}).count() == doctest::Approx(-10.0));
}

TEST_CASE("delta sign and linearity over -60..60") {
  // UE 15 km away so legit - 60 stays non-negative.
  const Micros oneWay = radio::propagation_delay(15000.0);
  const unsigned legit = quantize_ta(2.0 * oneWay, mu0);
  REQUIRE(legit >= 60);
  const double base = uplink_arrival_offset(apply_rar_ta({}, legit), oneWay).count();
  const double unit = ta_unit_duration(mu0).count();
  for (int delta = -60; delta <= 60; ++delta) {
    const auto cmd = static_cast<unsigned>(static_cast<int>(legit) + delta);
    const double off = uplink_arrival_offset(apply_rar_ta({}, cmd), oneWay).count();
    REQUIRE(off - base == doctest::Approx(delta * unit));
    if (delta > 0) REQUIRE(off - base > 0.0);
    if (delta < 0) REQUIRE(off - base < 0.0);
  }
}

TEST_CASE("calibration band with the default tolerance") {
  const auto tol = default_tolerance(mu0);
  CHECK(tol.maxAbsOffset.count() == doctest::Approx(7.2912));
  for (int delta : {5, 10}) CHECK(is_uplink_decodable(ta_to_time(delta, mu0), tol));
  for (int delta : {20, 30, 40, 50, 60}) CHECK_FALSE(is_uplink_decodable(ta_to_time(delta, mu0), tol));
  CHECK(is_uplink_decodable(tol.maxAbsOffset, tol));
  CHECK(is_uplink_decodable(-tol.maxAbsOffset, tol));
  CHECK(is_uplink_decodable(Micros{0.0}, tol));
}

TEST_CASE("pathloss and rsrp") {
  CHECK(radio::rsrp_dbm(30, 1.0) == doctest::Approx(-10.0));
  CHECK(radio::rsrp_dbm(30, 0.0) == doctest::Approx(-10.0));
  CHECK(radio::rsrp_dbm(30, 10.0) == doctest::Approx(30.0 - 67.0));
  CHECK(radio::rsrp_dbm(35, 250.0) - radio::rsrp_dbm(30, 250.0) == doctest::Approx(5.0));
  double prev = radio::rsrp_dbm(30, 1.0);
  for (double d = 2.0; d < 5000.0; d *= 1.3) {
    const double r = radio::rsrp_dbm(30, d);
    CHECK(r < prev);
    prev = r;
    CHECK(radio::distance_for_pathloss(radio::pathloss_db(d)) == doctest::Approx(d));
  }
}

TEST_CASE("propagation delay") {
  CHECK(radio::propagation_delay(0.0).count() == 0.0);
  CHECK(radio::propagation_delay(299.792).count() == doctest::Approx(1.0));
  CHECK(radio::propagation_delay(60000.0).count() == doctest::Approx(200.139).epsilon(1e-4));
  CHECK_THROWS(radio::propagation_delay(-1.0));
}
