#include <doctest.h>

#include <random>
#include <set>

#include "nrsim/codec.hpp"
#include "nrsim/errors.hpp"
#include "test_support.hpp"

using namespace nrsim;
using namespace nrsim::codec;
using nrsim::test::bits;

namespace {

// Independent encoder: builds the SIB1 frame as a '0'/'1' string.
Bytes oracle_sib1(const Sib1Message& m) {
  std::string b;
  bits(b, m.valueTag, 5);
  bits(b, m.trackingAreaCode, 24);
  bits(b, static_cast<unsigned>(m.siWindowLength), 2);
  bits(b, m.cellBarred, 1);
  bits(b, m.cellIdentity, 36);
  bits(b, static_cast<std::uint64_t>(m.sib1Periodicity.count()), 16);
  bits(b, m.rachConfig.preambleFormatId, 8);
  bits(b, static_cast<std::uint64_t>(m.rachConfig.raResponseWindow.count()), 8);
  bits(b, m.rachConfig.powerRampingStepDb, 8);
  bits(b, static_cast<std::uint16_t>(m.rachConfig.preambleTargetPowerDbm), 16);
  bits(b, static_cast<std::uint64_t>(m.rachConfig.prachPeriodicity.count()), 16);
  bits(b, m.plmnList.size(), 4);
  for (const auto& p : m.plmnList) {
    bits(b, p.mcc, 10);
    bits(b, p.mncLength == 3, 1);
    bits(b, p.mnc, 10);
  }
  return test::frame(kSib1Tag, test::pack(b));
}

Bytes oracle_rar(const RarPdu& p) {
  std::string b;
  bits(b, 0, 1);  // E
  bits(b, 1, 1);  // T
  bits(b, p.rapid, 6);
  bits(b, 0, 1);  // R
  bits(b, p.taCommand, 12);
  bits(b, p.msg3Grant.freqAssign, 14);
  bits(b, p.msg3Grant.timeAssign, 4);
  bits(b, p.msg3Grant.mcs, 4);
  bits(b, 0, 5);
  bits(b, p.tcRnti, 16);
  return test::frame(kRarTag, test::pack(b));
}

Sib1Message minimal_sib1() {
  Sib1Message m;
  m.siWindowLength = SiWindowLength::MS5;
  m.plmnList = {PlmnId{1, 1, 2}};
  return m;
}

}  // namespace

TEST_CASE("sib1 all-minimum fields roundtrip") {
  const auto m = minimal_sib1();
  const auto b = encode_sib1(m);
  CHECK(decode_sib1(b) == m);
  CHECK(b == oracle_sib1(m));
}

TEST_CASE("sib1 maximum valueTag and TAC read back") {
  auto m = minimal_sib1();
  m.valueTag = 31;
  m.trackingAreaCode = kTacMax;
  const auto d = decode_sib1(encode_sib1(m));
  CHECK(d.valueTag == 31);
  CHECK(d.trackingAreaCode == kTacMax);
}

TEST_CASE("sib1 out-of-range fields rejected on encode") {
  auto m = minimal_sib1();
  m.valueTag = 32;
  CHECK_THROWS_AS(encode_sib1(m), InvariantViolation);
  m = minimal_sib1();
  m.trackingAreaCode = kTacMax + 1;
  CHECK_THROWS_AS(encode_sib1(m), InvariantViolation);
  m = minimal_sib1();
  m.plmnList.clear();
  CHECK_THROWS_AS(encode_sib1(m), InvariantViolation);
  m = minimal_sib1();
  m.plmnList = {PlmnId{1000, 1, 2}};
  CHECK_THROWS_AS(encode_sib1(m), InvariantViolation);
  m.plmnList = {PlmnId{1, 100, 2}};
  CHECK_THROWS_AS(encode_sib1(m), InvariantViolation);
  m.plmnList = {PlmnId{1, 100, 3}};
  CHECK_NOTHROW(encode_sib1(m));
}

TEST_CASE("sib1 random roundtrip and oracle agreement") {
  std::mt19937_64 rng(0x5151);
  for (int i = 0; i < 10000; ++i) {
    const auto m = test::random_sib1(rng);
    const auto b = encode_sib1(m);
    REQUIRE(b == oracle_sib1(m));
    REQUIRE(decode_sib1(b) == m);
    REQUIRE(encode_sib1(m) == b);
  }
}

TEST_CASE("sib1 decode rejects framing problems") {
  const auto good = encode_sib1(minimal_sib1());
  auto b = good;
  b[0] = kRarTag;
  CHECK_THROWS_AS(decode_sib1(b), MalformedMessage);
  b = good;
  b.push_back(0);
  CHECK_THROWS_AS(decode_sib1(b), MalformedMessage);
  b = good;
  b.pop_back();
  CHECK_THROWS_AS(decode_sib1(b), MalformedMessage);
  CHECK_THROWS_AS(decode_sib1(Bytes{}), MalformedMessage);
  // Non-zero padding: the minimal frame ends with padding bits.
  b = good;
  b.back() |= 0x01;
  CHECK_THROWS_AS(decode_sib1(b), MalformedMessage);
}

TEST_CASE("rar boundary TA values") {
  RarPdu p;
  CHECK(decode_rar(encode_rar(p)) == p);
  p.taCommand = 3846;
  CHECK(decode_rar(encode_rar(p)) == p);
  p.taCommand = 3847;
  CHECK_THROWS_AS(encode_rar(p), InvariantViolation);
}

TEST_CASE("rar decode rejects wire TA above 3846") {
  RarPdu p;
  p.rapid = 17;
  for (unsigned ta : {3847u, 4000u, 4095u}) {
    // Craft the wire bits directly; encode_rar would refuse.
    auto wire = oracle_rar(p);
    std::string b;
    bits(b, 0, 1);
    bits(b, 1, 1);
    bits(b, p.rapid, 6);
    bits(b, 0, 1);
    bits(b, ta, 12);
    bits(b, 0, 14 + 4 + 4 + 5 + 16);
    wire = test::frame(kRarTag, test::pack(b));
    CHECK_THROWS_AS(decode_rar(wire), InvariantViolation);
  }
}

TEST_CASE("rar random roundtrip and oracle agreement") {
  std::mt19937_64 rng(0xAA);
  for (int i = 0; i < 10000; ++i) {
    const auto p = test::random_rar(rng);
    const auto b = encode_rar(p);
    REQUIRE(b == oracle_rar(p));
    REQUIRE(decode_rar(b) == p);
  }
}

TEST_CASE("rar known vector") {
  RarPdu p{14, 30, {12, 3, 4}, 0x0100};
  // E=0 T=1 RAPID=001110 | R=0 TA=000000011110 | freq 00000000001100 |
  // time 0011 | mcs 0100 | reserved 00000 | tcRnti 0000000100000000
  const Bytes expected{0x02, 0x00, 0x08, 0x4E, 0x00, 0xF0, 0x01, 0x86, 0x80, 0x01, 0x00};
  CHECK(encode_rar(p).size() == 11);
  CHECK(oracle_rar(p) == expected);
  CHECK(encode_rar(p) == expected);
}

TEST_CASE("bit-flip fuzzing never crashes") {
  std::mt19937_64 rng(7);
  std::size_t inputs = 0;
  std::size_t typedErrors = 0;
  for (int i = 0; i < 6000; ++i) {
    auto b = encode_sib1(test::random_sib1(rng));
    const auto flips = 1 + rng() % 4;
    for (std::uint64_t f = 0; f < flips; ++f) {
      const auto bit = rng() % (b.size() * 8);
      b[bit / 8] ^= static_cast<std::uint8_t>(0x80u >> (bit % 8));
    }
    ++inputs;
    try {
      const auto m = decode_sib1(b);
      CHECK_NOTHROW(validate(m));
    } catch (const MalformedMessage&) {
      ++typedErrors;
    } catch (const InvariantViolation&) {
      ++typedErrors;
    }
  }
  for (int i = 0; i < 6000; ++i) {
    auto b = encode_rar(test::random_rar(rng));
    const auto bit = rng() % (b.size() * 8);
    b[bit / 8] ^= static_cast<std::uint8_t>(0x80u >> (bit % 8));
    if (rng() % 8 == 0) b.resize(rng() % b.size());
    ++inputs;
    try {
      const auto p = decode_rar(b);
      CHECK(p.taCommand <= kTaCommandMax);
    } catch (const MalformedMessage&) {
      ++typedErrors;
    } catch (const InvariantViolation&) {
      ++typedErrors;
    }
  }
  CHECK(inputs >= 10000);
  CHECK(typedErrors > 0);
}

TEST_CASE("ra-rnti") {
  CHECK(compute_ra_rnti({0, 0, 0}) == 1);
  CHECK(compute_ra_rnti({3, 1, 0}) != compute_ra_rnti({3, 2, 0}));
  std::set<std::uint16_t> seen;
  for (std::uint32_t s = 0; s < 14; ++s) {
    for (std::uint32_t f = 0; f < 8; ++f) {
      const auto r = compute_ra_rnti({s, f, 5});
      CHECK(r == 1 + s + 14 * f);
      CHECK(r >= 1);
      CHECK(r <= 65519);
      seen.insert(r);
    }
  }
  CHECK(seen.size() == 112);
}

TEST_CASE("si-WindowLength mapping") {
  CHECK(to_duration(SiWindowLength::MS5) == SimTime{5});
  CHECK(to_duration(SiWindowLength::MS20) == SimTime{20});
  CHECK(si_window_from_ms(15) == SiWindowLength::MS15);
  CHECK_THROWS_AS(si_window_from_ms(40), InvariantViolation);
}

TEST_CASE("hex helpers") {
  const Bytes b{0x00, 0xAB, 0x7f};
  CHECK(to_hex(b) == "00ab7f");
  CHECK(from_hex("00ab7f") == b);
  CHECK_THROWS_AS(from_hex("abc"), MalformedMessage);
  CHECK_THROWS_AS(from_hex("zz"), MalformedMessage);
}

TEST_CASE("debug rendering lists fields one per line") {
  const auto s = to_debug_string(RarPdu{5, 40, {1, 2, 3}, 0x101});
  CHECK(s.find("taCommand=40") != std::string::npos);
  CHECK(s.find("rapid=5") != std::string::npos);
}
