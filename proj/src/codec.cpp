#include "nrsim/codec.hpp"

#include <fmt/format.h>

#include "nrsim/errors.hpp"

namespace nrsim::codec {

namespace {

constexpr std::size_t kHeaderOctets = 3;

// SIB1 field widths.
constexpr unsigned kValueTagBits = 5;
constexpr unsigned kTacBits = 24;
constexpr unsigned kSiWindowBits = 2;
constexpr unsigned kCellIdentityBits = 36;
constexpr unsigned kPeriodBits = 16;
constexpr unsigned kPlmnCountBits = 4;
constexpr unsigned kMccBits = 10;
constexpr unsigned kMncBits = 10;

// RAR field widths.
constexpr unsigned kRapidBits = 6;
constexpr unsigned kTaBits = 12;
constexpr unsigned kFreqAssignBits = 14;
constexpr unsigned kTimeAssignBits = 4;
constexpr unsigned kMcsBits = 4;
constexpr unsigned kGrantReservedBits = 5;
constexpr unsigned kTcRntiBits = 16;
constexpr std::size_t kRarPayloadOctets = 8;

[[noreturn]] void violation(const std::string& what) { throw InvariantViolation(what); }

Bytes frame(std::uint8_t tag, Bytes payload) {
  if (payload.size() > 0xFFFF) violation("payload exceeds 16-bit length field");
  Bytes out;
  out.reserve(kHeaderOctets + payload.size());
  out.push_back(tag);
  out.push_back(static_cast<std::uint8_t>(payload.size() >> 8));
  out.push_back(static_cast<std::uint8_t>(payload.size() & 0xFF));
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

std::span<const std::uint8_t> unframe(std::span<const std::uint8_t> bytes, std::uint8_t tag,
                                      const char* what) {
  if (bytes.size() < kHeaderOctets) throw MalformedMessage(fmt::format("{}: truncated header", what));
  if (bytes[0] != tag) {
    throw MalformedMessage(fmt::format("{}: unexpected message tag 0x{:02x}", what, bytes[0]));
  }
  const std::size_t len = (std::size_t{bytes[1]} << 8) | bytes[2];
  if (len != bytes.size() - kHeaderOctets) {
    throw MalformedMessage(fmt::format("{}: length field {} does not match {} payload octets", what,
                                       len, bytes.size() - kHeaderOctets));
  }
  return bytes.subspan(kHeaderOctets);
}

void check_period(SimTime p, const char* name) {
  if (p.count() <= 0 || p.count() > 0xFFFF) violation(fmt::format("{} must be in 1..65535 ms", name));
}

}  // namespace

SimTime to_duration(SiWindowLength w) noexcept {
  switch (w) {
    case SiWindowLength::MS5: return SimTime{5};
    case SiWindowLength::MS10: return SimTime{10};
    case SiWindowLength::MS15: return SimTime{15};
    case SiWindowLength::MS20: return SimTime{20};
  }
  return SimTime{0};
}

SiWindowLength si_window_from_ms(long long ms) {
  switch (ms) {
    case 5: return SiWindowLength::MS5;
    case 10: return SiWindowLength::MS10;
    case 15: return SiWindowLength::MS15;
    case 20: return SiWindowLength::MS20;
    default: violation(fmt::format("si-WindowLength {} ms is not one of 5/10/15/20", ms));
  }
}

void validate(const PlmnId& p) {
  if (p.mcc > 999) violation(fmt::format("mcc {} exceeds 999", p.mcc));
  if (p.mncLength != 2 && p.mncLength != 3) violation("mnc length must be 2 or 3");
  const unsigned mncMax = p.mncLength == 2 ? 99 : 999;
  if (p.mnc > mncMax) violation(fmt::format("mnc {} does not fit {} digits", p.mnc, p.mncLength));
}

void validate(const Sib1Message& m) {
  if (m.valueTag > kValueTagMax) violation(fmt::format("valueTag {} exceeds 31", m.valueTag));
  if (m.trackingAreaCode > kTacMax) violation("trackingAreaCode exceeds 24 bits");
  if (static_cast<unsigned>(m.siWindowLength) > 3) violation("unknown si-WindowLength");
  if (m.plmnList.empty() || m.plmnList.size() > kMaxPlmns) violation("plmnList must hold 1..12 entries");
  for (const auto& p : m.plmnList) validate(p);
  if (m.cellIdentity > kCellIdentityMax) violation("cellIdentity exceeds 36 bits");
  check_period(m.sib1Periodicity, "sib1Periodicity");
  if (m.rachConfig.raResponseWindow.count() <= 0 || m.rachConfig.raResponseWindow.count() > 0xFF) {
    violation("raResponseWindow must be in 1..255 ms");
  }
  check_period(m.rachConfig.prachPeriodicity, "prachPeriodicity");
}

void validate(const RarPdu& p) {
  if (p.rapid > 63) violation(fmt::format("RAPID {} exceeds 6 bits", p.rapid));
  if (p.taCommand > kTaCommandMax) violation(fmt::format("TA command {} exceeds 3846", p.taCommand));
  if (p.msg3Grant.freqAssign >= (1u << kFreqAssignBits)) violation("Msg3 freqAssign exceeds 14 bits");
  if (p.msg3Grant.timeAssign >= (1u << kTimeAssignBits)) violation("Msg3 timeAssign exceeds 4 bits");
  if (p.msg3Grant.mcs >= (1u << kMcsBits)) violation("Msg3 mcs exceeds 4 bits");
}

Bytes encode_sib1(const Sib1Message& msg) {
  validate(msg);
  BitWriter w;
  w.put(msg.valueTag, kValueTagBits);
  w.put(msg.trackingAreaCode, kTacBits);
  w.put(static_cast<unsigned>(msg.siWindowLength), kSiWindowBits);
  w.put_bool(msg.cellBarred);
  w.put(msg.cellIdentity, kCellIdentityBits);
  w.put(static_cast<std::uint64_t>(msg.sib1Periodicity.count()), kPeriodBits);
  const auto& rc = msg.rachConfig;
  w.put(rc.preambleFormatId, 8);
  w.put(static_cast<std::uint64_t>(rc.raResponseWindow.count()), 8);
  w.put(rc.powerRampingStepDb, 8);
  w.put_signed(rc.preambleTargetPowerDbm, 16);
  w.put(static_cast<std::uint64_t>(rc.prachPeriodicity.count()), kPeriodBits);
  w.put(msg.plmnList.size(), kPlmnCountBits);
  for (const auto& p : msg.plmnList) {
    w.put(p.mcc, kMccBits);
    w.put_bool(p.mncLength == 3);
    w.put(p.mnc, kMncBits);
  }
  return frame(kSib1Tag, std::move(w).finish());
}

Sib1Message decode_sib1(std::span<const std::uint8_t> bytes) {
  BitReader r(unframe(bytes, kSib1Tag, "SIB1"));
  Sib1Message m;
  m.valueTag = static_cast<std::uint8_t>(r.get(kValueTagBits));
  m.trackingAreaCode = static_cast<std::uint32_t>(r.get(kTacBits));
  m.siWindowLength = static_cast<SiWindowLength>(r.get(kSiWindowBits));
  m.cellBarred = r.get_bool();
  m.cellIdentity = r.get(kCellIdentityBits);
  m.sib1Periodicity = SimTime{static_cast<long long>(r.get(kPeriodBits))};
  auto& rc = m.rachConfig;
  rc.preambleFormatId = static_cast<std::uint8_t>(r.get(8));
  rc.raResponseWindow = SimTime{static_cast<long long>(r.get(8))};
  rc.powerRampingStepDb = static_cast<std::uint8_t>(r.get(8));
  rc.preambleTargetPowerDbm = static_cast<std::int16_t>(r.get_signed(16));
  rc.prachPeriodicity = SimTime{static_cast<long long>(r.get(kPeriodBits))};
  const auto count = r.get(kPlmnCountBits);
  if (count == 0 || count > kMaxPlmns) violation(fmt::format("decoded PLMN count {}", count));
  m.plmnList.clear();
  for (std::uint64_t i = 0; i < count; ++i) {
    PlmnId p;
    p.mcc = static_cast<std::uint16_t>(r.get(kMccBits));
    p.mncLength = r.get_bool() ? 3 : 2;
    p.mnc = static_cast<std::uint16_t>(r.get(kMncBits));
    m.plmnList.push_back(p);
  }
  if (r.remaining_bits() >= 8) throw MalformedMessage("SIB1: trailing octets after last PLMN");
  if (!r.rest_is_zero()) throw MalformedMessage("SIB1: non-zero padding");
  validate(m);
  return m;
}

Bytes encode_rar(const RarPdu& pdu) {
  validate(pdu);
  BitWriter w;
  // MAC subheader: E=0, T=1 (RAPID follows).
  w.put_bool(false);
  w.put_bool(true);
  w.put(pdu.rapid, kRapidBits);
  // MAC RAR: R, TA command, UL grant, TC-RNTI.
  w.put_bool(false);
  w.put(pdu.taCommand, kTaBits);
  w.put(pdu.msg3Grant.freqAssign, kFreqAssignBits);
  w.put(pdu.msg3Grant.timeAssign, kTimeAssignBits);
  w.put(pdu.msg3Grant.mcs, kMcsBits);
  w.put(0, kGrantReservedBits);
  w.put(pdu.tcRnti, kTcRntiBits);
  return frame(kRarTag, std::move(w).finish());
}

RarPdu decode_rar(std::span<const std::uint8_t> bytes) {
  const auto payload = unframe(bytes, kRarTag, "RAR");
  if (payload.size() != kRarPayloadOctets) {
    throw MalformedMessage(fmt::format("RAR: payload is {} octets, expected 8", payload.size()));
  }
  BitReader r(payload);
  if (r.get_bool()) throw MalformedMessage("RAR: extension bit set");
  if (!r.get_bool()) throw MalformedMessage("RAR: backoff-indicator subheader not supported");
  RarPdu p;
  p.rapid = static_cast<std::uint8_t>(r.get(kRapidBits));
  if (r.get_bool()) throw MalformedMessage("RAR: reserved bit set");
  const auto ta = r.get(kTaBits);
  if (ta > kTaCommandMax) violation(fmt::format("decoded TA command {} exceeds 3846", ta));
  p.taCommand = static_cast<std::uint16_t>(ta);
  p.msg3Grant.freqAssign = static_cast<std::uint16_t>(r.get(kFreqAssignBits));
  p.msg3Grant.timeAssign = static_cast<std::uint8_t>(r.get(kTimeAssignBits));
  p.msg3Grant.mcs = static_cast<std::uint8_t>(r.get(kMcsBits));
  if (r.get(kGrantReservedBits) != 0) throw MalformedMessage("RAR: reserved grant bits set");
  p.tcRnti = static_cast<std::uint16_t>(r.get(kTcRntiBits));
  return p;
}

std::uint16_t compute_ra_rnti(const RachOccasion& occ, const OccasionGrid& grid) {
  if (occ.slotIndex >= grid.slotsPerFrame) violation("RACH occasion slot index outside frame");
  if (occ.freqIndex >= grid.freqOccasions) violation("RACH occasion freq index outside grid");
  const std::uint32_t rnti = 1 + occ.slotIndex + grid.slotsPerFrame * occ.freqIndex;
  if (rnti > 65519) violation("RA-RNTI outside 1..65519");
  return static_cast<std::uint16_t>(rnti);
}

std::string to_debug_string(const Sib1Message& m) {
  std::string out = fmt::format(
      "valueTag={}\ntrackingAreaCode=0x{:06x}\nsiWindowLength={}ms\ncellIdentity={}\ncellBarred={}\n"
      "sib1Periodicity={}ms\npreambleFormatId={}\nraResponseWindow={}ms\npowerRampingStep={}dB\n"
      "preambleTargetPower={}dBm\nprachPeriodicity={}ms\n",
      m.valueTag, m.trackingAreaCode, to_duration(m.siWindowLength).count(), m.cellIdentity,
      m.cellBarred, m.sib1Periodicity.count(), m.rachConfig.preambleFormatId,
      m.rachConfig.raResponseWindow.count(), m.rachConfig.powerRampingStepDb,
      m.rachConfig.preambleTargetPowerDbm, m.rachConfig.prachPeriodicity.count());
  for (const auto& p : m.plmnList) {
    out += fmt::format("plmn={:03}-{:0{}}\n", p.mcc, p.mnc, p.mncLength);
  }
  return out;
}

std::string to_debug_string(const RarPdu& p) {
  return fmt::format("rapid={}\ntaCommand={}\nmsg3.freqAssign={}\nmsg3.timeAssign={}\nmsg3.mcs={}\ntcRnti=0x{:04x}\n",
                     p.rapid, p.taCommand, p.msg3Grant.freqAssign, p.msg3Grant.timeAssign,
                     p.msg3Grant.mcs, p.tcRnti);
}

std::string to_hex(std::span<const std::uint8_t> bytes) {
  std::string out;
  out.reserve(bytes.size() * 2);
  for (auto b : bytes) out += fmt::format("{:02x}", b);
  return out;
}

Bytes from_hex(std::string_view hex) {
  if (hex.size() % 2 != 0) throw MalformedMessage("hex string has odd length");
  auto nibble = [](char c) -> std::uint8_t {
    if (c >= '0' && c <= '9') return static_cast<std::uint8_t>(c - '0');
    if (c >= 'a' && c <= 'f') return static_cast<std::uint8_t>(c - 'a' + 10);
    if (c >= 'A' && c <= 'F') return static_cast<std::uint8_t>(c - 'A' + 10);
    throw MalformedMessage("non-hex character in hex string");
  };
  Bytes out;
  out.reserve(hex.size() / 2);
  for (std::size_t i = 0; i < hex.size(); i += 2) {
    out.push_back(static_cast<std::uint8_t>((nibble(hex[i]) << 4) | nibble(hex[i + 1])));
  }
  return out;
}

}  // namespace nrsim::codec
