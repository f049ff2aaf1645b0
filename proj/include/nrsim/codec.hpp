#pragma once

// Wire codecs for the two unprotected message families exercised by the
// attacks: SIB1 and the Random Access Response MAC PDU.
//
// Framing (both messages):
//   octet 0      message type tag (0x01 SIB1, 0x02 RAR)
//   octets 1..2  payload length in octets, big-endian
//   octets 3..   payload, MSB-first packed fields, zero padded to an octet
//
// All encoders and decoders are pure functions.

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nrsim/bits.hpp"
#include "nrsim/types.hpp"

namespace nrsim::codec {

inline constexpr std::uint8_t kSib1Tag = 0x01;
inline constexpr std::uint8_t kRarTag = 0x02;

inline constexpr unsigned kValueTagMax = 31;
inline constexpr std::uint32_t kTacMax = (1u << 24) - 1;
inline constexpr std::uint64_t kCellIdentityMax = (std::uint64_t{1} << 36) - 1;
inline constexpr unsigned kTaCommandMax = 3846;
inline constexpr std::size_t kMaxPlmns = 12;
inline constexpr SimTime kDefaultSib1Periodicity{160};

struct PlmnId {
  std::uint16_t mcc = 1;
  std::uint16_t mnc = 1;
  std::uint8_t mncLength = 2;

  friend bool operator==(const PlmnId&, const PlmnId&) = default;
};

enum class SiWindowLength : std::uint8_t { MS5, MS10, MS15, MS20 };

SimTime to_duration(SiWindowLength w) noexcept;
// Throws InvariantViolation unless ms is one of 5/10/15/20.
SiWindowLength si_window_from_ms(long long ms);

struct RachConfigCommon {
  std::uint8_t preambleFormatId = 0;
  SimTime raResponseWindow{10};
  std::uint8_t powerRampingStepDb = 2;
  std::int16_t preambleTargetPowerDbm = -100;
  SimTime prachPeriodicity{10};

  friend bool operator==(const RachConfigCommon&, const RachConfigCommon&) = default;
};

struct Sib1Message {
  std::uint8_t valueTag = 0;
  std::uint32_t trackingAreaCode = 0;
  SiWindowLength siWindowLength = SiWindowLength::MS10;
  std::vector<PlmnId> plmnList{PlmnId{}};
  std::uint64_t cellIdentity = 0;
  bool cellBarred = false;
  RachConfigCommon rachConfig;
  SimTime sib1Periodicity = kDefaultSib1Periodicity;

  friend bool operator==(const Sib1Message&, const Sib1Message&) = default;
};

struct RachOccasion {
  std::uint32_t slotIndex = 0;
  std::uint32_t freqIndex = 0;
  std::uint32_t frameNumber = 0;
};

// Occasion grid used for RA-RNTI derivation.
struct OccasionGrid {
  std::uint32_t slotsPerFrame = 14;
  std::uint32_t freqOccasions = 8;
};

struct Msg3Grant {
  std::uint16_t freqAssign = 0;  // 14 bits
  std::uint8_t timeAssign = 0;   // 4 bits
  std::uint8_t mcs = 0;          // 4 bits

  friend bool operator==(const Msg3Grant&, const Msg3Grant&) = default;
};

struct RarPdu {
  std::uint8_t rapid = 0;
  std::uint16_t taCommand = 0;
  Msg3Grant msg3Grant;
  std::uint16_t tcRnti = 0;

  friend bool operator==(const RarPdu&, const RarPdu&) = default;
};

// Throw InvariantViolation on the first out-of-range field.
void validate(const PlmnId& p);
void validate(const Sib1Message& m);
void validate(const RarPdu& p);

Bytes encode_sib1(const Sib1Message& msg);
// MalformedMessage on framing/length problems, InvariantViolation on
// in-width but out-of-domain field values.
Sib1Message decode_sib1(std::span<const std::uint8_t> bytes);

Bytes encode_rar(const RarPdu& pdu);
RarPdu decode_rar(std::span<const std::uint8_t> bytes);

// rnti = 1 + slotIndex + slotsPerFrame * freqIndex.
std::uint16_t compute_ra_rnti(const RachOccasion& occ, const OccasionGrid& grid = {});

// `field=value` per line, for logs.
std::string to_debug_string(const Sib1Message& m);
std::string to_debug_string(const RarPdu& p);

std::string to_hex(std::span<const std::uint8_t> bytes);
// Throws MalformedMessage on odd length or non-hex characters.
Bytes from_hex(std::string_view hex);

}  // namespace nrsim::codec
